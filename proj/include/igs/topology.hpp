#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "igs/spline.hpp"

namespace igs {

using Vec3 = Eigen::Vector3d;

// The six faces of the hollow cube [-1,1]^3, each parameterized over the
// reference square [0,1]^2 with u = 2*xi - 1, v = 2*eta - 1:
//
//   face 0 (+x): ( 1, u, v)    face 1 (-x): (-1, v, u)
//   face 2 (+y): ( v, 1, u)    face 3 (-y): ( u,-1, v)
//   face 4 (+z): ( u, v, 1)    face 5 (-z): ( v, u,-1)
//
// Axis orderings are chosen so that d/dxi x d/deta points outward on every
// face.
inline constexpr int kNumFaces = 6;

Vec3 face_point(int face, double xi, double eta);

// Integer lattice coordinate of the (i,j) grid node of an n x n per-face grid
// (grid step 1/(n-1)). Nodes on shared cube edges and vertices receive the
// same key from every incident face.
std::array<int, 3> face_lattice_key(int face, int i, int j, int n);

// Local edge numbering on a face: 0: eta=0, 1: xi=1, 2: eta=1, 3: xi=0,
// traversed counterclockwise in (xi,eta).
struct EdgeAdjacency {
    int face_a, edge_a;
    int face_b, edge_b;
    bool orientation_flip; // true if the two traversals run in opposite directions
};

struct VertexAdjacency {
    // (face, corner) triples; corner c is the start point of local edge c.
    std::array<std::pair<int, int>, 3> incident;
};

struct CubeTopology {
    std::vector<EdgeAdjacency> edges;     // 12
    std::vector<VertexAdjacency> vertices; // 8
};

CubeTopology build_cube_topology();

// Couples the six per-face tensor-product bases (identical open uniform knot
// vectors, cardinality n per direction) into one C0 global basis of
// cardinality 6n^2 - 12n + 8. Local DOF (face, i, j) is stored at
// face*n*n + j*n + i (i fastest, row-major in (i,j)).
struct GlobalDofMap {
    int n = 0;
    int num_global = 0;
    std::vector<int> local_to_global;    // size 6*n*n
    std::vector<bool> global_on_interface; // supported on a patch edge

    int local_index(int face, int i, int j) const { return face * n * n + j * n + i; }
    int global_of(int face, int i, int j) const {
        return local_to_global[local_index(face, i, j)];
    }
};

GlobalDofMap build_global_dof_map(int n);

} // namespace igs
