#include "igs/topology.hpp"

#include <map>
#include <stdexcept>

namespace igs {

Vec3 face_point(int face, double xi, double eta) {
    const double u = 2.0 * xi - 1.0;
    const double v = 2.0 * eta - 1.0;
    switch (face) {
        case 0: return {1.0, u, v};
        case 1: return {-1.0, v, u};
        case 2: return {v, 1.0, u};
        case 3: return {u, -1.0, v};
        case 4: return {u, v, 1.0};
        case 5: return {v, u, -1.0};
        default: throw std::invalid_argument("face_point: face id out of range");
    }
}

std::array<int, 3> face_lattice_key(int face, int i, int j, int n) {
    const int G = n - 1;
    switch (face) {
        case 0: return {G, i, j};
        case 1: return {0, j, i};
        case 2: return {j, G, i};
        case 3: return {i, 0, j};
        case 4: return {i, j, G};
        case 5: return {j, i, 0};
        default: throw std::invalid_argument("face_lattice_key: face id out of range");
    }
}

namespace {

// Corner c of a face is the start point of local edge c (counterclockwise).
constexpr int kCorner[4][2] = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};

std::array<int, 3> corner_key(int face, int corner) {
    return face_lattice_key(face, kCorner[corner][0], kCorner[corner][1], 2);
}

} // namespace

CubeTopology build_cube_topology() {
    CubeTopology topo;

    // Edges: group the 24 face-edges by their unordered endpoint pair.
    std::map<std::pair<std::array<int, 3>, std::array<int, 3>>,
             std::vector<std::pair<int, int>>> edge_groups;
    for (int f = 0; f < kNumFaces; ++f) {
        for (int e = 0; e < 4; ++e) {
            auto a = corner_key(f, e);
            auto b = corner_key(f, (e + 1) % 4);
            auto key = (a < b) ? std::make_pair(a, b) : std::make_pair(b, a);
            edge_groups[key].push_back({f, e});
        }
    }
    for (const auto& [key, members] : edge_groups) {
        if (members.size() != 2)
            throw std::logic_error("build_cube_topology: edge not shared by exactly 2 faces");
        auto [fa, ea] = members[0];
        auto [fb, eb] = members[1];
        // Same start point => same traversal direction.
        bool flip = !(corner_key(fa, ea) == corner_key(fb, eb));
        topo.edges.push_back({fa, ea, fb, eb, flip});
    }

    // Vertices: group the 24 face-corners by key.
    std::map<std::array<int, 3>, std::vector<std::pair<int, int>>> vert_groups;
    for (int f = 0; f < kNumFaces; ++f)
        for (int c = 0; c < 4; ++c) vert_groups[corner_key(f, c)].push_back({f, c});
    for (const auto& [key, members] : vert_groups) {
        if (members.size() != 3)
            throw std::logic_error("build_cube_topology: vertex not shared by exactly 3 faces");
        VertexAdjacency va;
        for (int k = 0; k < 3; ++k) va.incident[k] = members[k];
        topo.vertices.push_back(va);
    }
    return topo;
}

GlobalDofMap build_global_dof_map(int n) {
    if (n < 2) throw std::invalid_argument("build_global_dof_map: need n >= 2");
    GlobalDofMap map;
    map.n = n;
    map.local_to_global.assign(6 * n * n, -1);

    // Boundary DOFs are identified geometrically: matching lattice keys on
    // shared edges/vertices collapse to one global DOF. Ownership falls to the
    // lowest face id by scan order.
    std::map<std::array<int, 3>, int> key_to_global;
    int next = 0;
    for (int f = 0; f < kNumFaces; ++f) {
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                auto key = face_lattice_key(f, i, j, n);
                auto it = key_to_global.find(key);
                int g;
                if (it == key_to_global.end()) {
                    g = next++;
                    key_to_global.emplace(key, g);
                } else {
                    g = it->second;
                }
                map.local_to_global[map.local_index(f, i, j)] = g;
            }
        }
    }
    map.num_global = next;
    if (map.num_global != 6 * n * n - 12 * n + 8)
        throw std::logic_error("build_global_dof_map: global count mismatch");

    map.global_on_interface.assign(map.num_global, false);
    for (int f = 0; f < kNumFaces; ++f)
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < n; ++i)
                if (i == 0 || i == n - 1 || j == 0 || j == n - 1)
                    map.global_on_interface[map.global_of(f, i, j)] = true;
    return map;
}

} // namespace igs
