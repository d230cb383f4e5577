#pragma once

#include <Eigen/Sparse>
#include <memory>
#include <vector>

#include "igs/spline.hpp"
#include "igs/topology.hpp"

namespace igs {

// One level of the ladder: identical univariate basis in both directions on
// all six faces, coupled into a C0 global basis.
class MultiPatchBasis {
public:
    MultiPatchBasis(int n, int p)
        : uni_(make_open_uniform_knots(n, p)), dofs_(build_global_dof_map(n)) {}

    const UnivariateBasis& uni() const { return uni_; }
    const GlobalDofMap& dofs() const { return dofs_; }
    int n() const { return dofs_.n; }
    int num_global() const { return dofs_.num_global; }

private:
    UnivariateBasis uni_;
    GlobalDofMap dofs_;
};

// Values and parametric derivatives of every active function at one point.
struct ActiveEval {
    std::vector<int> dofs; // flat DOF indices
    std::vector<double> val, dxi, deta, dxx, dxy, dyy;

    void clear() {
        dofs.clear();
        val.clear(); dxi.clear(); deta.clear();
        dxx.clear(); dxy.clear(); dyy.clear();
    }
};

// Nested ladder of uniformly refined multipatch bases with an active-function
// set drawn from multiple levels. Starts as a single fully active level;
// refine() replaces marked functions by their finer-level children through the
// prolongation map. Immutable from the point of view of evaluation; refine()
// is the only mutator and returns the coefficient transfer.
class HierarchicalBasis {
public:
    struct FlatDof {
        int level;
        int global; // level-global index
    };

    HierarchicalBasis(int n, int p, int max_depth = 3);

    int degree() const { return p_; }
    int base_n() const { return base_n_; }
    int max_depth() const { return max_depth_; }
    int num_levels() const { return static_cast<int>(levels_.size()); }
    int num_dofs() const { return static_cast<int>(flat_dofs_.size()); }
    int finest_active_level() const;

    const MultiPatchBasis& level(int l) const { return *levels_[l]; }
    const std::vector<FlatDof>& flat_dofs() const { return flat_dofs_; }
    const std::vector<std::vector<int>>& active_sets() const { return active_; }
    bool is_interface(int flat) const {
        const FlatDof& d = flat_dofs_[flat];
        return levels_[d.level]->dofs().global_on_interface[d.global];
    }

    // Global prolongation from level l to l+1 (level-global indexing). The
    // target level is built on demand.
    const Eigen::SparseMatrix<double>& prolongation(int l);

    // Evaluate all active functions at (xi,eta) on the given face with
    // parametric derivatives up to nders (0..2).
    void evaluate(int face, double xi, double eta, int nders, ActiveEval& out) const;

    // Replace the marked flat DOFs by their children. Returns the transfer
    // matrix R (new_dofs x old_dofs): for any coefficient vector x the
    // function with coefficients R*x is pointwise unchanged.
    Eigen::SparseMatrix<double> refine(const std::vector<int>& marked);

    // Restore a previously saved active configuration (checkpoint load).
    void set_active(const std::vector<std::vector<int>>& active);

private:
    void rebuild_flat();

    int base_n_, p_, max_depth_;
    std::vector<std::unique_ptr<MultiPatchBasis>> levels_;
    std::vector<Eigen::SparseMatrix<double>> prolong_; // level l -> l+1
    std::vector<std::vector<int>> active_;             // sorted level-globals
    std::vector<FlatDof> flat_dofs_;
    std::vector<std::vector<int>> flat_of_; // per level: level-global -> flat or -1
};

} // namespace igs
