#include "igs/basis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace igs {

HierarchicalBasis::HierarchicalBasis(int n, int p, int max_depth)
    : base_n_(n), p_(p), max_depth_(max_depth) {
    levels_.push_back(std::make_unique<MultiPatchBasis>(n, p));
    active_.push_back({});
    active_[0].resize(levels_[0]->num_global());
    for (int g = 0; g < levels_[0]->num_global(); ++g) active_[0][g] = g;
    rebuild_flat();
}

int HierarchicalBasis::finest_active_level() const {
    for (int l = num_levels() - 1; l >= 0; --l)
        if (!active_[l].empty()) return l;
    throw std::logic_error("HierarchicalBasis: no active functions");
}

const Eigen::SparseMatrix<double>& HierarchicalBasis::prolongation(int l) {
    if (l + 1 >= num_levels()) {
        if (l + 1 > max_depth_)
            throw std::runtime_error("HierarchicalBasis: refinement exceeds maximum depth " +
                                     std::to_string(max_depth_));
        const MultiPatchBasis& coarse = *levels_[l];
        RefinedBasis rb = uniform_refine(coarse.uni());
        const int nf = rb.basis.size();
        levels_.push_back(std::make_unique<MultiPatchBasis>(nf, p_));
        active_.push_back({});
        const MultiPatchBasis& fine = *levels_.back();

        // Per-face tensor prolongation scattered to global DOFs. Shared-edge
        // entries computed from adjacent faces coincide (open uniform knot
        // vectors are symmetric), so duplicates are assigned, not summed.
        Eigen::MatrixXd T1 = Eigen::MatrixXd(rb.prolongation);
        std::map<std::pair<int, int>, double> entries;
        const int nc = coarse.n();
        for (int f = 0; f < kNumFaces; ++f) {
            for (int jc = 0; jc < nc; ++jc) {
                for (int ic = 0; ic < nc; ++ic) {
                    const int gc = coarse.dofs().global_of(f, ic, jc);
                    for (int jf = 0; jf < nf; ++jf) {
                        if (T1(jf, jc) == 0.0) continue;
                        for (int i_f = 0; i_f < nf; ++i_f) {
                            double w = T1(i_f, ic) * T1(jf, jc);
                            if (w == 0.0) continue;
                            const int gf = fine.dofs().global_of(f, i_f, jf);
                            entries.insert({{gf, gc}, w});
                        }
                    }
                }
            }
        }
        Eigen::SparseMatrix<double> P(fine.num_global(), coarse.num_global());
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(entries.size());
        for (const auto& [key, w] : entries) trips.emplace_back(key.first, key.second, w);
        P.setFromTriplets(trips.begin(), trips.end());
        prolong_.push_back(std::move(P));
    }
    return prolong_[l];
}

void HierarchicalBasis::evaluate(int face, double xi, double eta, int nders,
                                 ActiveEval& out) const {
    if (xi < 0.0 || xi > 1.0 || eta < 0.0 || eta > 1.0)
        throw std::domain_error("HierarchicalBasis::evaluate: point outside [0,1]^2");
    out.clear();
    double nx[24], ny[24]; // rows of p+1 values, derivative order k at k*(p+1)
    const int st = p_ + 1;
    for (int l = 0; l < num_levels(); ++l) {
        if (active_[l].empty()) continue;
        const MultiPatchBasis& mp = *levels_[l];
        const int first_i = mp.uni().evaluate(xi, nders, nx);
        const int first_j = mp.uni().evaluate(eta, nders, ny);
        for (int b = 0; b <= p_; ++b) {
            for (int a = 0; a <= p_; ++a) {
                const int g = mp.dofs().global_of(face, first_i + a, first_j + b);
                const int flat = flat_of_[l][g];
                if (flat < 0) continue;
                out.dofs.push_back(flat);
                out.val.push_back(nx[a] * ny[b]);
                if (nders >= 1) {
                    out.dxi.push_back(nx[st + a] * ny[b]);
                    out.deta.push_back(nx[a] * ny[st + b]);
                }
                if (nders >= 2) {
                    out.dxx.push_back(nx[2 * st + a] * ny[b]);
                    out.dxy.push_back(nx[st + a] * ny[st + b]);
                    out.dyy.push_back(nx[a] * ny[2 * st + b]);
                }
            }
        }
    }
}

Eigen::SparseMatrix<double> HierarchicalBasis::refine(const std::vector<int>& marked) {
    const std::vector<FlatDof> old_flat = flat_dofs_;
    const int old_n = num_dofs();

    // Per level: level-global -> accumulated transfer column entries
    // (old flat DOF, weight). Seeded with the identity on the current basis.
    std::vector<std::map<int, std::vector<std::pair<int, double>>>> contrib(num_levels());
    for (int m = 0; m < old_n; ++m)
        contrib[old_flat[m].level][old_flat[m].global].push_back({m, 1.0});

    std::vector<std::set<int>> marked_lg(num_levels());
    for (int m : marked) {
        if (m < 0 || m >= old_n)
            throw std::invalid_argument("HierarchicalBasis::refine: bad DOF index");
        marked_lg[old_flat[m].level].insert(old_flat[m].global);
    }

    // Coarse-to-fine forwarding: a marked function hands its accumulated
    // contributions to its children. A child that is itself marked forwards
    // them again when its level is processed, so one call handles marked sets
    // spanning several levels.
    for (size_t l = 0; l < marked_lg.size(); ++l) {
        if (marked_lg[l].empty()) continue;
        const Eigen::SparseMatrix<double>& P = prolongation(static_cast<int>(l));
        if (contrib.size() < l + 2) contrib.resize(l + 2);
        if (marked_lg.size() < l + 2) marked_lg.resize(l + 2);
        for (int g : marked_lg[l]) {
            auto it = contrib[l].find(g);
            if (it == contrib[l].end())
                throw std::invalid_argument("HierarchicalBasis::refine: DOF not active");
            for (Eigen::SparseMatrix<double>::InnerIterator pit(P, g); pit; ++pit) {
                auto& target = contrib[l + 1][static_cast<int>(pit.row())];
                for (const auto& [src, w] : it->second)
                    target.push_back({src, w * pit.value()});
            }
            contrib[l].erase(it);
        }
    }

    active_.assign(levels_.size(), {});
    for (size_t l = 0; l < contrib.size(); ++l)
        for (const auto& [g, entries] : contrib[l]) active_[l].push_back(g);
    rebuild_flat();

    std::vector<Eigen::Triplet<double>> trips;
    for (size_t l = 0; l < contrib.size(); ++l)
        for (const auto& [g, entries] : contrib[l])
            for (const auto& [src, w] : entries)
                trips.emplace_back(flat_of_[l][g], src, w);

    Eigen::SparseMatrix<double> R(num_dofs(), old_n);
    R.setFromTriplets(trips.begin(), trips.end());
    return R;
}

void HierarchicalBasis::set_active(const std::vector<std::vector<int>>& active) {
    for (size_t l = 1; l < active.size(); ++l)
        prolongation(static_cast<int>(l) - 1); // materialize levels
    active_ = active;
    active_.resize(levels_.size());
    rebuild_flat();
}

void HierarchicalBasis::rebuild_flat() {
    flat_dofs_.clear();
    flat_of_.assign(levels_.size(), {});
    for (int l = 0; l < num_levels(); ++l) {
        flat_of_[l].assign(levels_[l]->num_global(), -1);
        for (int g : active_[l]) {
            flat_of_[l][g] = static_cast<int>(flat_dofs_.size());
            flat_dofs_.push_back({l, g});
        }
    }
}

} // namespace igs
