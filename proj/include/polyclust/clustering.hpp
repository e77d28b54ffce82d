#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "polyclust/common.hpp"
#include "polyclust/config.hpp"
#include "polyclust/dataset.hpp"
#include "polyclust/geometry.hpp"

namespace polyclust {

struct Assignment {
    std::vector<int> labels;
    int k = 0;
    std::vector<int> sizes;
    Matrix centers;  // k x d, cluster means unless a step fixes them
};

// Builds sizes and mean centers from labels. Labels must lie in [0, k);
// empty clusters get a zero center.
Assignment make_assignment(const Dataset& ds, std::vector<int> labels, int k);

struct SilhouetteReport {
    std::vector<double> r;  // mean intra-cluster distance, |C|-1 divisor
    std::vector<double> q;  // nearest other-cluster mean distance
    std::vector<double> s;  // (q-r)/max(q,r); 0 for singletons
    double mean = 0.0;
};

// Silhouette per Definition: r uses the |C|-1 divisor (self excluded),
// singletons score 0. Requires k >= 2 and every cluster nonempty.
SilhouetteReport silhouette(const Dataset& ds, std::span<const int> labels, int k);

// Maintains sums(t, c) = total distance from point t to the members of
// cluster c, which turns mean-silhouette evaluation into an O(n*k) scan.
class SilhouetteCache {
public:
    void build(const Dataset& ds, std::span<const int> labels, int k);
    bool built() const { return ds_ != nullptr; }
    int k() const { return k_; }

    // Moves point t between clusters; O(n).
    void relabel(int t, int from, int to);

    double sum(int t, int c) const { return sums_[static_cast<size_t>(t) * k_ + c]; }

    // Mean silhouette for hypothetical labels/sizes consistent with the
    // current sums. Empty clusters are skipped in the q minimum.
    double mean(std::span<const int> labels, std::span<const int> sizes) const;

    // Exact save/restore of one cluster column, for speculative sweeps.
    void copy_column(int c, std::vector<double>& out) const;
    void restore_column(int c, const std::vector<double>& in);

private:
    const Dataset* ds_ = nullptr;
    int n_ = 0;
    int k_ = 0;
    std::vector<double> sums_;
    mutable std::vector<double> row_scratch_;
};

// Lloyd's algorithm with k-means++ seeding over a subset of rows (labels are
// positions into `subset`). Ties in seeding and assignment break to the
// lowest index; empty clusters are repaired by moving the farthest point of
// a donor cluster with >= 2 members.
struct KmeansResult {
    std::vector<int> labels;
    Matrix centers;
    int iters = 0;
    bool converged = false;
};
KmeansResult lloyd_kmeans(const Dataset& ds, std::span<const int> subset, int k, Rng& rng,
                          int max_iters);

// k-means++ + Lloyd over the full dataset.
Assignment kmeans_pp_init(const Dataset& ds, int k, std::uint64_t seed, int max_iters = 100);

// Exact minimizer of sum_t [ ||x_t - c_{z_t}||^2 + lambda * R(t, z_t) ]
// subject to n_min <= |C_k| <= n_max. Uses the unconstrained greedy argmin
// when it already satisfies the bounds, otherwise a min-cost flow with costs
// scaled to integers at `resolution`. Centers are carried over unchanged.
Assignment assign_with_rep(const Dataset& ds, const Matrix& centers, const RepTable& tables,
                           double lambda, int n_min, int n_max, double resolution = 1e-9);

// Sets each center to its cluster mean. Throws if any cluster is empty.
void update_centers(const Dataset& ds, Assignment& z);

// sum_t ||x_t - c_{z_t}||^2
double kmeans_term(const Dataset& ds, const Assignment& z);

struct KmRepObjective {
    double kmeans = 0.0;
    double rep = 0.0;  // lambda-weighted
    double total() const { return kmeans + rep; }
};

struct AltMinResult {
    Assignment assignment;
    HyperplaneMap hyperplanes;
    RepTable tables;
    std::vector<KmRepObjective> trace;  // one entry per outer iteration
    int outer_iters = 0;
    bool converged = false;
};

// Alternating minimization: constrained assignment and center updates to a
// fixed point, then hyperplane refits for every nonempty cluster pair,
// until the objective stops improving by more than cfg.outer_tol.
// cfg must already be resolved against ds.
AltMinResult alternating_minimization(const Dataset& ds, const MpcConfig& cfg,
                                      std::uint64_t seed);

}  // namespace polyclust
