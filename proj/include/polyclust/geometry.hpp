#pragma once

#include <map>
#include <span>
#include <utility>
#include <vector>

#include "polyclust/common.hpp"
#include "polyclust/dataset.hpp"

namespace polyclust {

// Cluster pair, always ordered i < j.
using PairKey = std::pair<int, int>;

inline PairKey make_pair_key(int a, int b) {
    return a < b ? PairKey{a, b} : PairKey{b, a};
}

// Separating hyperplane for the cluster pair (i, j), i < j, acting on the
// explanation view. Cluster i lives on the w·x + b >= 0 side, cluster j on
// the w·x + b <= -epsilon side.
struct Hyperplane {
    int i = 0;
    int j = 1;
    std::vector<int> w;  // integer coefficients
    double b = 0.0;
    double epsilon = 1e-4;

    double value(std::span<const double> x) const {
        double s = b;
        for (size_t c = 0; c < w.size(); ++c) s += w[c] * x[c];
        return s;
    }
};

double signed_value(const Hyperplane& h, std::span<const double> x);

// Per-point slack against a hyperplane:
//   xi_plus[t]  = max(-(w·x_t + b), 0)      cost of placing t on the i side
//   xi_minus[t] = max(w·x_t + b + eps, 0)   cost of placing t on the j side
struct RepErrors {
    std::vector<double> xi_plus;
    std::vector<double> xi_minus;
};

RepErrors rep_errors(const Hyperplane& h, const Dataset& ds);

using HyperplaneMap = std::map<PairKey, Hyperplane>;
using RepTable = std::map<PairKey, RepErrors>;

// Total assigned-side slack: for each pair (i,j), points labeled i pay
// xi_plus and points labeled j pay xi_minus. Unweighted (no lambda).
double representation_error(const RepTable& tables, std::span<const int> labels);

// R(t,k) = slack point t would pay if assigned to cluster k, summed over all
// pairs involving k. representation_error == sum_t R(t, label_t).
Matrix build_rep_cost(const RepTable& tables, int n, int k);

// Smallest nonzero |w·(x - x')| over feasible integer slopes and point pairs
// of the explanation view, computed exhaustively when the instance is small
// enough; otherwise a fixed fallback suited to [0,1]-scaled data.
double default_epsilon(const Dataset& ds, int M, int beta);

constexpr double kEpsilonFallback = 1e-4;

// One face of a cluster's polytope: the side condition of the hyperplane
// shared with another cluster.
struct Facet {
    int other;     // the cluster on the far side
    Hyperplane h;
    bool on_ge;    // true: membership requires w·x + b >= 0, else <= -eps
};

struct Polytope {
    int cluster = 0;
    std::vector<Facet> facets;

    bool facet_holds(size_t f, std::span<const double> x) const {
        double v = facets[f].h.value(x);
        return facets[f].on_ge ? v >= 0.0 : v + facets[f].h.epsilon <= 0.0;
    }
    bool contains(std::span<const double> x) const {
        for (size_t f = 0; f < facets.size(); ++f)
            if (!facet_holds(f, x)) return false;
        return true;
    }
};

// Conjunction of all pairwise side conditions for `cluster`, one facet per
// other active cluster, ordered by the other cluster's index.
Polytope build_polytope(int cluster, const HyperplaneMap& hyperplanes, int k);

// True if dropping facet f leaves every dataset point's membership unchanged.
bool facet_redundant(const Polytope& p, size_t f, const Dataset& ds);

// Greedy empirical pruning in facet order; membership on dataset points is
// preserved exactly.
void prune_facets(Polytope& p, const Dataset& ds);

}  // namespace polyclust
