#include "polyclust/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "polyclust/hyperplane_solver.hpp"

namespace polyclust {

double signed_value(const Hyperplane& h, std::span<const double> x) {
    if (x.size() != h.w.size())
        throw std::invalid_argument("signed_value: point dimension " +
                                    std::to_string(x.size()) + " != slope dimension " +
                                    std::to_string(h.w.size()));
    return h.value(x);
}

RepErrors rep_errors(const Hyperplane& h, const Dataset& ds) {
    if (static_cast<int>(h.w.size()) != ds.explain_d())
        throw std::invalid_argument("rep_errors: slope dimension does not match the view");
    RepErrors out;
    out.xi_plus.resize(ds.n());
    out.xi_minus.resize(ds.n());
    for (int t = 0; t < ds.n(); ++t) {
        double v = h.value(ds.explain_row(t));
        out.xi_plus[t] = std::max(-v, 0.0);
        out.xi_minus[t] = std::max(v + h.epsilon, 0.0);
    }
    return out;
}

double representation_error(const RepTable& tables, std::span<const int> labels) {
    double total = 0.0;
    for (const auto& [key, errs] : tables) {
        for (size_t t = 0; t < labels.size(); ++t) {
            if (labels[t] == key.first) total += errs.xi_plus[t];
            else if (labels[t] == key.second) total += errs.xi_minus[t];
        }
    }
    return total;
}

Matrix build_rep_cost(const RepTable& tables, int n, int k) {
    Matrix cost(n, k, 0.0);
    for (const auto& [key, errs] : tables) {
        for (int t = 0; t < n; ++t) {
            cost(t, key.first) += errs.xi_plus[t];
            cost(t, key.second) += errs.xi_minus[t];
        }
    }
    return cost;
}

namespace {

double binomial(int n, int r) {
    if (r < 0 || r > n) return 0.0;
    double v = 1.0;
    for (int i = 0; i < r; ++i) v = v * (n - i) / (i + 1);
    return v;
}

}  // namespace

double default_epsilon(const Dataset& ds, int M, int beta) {
    if (M < 1 || beta < 1)
        throw std::invalid_argument("default_epsilon: M and beta must be >= 1");
    const int d = ds.explain_d();
    const int n = ds.n();
    const int beta_eff = std::min(beta, d);
    double family = binomial(d, beta_eff) * std::pow(2.0 * M, beta_eff);
    if (family > 1e6 || n > 2000) return kEpsilonFallback;

    double best = std::numeric_limits<double>::infinity();
    std::vector<double> proj(n);
    for_each_slope(d, M, beta_eff, [&](const std::vector<int>& w) {
        for (int t = 0; t < n; ++t) {
            auto x = ds.explain_row(t);
            double p = 0.0;
            for (int c = 0; c < d; ++c)
                if (w[c] != 0) p += w[c] * x[c];
            proj[t] = p;
        }
        std::sort(proj.begin(), proj.end());
        for (int t = 1; t < n; ++t) {
            double gap = proj[t] - proj[t - 1];
            if (gap > 0.0 && gap < best) best = gap;
        }
        return true;
    });
    if (!std::isfinite(best)) return kEpsilonFallback;
    return best;
}

Polytope build_polytope(int cluster, const HyperplaneMap& hyperplanes, int k) {
    Polytope p;
    p.cluster = cluster;
    for (int other = 0; other < k; ++other) {
        if (other == cluster) continue;
        PairKey key = make_pair_key(cluster, other);
        auto it = hyperplanes.find(key);
        if (it == hyperplanes.end())
            throw std::invalid_argument("build_polytope: missing hyperplane for pair (" +
                                        std::to_string(key.first) + "," +
                                        std::to_string(key.second) + ")");
        p.facets.push_back({other, it->second, cluster < other});
    }
    return p;
}

namespace {

bool redundant_given(const Polytope& p, size_t f, const std::vector<bool>& kept,
                     const Dataset& ds) {
    for (int t = 0; t < ds.n(); ++t) {
        auto x = ds.explain_row(t);
        bool others_hold = true;
        for (size_t g = 0; g < p.facets.size() && others_hold; ++g) {
            if (g == f || !kept[g]) continue;
            others_hold = p.facet_holds(g, x);
        }
        if (others_hold && !p.facet_holds(f, x)) return false;
    }
    return true;
}

}  // namespace

bool facet_redundant(const Polytope& p, size_t f, const Dataset& ds) {
    std::vector<bool> kept(p.facets.size(), true);
    return redundant_given(p, f, kept, ds);
}

void prune_facets(Polytope& p, const Dataset& ds) {
    std::vector<bool> kept(p.facets.size(), true);
    for (size_t f = 0; f < p.facets.size(); ++f)
        if (redundant_given(p, f, kept, ds)) kept[f] = false;
    std::vector<Facet> remaining;
    for (size_t f = 0; f < p.facets.size(); ++f)
        if (kept[f]) remaining.push_back(std::move(p.facets[f]));
    p.facets = std::move(remaining);
}

}  // namespace polyclust
