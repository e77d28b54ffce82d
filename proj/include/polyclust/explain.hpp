#pragma once

#include <string>
#include <vector>

#include "polyclust/dataset.hpp"
#include "polyclust/geometry.hpp"

namespace polyclust {

// One rendered facet condition. The machine fields (w, b, epsilon, on_ge)
// evaluate exactly like the source polytope facet; comparator/threshold are
// the same condition rewritten as  w.x >= -b  or  w.x <= -b-epsilon.
struct Clause {
    std::string text;
    std::vector<int> w;
    double b = 0.0;
    double epsilon = 0.0;
    bool on_ge = true;
    std::string comparator;  // ">=" or "<="
    double threshold = 0.0;
    int other = -1;        // far-side cluster
    std::string units;     // "raw" or "normalized" (text rendering only)

    bool holds(std::span<const double> x) const {
        double v = b;
        for (size_t c = 0; c < w.size(); ++c) v += w[c] * x[c];
        return on_ge ? v >= 0.0 : v + epsilon <= 0.0;
    }
};

enum class ExplanationStyle { rule, scorecard, linear_rule_set };

const char* style_name(ExplanationStyle s);

struct Explanation {
    int cluster = 0;
    ExplanationStyle style = ExplanationStyle::rule;
    std::vector<Clause> clauses;
    std::string text;   // clauses joined with " AND "
    std::string units;  // "raw", "normalized", or "mixed"
};

// Prunes the cluster's polytope against the data and renders the surviving
// facets. Style: every clause single-feature -> rule; otherwise all binary
// features -> scorecard; otherwise linear_rule_set.
Explanation build_explanation(const Dataset& ds, const HyperplaneMap& hyperplanes, int k,
                              int cluster);

// Two-cluster comparison: "IF <i-side condition>: Cluster i ELSE Cluster j".
std::string pairwise_comparison(const Dataset& ds, const HyperplaneMap& hyperplanes,
                                PairKey pair);

}  // namespace polyclust
