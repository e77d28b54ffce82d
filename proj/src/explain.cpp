#include "polyclust/explain.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace polyclust {

const char* style_name(ExplanationStyle s) {
    switch (s) {
        case ExplanationStyle::rule: return "rule";
        case ExplanationStyle::scorecard: return "scorecard";
        case ExplanationStyle::linear_rule_set: return "linear_rule_set";
    }
    return "?";
}

namespace {

std::vector<int> support_of(const std::vector<int>& w) {
    std::vector<int> s;
    for (size_t c = 0; c < w.size(); ++c)
        if (w[c] != 0) s.push_back(static_cast<int>(c));
    return s;
}

std::string term(int coef, const std::string& name, bool first, bool always_scaled) {
    std::string sign = coef < 0 ? "- " : (first ? "" : "+ ");
    int mag = std::abs(coef);
    std::string body = (mag == 1 && !always_scaled)
                           ? "(" + name + ")"
                           : std::to_string(mag) + "*(" + name + ")";
    return sign + body;
}

Clause render_clause(const Hyperplane& h, bool on_ge, int other,
                     const std::vector<ColumnInfo>& cols) {
    Clause cl;
    cl.w = h.w;
    cl.b = h.b;
    cl.epsilon = h.epsilon;
    cl.on_ge = on_ge;
    cl.other = other;
    cl.comparator = on_ge ? ">=" : "<=";
    cl.threshold = on_ge ? -h.b : -h.b - h.epsilon;

    std::vector<int> sup = support_of(h.w);
    if (sup.size() == 1) {
        int c = sup[0];
        int a = h.w[c];
        const ColumnInfo& col = cols[c];
        double tau = cl.threshold / a;
        bool ge = (a > 0) == on_ge;  // flipped by a negative coefficient
        if (col.kind == FeatureKind::binary && ge && tau > 0.0 && tau <= 1.0) {
            cl.text = "(" + col.name + ")";
            cl.units = "raw";
            return cl;
        }
        if (col.kind == FeatureKind::binary && !ge && tau >= 0.0 && tau < 1.0) {
            cl.text = "(NOT " + col.name + ")";
            cl.units = "raw";
            return cl;
        }
        double shown = tau;
        if (col.has_range) {
            shown = col.raw_min + tau * (col.raw_max - col.raw_min);
            cl.units = "raw";
        } else {
            cl.units = "normalized";
        }
        cl.text = "(" + col.name + (ge ? " >= " : " <= ") + format_fixed(shown, 2) + ")";
        return cl;
    }

    bool all_binary = std::all_of(sup.begin(), sup.end(), [&](int c) {
        return cols[c].kind == FeatureKind::binary;
    });
    std::string lhs;
    for (size_t p = 0; p < sup.size(); ++p) {
        if (p) lhs += " ";
        lhs += term(h.w[sup[p]], cols[sup[p]].name, p == 0, !all_binary);
    }
    if (all_binary) {
        // integer-valued left side: snap to the equivalent integer cut
        if (on_ge) {
            long long theta = static_cast<long long>(std::ceil(cl.threshold - 1e-9));
            cl.text = "[" + lhs + " > " + std::to_string(theta - 1) + "]";
        } else {
            long long theta = static_cast<long long>(std::floor(cl.threshold + 1e-9));
            cl.text = "[" + lhs + " < " + std::to_string(theta + 1) + "]";
        }
        cl.units = "raw";
    } else {
        cl.text = "[" + lhs + " " + cl.comparator + " " + format_fixed(cl.threshold, 2) + "]";
        cl.units = "normalized";
    }
    return cl;
}

}  // namespace

Explanation build_explanation(const Dataset& ds, const HyperplaneMap& hyperplanes, int k,
                              int cluster) {
    if (cluster < 0 || cluster >= k)
        throw std::invalid_argument("build_explanation: cluster out of range");
    Polytope p = build_polytope(cluster, hyperplanes, k);
    prune_facets(p, ds);

    Explanation ex;
    ex.cluster = cluster;
    const auto& cols = ds.explain_columns();
    bool all_single = true;
    bool all_binary = true;
    for (const Facet& f : p.facets) {
        Clause cl = render_clause(f.h, f.on_ge, f.other, cols);
        std::vector<int> sup = support_of(cl.w);
        if (sup.size() != 1) all_single = false;
        for (int c : sup)
            if (cols[c].kind != FeatureKind::binary) all_binary = false;
        if (!ex.text.empty()) ex.text += " AND ";
        ex.text += cl.text;
        ex.clauses.push_back(std::move(cl));
    }
    if (ex.clauses.empty()) ex.text = "TRUE";
    ex.style = all_single ? ExplanationStyle::rule
               : all_binary ? ExplanationStyle::scorecard
                            : ExplanationStyle::linear_rule_set;
    std::string units;
    for (const Clause& cl : ex.clauses) {
        if (units.empty()) units = cl.units;
        else if (units != cl.units) units = "mixed";
    }
    ex.units = units.empty() ? "raw" : units;
    return ex;
}

std::string pairwise_comparison(const Dataset& ds, const HyperplaneMap& hyperplanes,
                                PairKey pair) {
    auto it = hyperplanes.find(pair);
    if (it == hyperplanes.end())
        throw std::invalid_argument("pairwise_comparison: no hyperplane for pair (" +
                                    std::to_string(pair.first) + "," +
                                    std::to_string(pair.second) + ")");
    Clause cl = render_clause(it->second, true, pair.second, ds.explain_columns());
    return "IF " + cl.text + ": Cluster " + std::to_string(pair.first) + " ELSE Cluster " +
           std::to_string(pair.second);
}

}  // namespace polyclust
