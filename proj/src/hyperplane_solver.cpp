#include "polyclust/hyperplane_solver.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace polyclust {

long long slope_count(int d, int M, int beta) {
    if (d < 1 || M < 1 || beta < 1) return 0;
    beta = std::min(beta, d);
    long long total = 0;
    for (int s = 1; s <= beta; ++s) {
        // C(d, s), saturating
        long long comb = 1;
        for (int i = 0; i < s; ++i) {
            if (comb > LLONG_MAX / (d - i)) return LLONG_MAX;
            comb = comb * (d - i) / (i + 1);
        }
        long long term = comb;
        for (int i = 0; i < s; ++i) {
            if (term > LLONG_MAX / (2LL * M)) return LLONG_MAX;
            term *= 2LL * M;
        }
        if (total > LLONG_MAX - term) return LLONG_MAX;
        total += term;
    }
    return total;
}

void for_each_slope(int d, int M, int beta,
                    const std::function<bool(const std::vector<int>&)>& fn) {
    if (d < 1 || M < 1 || beta < 1)
        throw std::invalid_argument("for_each_slope: d, M, beta must be >= 1");
    beta = std::min(beta, d);
    // value order per support position: 1, 2, ..., M, -1, -2, ..., -M
    auto value_at = [M](int q) { return q < M ? q + 1 : -(q - M + 1); };
    std::vector<int> w(d, 0);
    for (int s = 1; s <= beta; ++s) {
        std::vector<int> comb(s);
        std::iota(comb.begin(), comb.end(), 0);
        while (true) {
            std::vector<int> odo(s, 0);
            while (true) {
                for (int p = 0; p < s; ++p) w[comb[p]] = value_at(odo[p]);
                if (!fn(w)) return;
                for (int p = 0; p < s; ++p) w[comb[p]] = 0;
                // advance odometer, last position fastest
                int p = s - 1;
                while (p >= 0 && odo[p] == 2 * M - 1) odo[p--] = 0;
                if (p < 0) break;
                ++odo[p];
            }
            // next support set in lexicographic order
            int i = s - 1;
            while (i >= 0 && comb[i] == d - s + i) --i;
            if (i < 0) break;
            ++comb[i];
            for (int j = i + 1; j < s; ++j) comb[j] = comb[j - 1] + 1;
        }
    }
}

InterceptResult best_intercept(std::vector<double> left_proj,
                               std::vector<double> right_proj, double epsilon) {
    if (left_proj.empty() || right_proj.empty())
        throw std::invalid_argument("best_intercept: both sides must be nonempty");
    std::sort(left_proj.begin(), left_proj.end());
    std::sort(right_proj.begin(), right_proj.end());
    const size_t nl = left_proj.size(), nr = right_proj.size();
    std::vector<double> pl(nl + 1, 0.0), pr(nr + 1, 0.0);
    for (size_t i = 0; i < nl; ++i) pl[i + 1] = pl[i] + left_proj[i];
    for (size_t i = 0; i < nr; ++i) pr[i + 1] = pr[i] + right_proj[i];

    // The objective is convex piecewise-linear in b; an optimum sits on a
    // breakpoint: -p for a left projection or -q-eps for a right one.
    std::vector<double> candidates;
    candidates.reserve(nl + nr);
    for (double p : left_proj) candidates.push_back(-p);
    for (double q : right_proj) candidates.push_back(-q - epsilon);
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    auto eval = [&](double b) {
        // left pays for p < -b, right pays for q > -b-eps
        size_t cl = std::lower_bound(left_proj.begin(), left_proj.end(), -b) -
                    left_proj.begin();
        double left = static_cast<double>(cl) * (-b) - pl[cl];
        size_t ir = std::upper_bound(right_proj.begin(), right_proj.end(), -b - epsilon) -
                    right_proj.begin();
        double right = (pr[nr] - pr[ir]) +
                       static_cast<double>(nr - ir) * (b + epsilon);
        return left + right;
    };

    InterceptResult best{candidates.front(), eval(candidates.front())};
    for (size_t i = 1; i < candidates.size(); ++i) {
        double f = eval(candidates[i]);
        if (f < best.objective) best = {candidates[i], f};
    }
    best.objective = std::max(best.objective, 0.0);
    return best;
}

SeparationResult solve_separation(const SeparationProblem& prob, long long slope_budget) {
    const int d = prob.left.cols();
    if (prob.left.rows() < 1 || prob.right.rows() < 1)
        throw std::invalid_argument("solve_separation: both sides must be nonempty");
    if (prob.right.cols() != d)
        throw std::invalid_argument("solve_separation: dimension mismatch between sides");
    if (prob.M < 1 || prob.beta < 1)
        throw std::invalid_argument("solve_separation: M and beta must be >= 1");
    if (prob.beta > d)
        throw std::invalid_argument("solve_separation: beta exceeds the view dimension");
    if (!(prob.epsilon > 0.0))
        throw std::invalid_argument("solve_separation: epsilon must be positive");
    long long family = slope_count(d, prob.M, prob.beta);
    if (family > slope_budget)
        throw InfeasibleError("slope family size " + std::to_string(family) +
                              " exceeds budget " + std::to_string(slope_budget));

    SeparationResult best;
    best.objective = std::numeric_limits<double>::infinity();
    std::vector<double> lp(prob.left.rows()), rp(prob.right.rows());
    long long tried = 0;
    for_each_slope(d, prob.M, prob.beta, [&](const std::vector<int>& w) {
        ++tried;
        for (int t = 0; t < prob.left.rows(); ++t) {
            auto x = prob.left.row(t);
            double p = 0.0;
            for (int c = 0; c < d; ++c)
                if (w[c] != 0) p += w[c] * x[c];
            lp[t] = p;
        }
        for (int t = 0; t < prob.right.rows(); ++t) {
            auto x = prob.right.row(t);
            double p = 0.0;
            for (int c = 0; c < d; ++c)
                if (w[c] != 0) p += w[c] * x[c];
            rp[t] = p;
        }
        InterceptResult ir = best_intercept(lp, rp, prob.epsilon);
        if (ir.objective < best.objective) {
            best.objective = ir.objective;
            best.hyperplane.w = w;
            best.hyperplane.b = ir.b;
        }
        return best.objective > 0.0;  // a perfect separator cannot be beaten
    });
    best.slopes_tried = tried;
    best.hyperplane.i = 0;
    best.hyperplane.j = 1;
    best.hyperplane.epsilon = prob.epsilon;
    best.perfect = best.objective == 0.0;
    return best;
}

}  // namespace polyclust
