#pragma once

#include <functional>
#include <vector>

#include "polyclust/common.hpp"
#include "polyclust/geometry.hpp"

namespace polyclust {

constexpr long long kDefaultSlopeBudget = 5'000'000;

// Number of integer slopes with 1..beta nonzero entries, each entry in
// {-M,...,-1, 1,...,M}, over d coordinates: sum_s C(d,s)·(2M)^s.
// Saturates at LLONG_MAX on overflow.
long long slope_count(int d, int M, int beta);

// Enumerates slopes in a fixed deterministic order: support size ascending,
// support sets lexicographic, coefficient tuples by odometer (last support
// position fastest) over the per-entry value order 1, 2, ..., M, -1, ..., -M.
// fn receives the full d-length coefficient vector; return false to stop.
void for_each_slope(int d, int M, int beta,
                    const std::function<bool(const std::vector<int>&)>& fn);

struct SeparationProblem {
    Matrix left;   // rows that should satisfy w·x + b >= 0
    Matrix right;  // rows that should satisfy w·x + b + epsilon <= 0
    int M = 1;
    int beta = 1;
    double epsilon = 1e-4;
};

struct SeparationResult {
    Hyperplane hyperplane;   // pair indices left at (0,1); callers rebind
    double objective = 0.0;  // total violation at the optimum
    bool perfect = false;
    long long slopes_tried = 0;
};

struct InterceptResult {
    double b = 0.0;
    double objective = 0.0;
};

// Minimizes sum_left max(-(p+b),0) + sum_right max(q+b+eps,0) over b for a
// fixed slope, where p/q are the left/right projections. The optimum is
// attained at a breakpoint (some -p_t or -q_t-eps); ties return the smallest b.
InterceptResult best_intercept(std::vector<double> left_proj,
                               std::vector<double> right_proj, double epsilon);

// Exact minimizer over the full slope family x intercepts. Throws
// InfeasibleError when the slope family exceeds slope_budget, and
// std::invalid_argument on empty sides or dimension mismatches.
SeparationResult solve_separation(const SeparationProblem& prob,
                                  long long slope_budget = kDefaultSlopeBudget);

}  // namespace polyclust
