#pragma once

#include <cstdint>
#include <string>

namespace polyclust {

class Dataset;

enum class CdObjective { silhouette, kmeans };

// Full run configuration. Fields with sentinel defaults (epsilon_auto,
// n_max = 0) are pinned against a concrete dataset by resolve().
struct MpcConfig {
    int k = 2;
    int k_max = 10;
    double lambda = 1.0;
    int m = 1;     // max |coefficient|
    int beta = 1;  // max nonzero coefficients
    double epsilon = 1e-4;
    bool epsilon_auto = true;
    int n_min = 1;
    int n_max = 0;  // 0 = unbounded (resolved to N)
    int restarts = 1;
    std::uint64_t seed = 42;
    CdObjective cd_objective = CdObjective::silhouette;
    std::string preset;  // "", "mpc1", "mpc2"

    int max_lloyd_iters = 100;
    int max_outer_iters = 50;
    double outer_tol = 1e-10;
    long long slope_budget = 5'000'000;
    double assign_resolution = 1e-9;
    bool exhaustive_split = false;
    int workers = 1;
};

// Applies preset overrides: mpc1 -> M=1, beta=1; mpc2 -> M=3, beta=2.
void apply_preset(MpcConfig& cfg);

// Validates cfg against a dataset and pins derived values: clamps k_max and
// beta, resolves n_max = 0 to N and "auto" epsilon to the measured minimum
// gap. Throws ConfigError on invalid fields and InfeasibleError when the
// size bounds admit no K-way assignment.
MpcConfig resolve(MpcConfig cfg, const Dataset& ds);

const char* to_string(CdObjective o);
CdObjective cd_objective_from_string(const std::string& s);

}  // namespace polyclust
