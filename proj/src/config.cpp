#include "polyclust/config.hpp"

#include <algorithm>

#include "polyclust/dataset.hpp"
#include "polyclust/geometry.hpp"

namespace polyclust {

void apply_preset(MpcConfig& cfg) {
    if (cfg.preset.empty()) return;
    if (cfg.preset == "mpc1") {
        cfg.m = 1;
        cfg.beta = 1;
    } else if (cfg.preset == "mpc2") {
        cfg.m = 3;
        cfg.beta = 2;
    } else {
        throw ConfigError("unknown preset '" + cfg.preset + "' (expected mpc1|mpc2)");
    }
}

MpcConfig resolve(MpcConfig cfg, const Dataset& ds) {
    apply_preset(cfg);
    const int n = ds.n();
    if (cfg.k < 2) throw ConfigError("k must be >= 2");
    if (cfg.k > n) throw ConfigError("k exceeds the number of points");
    cfg.k_max = std::max(cfg.k_max, cfg.k);
    cfg.k_max = std::min(cfg.k_max, n);
    if (cfg.lambda < 0.0) throw ConfigError("lambda must be >= 0");
    if (cfg.m < 1) throw ConfigError("m must be >= 1");
    if (cfg.beta < 1) throw ConfigError("beta must be >= 1");
    cfg.beta = std::min(cfg.beta, ds.explain_d());
    if (cfg.n_min < 0) throw ConfigError("n-min must be >= 0");
    if (cfg.n_max != 0 && cfg.n_max < cfg.n_min)
        throw ConfigError("n-max must be >= n-min");
    if (cfg.n_max == 0) cfg.n_max = n;
    if (cfg.restarts < 1) throw ConfigError("restarts must be >= 1");
    if (cfg.workers < 1) cfg.workers = 1;
    if (!cfg.epsilon_auto && !(cfg.epsilon > 0.0))
        throw ConfigError("epsilon must be positive");
    if (cfg.epsilon_auto) {
        cfg.epsilon = default_epsilon(ds, cfg.m, cfg.beta);
        cfg.epsilon_auto = false;
    }
    // every k in [k, k_max] must admit an assignment within the size bounds
    if (static_cast<long long>(cfg.k) * cfg.n_min > n)
        throw InfeasibleError("n-min too large: " + std::to_string(cfg.k) +
                              " clusters of >= " + std::to_string(cfg.n_min) +
                              " points exceed n = " + std::to_string(n));
    if (static_cast<long long>(cfg.k) * cfg.n_max < n)
        throw InfeasibleError("n-max too small: " + std::to_string(cfg.k) +
                              " clusters of <= " + std::to_string(cfg.n_max) +
                              " points cannot cover n = " + std::to_string(n));
    return cfg;
}

const char* to_string(CdObjective o) {
    return o == CdObjective::silhouette ? "silhouette" : "kmeans";
}

CdObjective cd_objective_from_string(const std::string& s) {
    if (s == "silhouette") return CdObjective::silhouette;
    if (s == "kmeans") return CdObjective::kmeans;
    throw ConfigError("unknown cd-objective '" + s + "' (expected silhouette|kmeans)");
}

}  // namespace polyclust
