#pragma once

#include <cstdint>
#include <vector>

#include "polyclust/clustering.hpp"
#include "polyclust/config.hpp"
#include "polyclust/descent.hpp"
#include "polyclust/geometry.hpp"

namespace polyclust {

struct Metrics {
    double silhouette = 0.0;
    double loss = 0.0;
    double kmeans = 0.0;
    double rep_weighted = 0.0;  // lambda * rep_raw
    double rep_raw = 0.0;
    int k_final = 0;
    int altmin_iters = 0;
    int moves_applied = 0;
    double wall_seconds = 0.0;
    std::uint64_t seed_used = 0;
};

// A finished clustering: resolved configuration, labels, the pairwise
// hyperplanes, metrics, and the optimization history.
struct MpcModel {
    MpcConfig config;  // resolved against the training data
    int n = 0;
    int d = 0;
    int d_explain = 0;
    std::vector<int> labels;
    int k = 0;
    HyperplaneMap hyperplanes;
    Metrics metrics;
    std::vector<MoveRecord> moves;
    std::vector<double> loss_trace;
    std::vector<KmRepObjective> altmin_trace;
};

}  // namespace polyclust
