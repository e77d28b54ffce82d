#pragma once

#include <string>
#include <vector>

#include "polyclust/dataset.hpp"
#include "polyclust/model.hpp"

namespace polyclust {

// One full optimization (alternating minimization, then coordinate descent)
// with a fixed seed. cfg must already be resolved against ds.
MpcModel run_single(const Dataset& ds, const MpcConfig& cfg, std::uint64_t seed);

// Best of cfg.restarts runs seeded cfg.seed, cfg.seed + 1, ...; best by
// silhouette, ties to the lowest seed. Resolves cfg. Restarts run on
// cfg.workers threads; the reduction is order-independent.
MpcModel run_mpc(const Dataset& ds, MpcConfig cfg);

struct SweepResult {
    std::vector<MpcModel> per_k;  // best run for each k in [lo, hi]
    int best_index = 0;           // max silhouette, ties to the lowest k
};

SweepResult sweep_mpc(const Dataset& ds, MpcConfig base, int k_lo, int k_hi);

// Recomputes metrics for a stored model against a dataset, rebuilding the
// rep tables from the stored hyperplanes.
Metrics evaluate_model(const MpcModel& model, const Dataset& ds);

// Deterministic JSON document; doubles print as shortest round-trippable
// decimals, so equal models serialize to identical bytes. Passing ds embeds
// per-cluster explanations.
std::string model_to_json(const MpcModel& model, const Dataset* ds);

// Writes model.json and assignments.csv (and moves.jsonl when asked) to dir.
void export_model(const MpcModel& model, const Dataset& ds, const std::string& dir,
                  bool write_moves = false);

MpcModel import_model(const std::string& model_json_path);

std::string sweep_to_csv(const SweepResult& sweep);

}  // namespace polyclust
