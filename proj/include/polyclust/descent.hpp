#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polyclust/clustering.hpp"
#include "polyclust/config.hpp"
#include "polyclust/dataset.hpp"
#include "polyclust/geometry.hpp"

namespace polyclust {

// Loss driving the descent. silhouette mode: -mean_silhouette + lambda*rep;
// kmeans mode: sum ||x - c||^2 (means of the labels) + lambda*rep.
double loss_fn(const Dataset& ds, std::span<const int> labels, int k,
               const RepTable& tables, const MpcConfig& cfg);

enum class MoveKind { boundary_shift, split, merge };

const char* to_string(MoveKind k);

// A fully materialized improving step: the complete next state plus its
// provenance. Applying a move swaps the state in and rebuilds caches.
struct Move {
    MoveKind kind = MoveKind::boundary_shift;
    int a = -1;  // pair (a,b) for shift/merge; source cluster for split
    int b = -1;
    double delta = 0.0;       // loss_after - loss_before, always < 0
    double loss_after = 0.0;  // recomputed from scratch
    std::vector<int> labels;
    int k = 0;
    HyperplaneMap hyperplanes;
    RepTable tables;
};

struct MoveRecord {
    MoveKind kind;
    int a = -1;
    int b = -1;
    double delta = 0.0;
    double loss_after = 0.0;
    int k_after = 0;
};

struct DescentState {
    Assignment assignment;
    HyperplaneMap hyperplanes;
    RepTable tables;
    double loss = 0.0;
    Matrix rep_cost;              // n x k, unweighted
    mutable SilhouetteCache sil;  // built only in silhouette mode; speculative
                                  // sweeps mutate and exactly restore it
};

// Builds a consistent state (caches + from-scratch loss) from parts.
// Every pair of the k clusters must have a hyperplane and table entry.
DescentState make_state(const Dataset& ds, std::vector<int> labels, int k,
                        HyperplaneMap hyperplanes, RepTable tables, const MpcConfig& cfg);

// Best strictly improving re-fit of one pair's hyperplane with side-test
// reassignment of the pair's points, over all slopes and per-slope
// thresholds. Candidates that empty a side or break the size bounds are
// skipped. Returns nothing when no candidate beats the current loss.
std::optional<Move> boundary_shift(const DescentState& st, PairKey pair, const Dataset& ds,
                                   const MpcConfig& cfg);

// Proposes splitting one cluster: a local 2-means suggests the halves, the
// separation solver turns them into a splitting hyperplane, the side test
// defines the new memberships, and hyperplanes to all other clusters are
// solved fresh. `salt` keeps repeated proposals deterministic but distinct.
std::optional<Move> split_cluster(const DescentState& st, int cluster, const Dataset& ds,
                                  const MpcConfig& cfg, std::uint64_t salt);

// Proposes merging a pair. Only pairs whose shared facet is empirically
// non-redundant in at least one of the two polytopes (i.e. adjacent pairs)
// are considered.
std::optional<Move> merge_clusters(const DescentState& st, PairKey pair, const Dataset& ds,
                                   const MpcConfig& cfg);

void apply_move(DescentState& st, const Move& mv, const Dataset& ds, const MpcConfig& cfg);

struct DescentResult {
    Assignment assignment;
    HyperplaneMap hyperplanes;
    RepTable tables;
    double loss = 0.0;
    std::vector<MoveRecord> moves;
    std::vector<double> trace;  // initial loss, then loss after each move
};

// Queue order: all pairs (i<j) lexicographically, each trying boundary_shift
// then merge, followed by all clusters in index order trying split. Any
// accepted move resets the queue; terminates when a full pass accepts
// nothing.
DescentResult coordinate_descent(const Dataset& ds, const AltMinResult& init,
                                 const MpcConfig& cfg);

constexpr double kMoveAcceptTol = 1e-10;

}  // namespace polyclust
