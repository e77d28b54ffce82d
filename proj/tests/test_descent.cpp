#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "polyclust/descent.hpp"
#include "polyclust/hyperplane_solver.hpp"
#include "polyclust/synth.hpp"
#include "support/oracles.hpp"

using namespace polyclust;

namespace {

MpcConfig resolved_config(const Dataset& ds, int k, double lambda = 1.0,
                          int k_max = 10) {
    MpcConfig cfg;
    cfg.k = k;
    cfg.k_max = k_max;
    cfg.lambda = lambda;
    return resolve(cfg, ds);
}

// state with hyperplanes fit fresh for every pair of the given labeling
DescentState state_for(const Dataset& ds, const std::vector<int>& labels, int k,
                       const MpcConfig& cfg) {
    HyperplaneMap planes;
    RepTable tables;
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) {
            std::vector<int> li, lj;
            for (int t = 0; t < ds.n(); ++t) {
                if (labels[t] == i) li.push_back(t);
                if (labels[t] == j) lj.push_back(t);
            }
            Matrix left(int(li.size()), ds.explain_d());
            Matrix right(int(lj.size()), ds.explain_d());
            for (size_t r = 0; r < li.size(); ++r)
                for (int c = 0; c < ds.explain_d(); ++c)
                    left(int(r), c) = ds.explain_points()(li[r], c);
            for (size_t r = 0; r < lj.size(); ++r)
                for (int c = 0; c < ds.explain_d(); ++c)
                    right(int(r), c) = ds.explain_points()(lj[r], c);
            SeparationProblem prob{left, right, cfg.m, cfg.beta, cfg.epsilon};
            SeparationResult res = solve_separation(prob, cfg.slope_budget);
            res.hyperplane.i = i;
            res.hyperplane.j = j;
            planes[{i, j}] = res.hyperplane;
            tables[{i, j}] = rep_errors(planes[{i, j}], ds);
        }
    return make_state(ds, labels, k, std::move(planes), std::move(tables), cfg);
}

}  // namespace

TEST_CASE("loss_fn composes silhouette and weighted slack") {
    SynthData blobs = make_blobs(30, 2, 2, 10.0, 9);
    Dataset ds = Dataset::from_matrix(blobs.points);
    MpcConfig cfg = resolved_config(ds, 2, 3.5);
    DescentState st = state_for(ds, blobs.truth, 2, cfg);
    // perfect separator: loss is exactly -silhouette whatever lambda is
    double sil = silhouette(ds, blobs.truth, 2).mean;
    CHECK(representation_error(st.tables, blobs.truth) == doctest::Approx(0.0));
    CHECK(st.loss == doctest::Approx(-sil).epsilon(1e-12));

    // lambda 0 reduces to -silhouette even with violated planes
    Rng rng(4);
    Matrix pts = oracles::random_points(rng, 16, 2);
    Dataset messy = Dataset::from_matrix(pts);
    MpcConfig cfg0 = resolved_config(messy, 2, 0.0);
    std::vector<int> labels(16);
    for (int t = 0; t < 16; ++t) labels[t] = t % 2;
    DescentState st0 = state_for(messy, labels, 2, cfg0);
    CHECK(st0.loss == doctest::Approx(-silhouette(messy, labels, 2).mean));
}

TEST_CASE("loss_fn equals a term-by-term recomputation") {
    Rng rng(27);
    for (int trial = 0; trial < 10; ++trial) {
        Matrix pts = oracles::random_points(rng, 14, 2);
        Dataset ds = Dataset::from_matrix(pts);
        MpcConfig cfg = resolved_config(ds, 3, 0.7);
        std::vector<int> labels(14);
        for (int t = 0; t < 14; ++t) labels[t] = t % 3;
        DescentState st = state_for(ds, labels, 3, cfg);
        double want = -oracles::naive_silhouette(pts, labels, 3) +
                      0.7 * oracles::direct_rep_error(ds, st.hyperplanes, labels);
        CHECK(st.loss == doctest::Approx(want).epsilon(1e-10));
    }
}

TEST_CASE("boundary_shift repairs a mis-split blob pair") {
    SynthData blobs = make_blobs(40, 2, 2, 12.0, 21);
    Dataset ds = Dataset::from_matrix(blobs.points);
    MpcConfig cfg = resolved_config(ds, 2);
    // push three points of cluster 1 across the boundary
    std::vector<int> labels = blobs.truth;
    int moved = 0;
    for (int t = 0; t < ds.n() && moved < 3; ++t)
        if (labels[t] == 1) {
            labels[t] = 0;
            ++moved;
        }
    DescentState st = state_for(ds, labels, 2, cfg);
    auto mv = boundary_shift(st, {0, 1}, ds, cfg);
    REQUIRE(mv.has_value());
    CHECK(mv->delta < 0.0);
    CHECK(mv->kind == MoveKind::boundary_shift);
    CHECK(oracles::adjusted_rand_index(mv->labels, blobs.truth) == doctest::Approx(1.0));
    CHECK(mv->loss_after ==
          doctest::Approx(loss_fn(ds, mv->labels, mv->k, mv->tables, cfg))
              .epsilon(1e-12));

    // at the optimum there is nothing left to gain, and probing must not
    // disturb the state
    DescentState best = state_for(ds, blobs.truth, 2, cfg);
    double loss_before = best.loss;
    auto none = boundary_shift(best, {0, 1}, ds, cfg);
    CHECK_FALSE(none.has_value());
    CHECK(best.loss == loss_before);
    CHECK(loss_fn(ds, best.assignment.labels, 2, best.tables, cfg) ==
          doctest::Approx(loss_before).epsilon(1e-12));
    std::vector<int> sizes(2, 0);
    for (int v : best.assignment.labels) sizes[v] += 1;
    CHECK(best.sil.mean(best.assignment.labels, sizes) ==
          doctest::Approx(silhouette(ds, best.assignment.labels, 2).mean)
              .epsilon(1e-12));
}

TEST_CASE("boundary_shift respects the size bounds") {
    Matrix pts = oracles::make_matrix({{0.0}, {0.1}, {0.2}, {0.9}, {1.0}});
    Dataset ds = Dataset::from_matrix(pts);
    MpcConfig cfg;
    cfg.k = 2;
    cfg.n_min = 2;
    cfg.lambda = 1.0;
    cfg = resolve(cfg, ds);
    // misassigned: point 2 belongs with the left cluster by distance, but
    // moving it would leave the right side at its minimum size
    std::vector<int> labels = {0, 0, 1, 1, 1};
    DescentState st = state_for(ds, labels, 2, cfg);
    auto mv = boundary_shift(st, {0, 1}, ds, cfg);
    if (mv.has_value()) {
        std::vector<int> sizes(2, 0);
        for (int v : mv->labels) sizes[v] += 1;
        CHECK(sizes[0] >= 2);
        CHECK(sizes[1] >= 2);
    }
}

TEST_CASE("split proposes a cut of a merged blob pair") {
    SynthData blobs = make_blobs(36, 2, 3, 10.0, 15);
    Dataset ds = Dataset::from_matrix(blobs.points);
    MpcConfig cfg = resolved_config(ds, 2, 1.0, 3);
    // merge truth clusters 1 and 2 into one
    std::vector<int> merged(ds.n());
    for (int t = 0; t < ds.n(); ++t) merged[t] = blobs.truth[t] == 2 ? 1 : blobs.truth[t];
    DescentState st = state_for(ds, merged, 2, cfg);
    auto mv = split_cluster(st, 1, ds, cfg, 0);
    REQUIRE(mv.has_value());
    CHECK(mv->kind == MoveKind::split);
    CHECK(mv->k == 3);
    CHECK(mv->delta < 0.0);
    CHECK(oracles::adjusted_rand_index(mv->labels, blobs.truth) == doctest::Approx(1.0));

    // guards: ceiling reached, or nothing to split
    MpcConfig capped = resolved_config(ds, 2, 1.0, 2);
    DescentState st2 = state_for(ds, merged, 2, capped);
    CHECK_FALSE(split_cluster(st2, 1, ds, capped, 0).has_value());
}

TEST_CASE("split refuses singletons") {
    Matrix pts = oracles::make_matrix({{0.0, 0.0}, {1.0, 1.0}, {1.1, 0.9}});
    Dataset ds = Dataset::from_matrix(pts);
    MpcConfig cfg = resolved_config(ds, 2, 1.0, 3);
    DescentState st = state_for(ds, {0, 1, 1}, 2, cfg);
    CHECK_FALSE(split_cluster(st, 0, ds, cfg, 0).has_value());
}

TEST_CASE("merge collapses a split blob and respects guards") {
    SynthData blobs = make_blobs(40, 2, 2, 12.0, 33);
    Dataset ds = Dataset::from_matrix(blobs.points);
    MpcConfig cfg = resolved_config(ds, 3, 1.0, 4);
    // split the first blob in half by x order
    std::vector<int> idx;
    for (int t = 0; t < ds.n(); ++t)
        if (blobs.truth[t] == 0) idx.push_back(t);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        return ds.points()(a, 0) < ds.points()(b, 0);
    });
    std::vector<int> labels(ds.n());
    for (int t = 0; t < ds.n(); ++t) labels[t] = blobs.truth[t] == 1 ? 2 : 0;
    for (size_t r = idx.size() / 2; r < idx.size(); ++r) labels[idx[r]] = 1;
    DescentState st = state_for(ds, labels, 3, cfg);
    auto mv = merge_clusters(st, {0, 1}, ds, cfg);
    REQUIRE(mv.has_value());
    CHECK(mv->kind == MoveKind::merge);
    CHECK(mv->k == 2);
    CHECK(mv->delta < 0.0);
    CHECK(oracles::adjusted_rand_index(mv->labels, blobs.truth) == doctest::Approx(1.0));
    CHECK(mv->hyperplanes.size() == 1);

    // K=2 guard
    DescentState two = state_for(ds, mv->labels, 2, cfg);
    CHECK_FALSE(merge_clusters(two, {0, 1}, ds, cfg).has_value());
}

TEST_CASE("merge skips non-adjacent pairs") {
    // three collinear groups: 0 | 1 | 2, so (0,2) is separated by cluster 1
    // on both sides and its facet prunes away
    Matrix pts = oracles::make_matrix({{0.0}, {0.05}, {0.4}, {0.45}, {0.9}, {0.95}});
    Dataset ds = Dataset::from_matrix(pts);
    MpcConfig cfg = resolved_config(ds, 3, 1.0, 3);
    DescentState st = state_for(ds, {0, 0, 1, 1, 2, 2}, 3, cfg);
    CHECK_FALSE(merge_clusters(st, {0, 2}, ds, cfg).has_value());
}

TEST_CASE("apply_move swaps in the proposed state") {
    SynthData blobs = make_blobs(30, 2, 2, 10.0, 44);
    Dataset ds = Dataset::from_matrix(blobs.points);
    MpcConfig cfg = resolved_config(ds, 2);
    std::vector<int> labels = blobs.truth;
    for (int t = 0; t < ds.n() && t < 2; ++t) labels[t] = 1 - labels[t];
    DescentState st = state_for(ds, labels, 2, cfg);
    auto mv = boundary_shift(st, {0, 1}, ds, cfg);
    REQUIRE(mv.has_value());
    double promised = mv->loss_after;
    apply_move(st, *mv, ds, cfg);
    CHECK(st.loss == doctest::Approx(promised).epsilon(1e-12));
    CHECK(st.assignment.labels == mv->labels);
    CHECK(st.assignment.k == mv->k);
}

TEST_CASE("coordinate descent leaves a local optimum alone") {
    SynthData blobs = make_blobs(40, 2, 2, 12.0, 52);
    Dataset ds = Dataset::from_matrix(blobs.points);
    MpcConfig cfg = resolved_config(ds, 2, 1.0, 2);
    AltMinResult init = alternating_minimization(ds, cfg, 3);
    REQUIRE(oracles::adjusted_rand_index(init.assignment.labels, blobs.truth) ==
            doctest::Approx(1.0));
    DescentResult res = coordinate_descent(ds, init, cfg);
    CHECK(res.moves.empty());
    CHECK(res.assignment.labels == init.assignment.labels);
}

TEST_CASE("coordinate descent strictly decreases the loss") {
    Rng rng(61);
    for (int trial = 0; trial < 6; ++trial) {
        Matrix pts = oracles::random_points(rng, 26, 2);
        Dataset ds = Dataset::from_matrix(pts);
        MpcConfig cfg = resolved_config(ds, 3, 0.5, 4);
        AltMinResult init = alternating_minimization(ds, cfg, 500 + trial);
        DescentResult res = coordinate_descent(ds, init, cfg);
        REQUIRE(res.trace.size() == res.moves.size() + 1);
        for (size_t i = 1; i < res.trace.size(); ++i)
            CHECK(res.trace[i] < res.trace[i - 1]);
        CHECK(res.assignment.k <= cfg.k_max);
        CHECK(res.loss ==
              doctest::Approx(loss_fn(ds, res.assignment.labels, res.assignment.k,
                                      res.tables, cfg))
                  .epsilon(1e-10));
    }
}

TEST_CASE("over-clustered blobs merge down to the truth") {
    SynthData blobs = make_blobs(44, 2, 2, 12.0, 66);
    Dataset ds = Dataset::from_matrix(blobs.points);
    MpcConfig cfg = resolved_config(ds, 4, 1.0, 4);
    AltMinResult init = alternating_minimization(ds, cfg, 8);
    DescentResult res = coordinate_descent(ds, init, cfg);
    CHECK(res.assignment.k == 2);
    CHECK(oracles::adjusted_rand_index(res.assignment.labels, blobs.truth) ==
          doctest::Approx(1.0));
}
