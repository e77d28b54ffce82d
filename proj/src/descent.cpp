#include "polyclust/descent.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "polyclust/hyperplane_solver.hpp"

namespace polyclust {

const char* to_string(MoveKind k) {
    switch (k) {
        case MoveKind::boundary_shift: return "boundary_shift";
        case MoveKind::split: return "split";
        case MoveKind::merge: return "merge";
    }
    return "?";
}

double loss_fn(const Dataset& ds, std::span<const int> labels, int k,
               const RepTable& tables, const MpcConfig& cfg) {
    if (k < 2) throw std::invalid_argument("loss_fn: k must be >= 2");
    double rep = cfg.lambda > 0.0 ? cfg.lambda * representation_error(tables, labels) : 0.0;
    if (cfg.cd_objective == CdObjective::silhouette) {
        SilhouetteReport r = silhouette(ds, labels, k);
        return -r.mean + rep;
    }
    Assignment z = make_assignment(ds, std::vector<int>(labels.begin(), labels.end()), k);
    return kmeans_term(ds, z) + rep;
}

DescentState make_state(const Dataset& ds, std::vector<int> labels, int k,
                        HyperplaneMap hyperplanes, RepTable tables, const MpcConfig& cfg) {
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) {
            PairKey key{i, j};
            if (!hyperplanes.count(key) || !tables.count(key))
                throw std::invalid_argument("make_state: missing hyperplane for pair (" +
                                            std::to_string(i) + "," + std::to_string(j) +
                                            ")");
        }
    DescentState st;
    st.assignment = make_assignment(ds, std::move(labels), k);
    for (int c = 0; c < k; ++c)
        if (st.assignment.sizes[c] == 0)
            throw std::invalid_argument("make_state: cluster " + std::to_string(c) +
                                        " is empty");
    st.hyperplanes = std::move(hyperplanes);
    st.tables = std::move(tables);
    st.rep_cost = build_rep_cost(st.tables, ds.n(), k);
    if (cfg.cd_objective == CdObjective::silhouette)
        st.sil.build(ds, st.assignment.labels, k);
    st.loss = loss_fn(ds, st.assignment.labels, k, st.tables, cfg);
    return st;
}

namespace {

double project(std::span<const double> x, const std::vector<int>& w) {
    double p = 0.0;
    for (size_t c = 0; c < w.size(); ++c)
        if (w[c] != 0) p += w[c] * x[c];
    return p;
}

Matrix rows_of(const Matrix& src, std::span<const int> idx) {
    Matrix out(static_cast<int>(idx.size()), src.cols());
    for (size_t r = 0; r < idx.size(); ++r)
        for (int c = 0; c < src.cols(); ++c) out(static_cast<int>(r), c) = src(idx[r], c);
    return out;
}

std::vector<std::vector<int>> members_by_cluster(std::span<const int> labels, int k) {
    std::vector<std::vector<int>> members(k);
    for (size_t t = 0; t < labels.size(); ++t) members[labels[t]].push_back(static_cast<int>(t));
    return members;
}

Hyperplane solve_pair(const Dataset& ds, std::span<const int> left,
                      std::span<const int> right, PairKey pair, const MpcConfig& cfg) {
    SeparationProblem prob;
    prob.left = rows_of(ds.explain_points(), left);
    prob.right = rows_of(ds.explain_points(), right);
    prob.M = cfg.m;
    prob.beta = cfg.beta;
    prob.epsilon = cfg.epsilon;
    Hyperplane h = solve_separation(prob, cfg.slope_budget).hyperplane;
    h.i = pair.first;
    h.j = pair.second;
    return h;
}

}  // namespace

std::optional<Move> boundary_shift(const DescentState& st, PairKey pair, const Dataset& ds,
                                   const MpcConfig& cfg) {
    const Assignment& z = st.assignment;
    const int i = pair.first, j = pair.second;
    const int n = ds.n();
    const int dE = ds.explain_d();
    const bool sil_mode = cfg.cd_objective == CdObjective::silhouette;
    const bool use_rep = cfg.lambda > 0.0;
    const double eps = cfg.epsilon;

    std::vector<int> P;
    for (int t = 0; t < n; ++t)
        if (z.labels[t] == i || z.labels[t] == j) P.push_back(t);
    const int m = static_cast<int>(P.size());
    if (m < 2) return std::nullopt;

    // Rep cost of each P point at i/j excluding this pair's own table, plus
    // the (constant) rep cost of everything outside the pair.
    std::vector<double> base_i, base_j;
    double rep_other = 0.0;
    if (use_rep) {
        const RepErrors& T = st.tables.at(pair);
        base_i.resize(m);
        base_j.resize(m);
        for (int p = 0; p < m; ++p) {
            int t = P[p];
            base_i[p] = st.rep_cost(t, i) - T.xi_plus[t];
            base_j[p] = st.rep_cost(t, j) - T.xi_minus[t];
        }
        for (int t = 0; t < n; ++t)
            if (z.labels[t] != i && z.labels[t] != j) rep_other += st.rep_cost(t, z.labels[t]);
    }

    // k-means bookkeeping: term = total_sqnorm - sum_c ||S_c||^2 / N_c.
    double total_sqnorm = 0.0, term_other = 0.0;
    std::vector<double> s_pair(ds.d(), 0.0), s_i, s_j;
    if (!sil_mode) {
        Matrix sums(z.k, ds.d(), 0.0);
        for (int t = 0; t < n; ++t) {
            auto x = ds.row(t);
            total_sqnorm += dot(x, x);
            for (int c = 0; c < ds.d(); ++c) sums(z.labels[t], c) += x[c];
        }
        for (int c = 0; c < z.k; ++c) {
            if (c == i || c == j) {
                for (int col = 0; col < ds.d(); ++col) s_pair[col] += sums(c, col);
            } else if (z.sizes[c] > 0) {
                term_other += dot(sums.row(c), sums.row(c)) / z.sizes[c];
            }
        }
    }

    std::vector<double> snap_i, snap_j;
    if (sil_mode) {
        st.sil.copy_column(i, snap_i);
        st.sil.copy_column(j, snap_j);
    }

    std::vector<int> labels_tmp = z.labels;
    std::vector<int> sizes_tmp = z.sizes;

    double best_loss = st.loss;
    std::vector<int> best_w;
    double best_thr = 0.0;

    std::vector<double> proj(m), asc(m), ps(m + 1);
    std::vector<int> ord(m);

    for_each_slope(dE, cfg.m, cfg.beta, [&](const std::vector<int>& w) {
        for (int p = 0; p < m; ++p) proj[p] = project(ds.explain_row(P[p]), w);
        std::iota(ord.begin(), ord.end(), 0);
        std::sort(ord.begin(), ord.end(), [&](int a, int b) {
            if (proj[a] != proj[b]) return proj[a] > proj[b];
            return a < b;
        });
        if (proj[ord.front()] == proj[ord.back()]) return true;  // no usable split

        if (use_rep) {
            for (int p = 0; p < m; ++p) asc[p] = proj[p];
            std::sort(asc.begin(), asc.end());
            for (int p = 0; p < m; ++p) ps[p + 1] = ps[p] + asc[p];
        }

        // start from the all-on-j partition, then move groups of equal
        // projection to the i side from the top down
        double cur_base = 0.0;
        for (int p = 0; p < m; ++p) {
            int t = P[p];
            if (labels_tmp[t] == i) {
                if (sil_mode) st.sil.relabel(t, i, j);
                labels_tmp[t] = j;
            }
            if (use_rep) cur_base += base_j[p];
        }
        sizes_tmp[i] = 0;
        sizes_tmp[j] = m;
        if (!sil_mode) {
            s_i.assign(ds.d(), 0.0);
            s_j = s_pair;
        }

        int g_start = 0;
        while (g_start < m) {
            int g_end = g_start;
            double thr = proj[ord[g_start]];
            while (g_end < m && proj[ord[g_end]] == thr) ++g_end;
            for (int r = g_start; r < g_end; ++r) {
                int p = ord[r];
                int t = P[p];
                if (sil_mode) st.sil.relabel(t, j, i);
                labels_tmp[t] = i;
                if (use_rep) cur_base += base_i[p] - base_j[p];
                if (!sil_mode) {
                    auto x = ds.row(t);
                    for (int c = 0; c < ds.d(); ++c) {
                        s_i[c] += x[c];
                        s_j[c] -= x[c];
                    }
                }
            }
            sizes_tmp[i] = g_end;
            sizes_tmp[j] = m - g_end;
            g_start = g_end;
            if (g_end == m) break;  // j side would be empty

            int ni = sizes_tmp[i], nj = sizes_tmp[j];
            if (ni < cfg.n_min || ni > cfg.n_max || nj < cfg.n_min || nj > cfg.n_max)
                continue;

            double cand_rep = 0.0;
            if (use_rep) {
                // j-side points inside the eps band pay proj - thr + eps
                auto lo = std::upper_bound(asc.begin(), asc.end(), thr - eps);
                auto hi = std::lower_bound(asc.begin(), asc.end(), thr);
                auto li = lo - asc.begin();
                auto hi_i = hi - asc.begin();
                double band = (ps[hi_i] - ps[li]) -
                              static_cast<double>(hi_i - li) * (thr - eps);
                cand_rep = rep_other + cur_base + band;
            }
            double cand;
            if (sil_mode) {
                cand = -st.sil.mean(labels_tmp, sizes_tmp) + cfg.lambda * cand_rep;
            } else {
                double term_ij = dot(s_i, s_i) / ni + dot(s_j, s_j) / nj;
                cand = total_sqnorm - term_other - term_ij + cfg.lambda * cand_rep;
            }
            if (cand < best_loss) {
                best_loss = cand;
                best_w = w;
                best_thr = thr;
            }
        }

        // exact restore for the next slope
        if (sil_mode) {
            st.sil.restore_column(i, snap_i);
            st.sil.restore_column(j, snap_j);
        }
        for (int p = 0; p < m; ++p) labels_tmp[P[p]] = z.labels[P[p]];
        sizes_tmp[i] = z.sizes[i];
        sizes_tmp[j] = z.sizes[j];
        return true;
    });

    if (best_w.empty() || best_loss >= st.loss - kMoveAcceptTol) return std::nullopt;

    Move mv;
    mv.kind = MoveKind::boundary_shift;
    mv.a = i;
    mv.b = j;
    mv.k = z.k;
    mv.labels = z.labels;
    for (int p = 0; p < m; ++p) {
        double v = project(ds.explain_row(P[p]), best_w);
        mv.labels[P[p]] = v >= best_thr ? i : j;
    }
    Hyperplane h;
    h.i = i;
    h.j = j;
    h.w = best_w;
    h.b = -best_thr;
    h.epsilon = eps;
    mv.hyperplanes = st.hyperplanes;
    mv.hyperplanes[pair] = h;
    mv.tables = st.tables;
    mv.tables[pair] = rep_errors(h, ds);
    mv.loss_after = loss_fn(ds, mv.labels, mv.k, mv.tables, cfg);
    mv.delta = mv.loss_after - st.loss;
    if (mv.delta >= -kMoveAcceptTol) return std::nullopt;
    return mv;
}

namespace {

// Completes a split proposal given the splitting hyperplane for the pair
// (cluster, k): side-test reassignment, bound checks, fresh separations
// against every other cluster, and a from-scratch evaluation.
std::optional<Move> finish_split(const DescentState& st, int cluster, Hyperplane h_split,
                                 const Dataset& ds, const MpcConfig& cfg) {
    const Assignment& z = st.assignment;
    const int knew = z.k;

    std::vector<int> labels = z.labels;
    int stay = 0, go = 0;
    for (int t = 0; t < ds.n(); ++t) {
        if (z.labels[t] != cluster) continue;
        if (h_split.value(ds.explain_row(t)) >= 0.0) {
            ++stay;
        } else {
            labels[t] = knew;
            ++go;
        }
    }
    if (stay == 0 || go == 0) return std::nullopt;
    if (stay < cfg.n_min || stay > cfg.n_max || go < cfg.n_min || go > cfg.n_max)
        return std::nullopt;

    Move mv;
    mv.kind = MoveKind::split;
    mv.a = cluster;
    mv.k = z.k + 1;
    mv.labels = std::move(labels);
    mv.hyperplanes = st.hyperplanes;
    mv.tables = st.tables;
    mv.hyperplanes[{cluster, knew}] = h_split;
    mv.tables[{cluster, knew}] = rep_errors(h_split, ds);
    auto members = members_by_cluster(mv.labels, mv.k);
    for (int mcl = 0; mcl < z.k; ++mcl) {
        if (mcl == cluster) continue;
        PairKey key{mcl, knew};
        Hyperplane h = solve_pair(ds, members[mcl], members[knew], key, cfg);
        mv.hyperplanes[key] = h;
        mv.tables[key] = rep_errors(h, ds);
    }
    mv.loss_after = loss_fn(ds, mv.labels, mv.k, mv.tables, cfg);
    mv.delta = mv.loss_after - st.loss;
    if (mv.delta >= -kMoveAcceptTol) return std::nullopt;
    return mv;
}

}  // namespace

std::optional<Move> split_cluster(const DescentState& st, int cluster, const Dataset& ds,
                                  const MpcConfig& cfg, std::uint64_t salt) {
    const Assignment& z = st.assignment;
    if (z.k >= cfg.k_max) return std::nullopt;
    std::vector<int> ci;
    for (int t = 0; t < ds.n(); ++t)
        if (z.labels[t] == cluster) ci.push_back(t);
    if (ci.size() < 2) return std::nullopt;

    if (cfg.exhaustive_split) {
        // Try every slope and every distinct threshold over the cluster's
        // own projections; keep the best completed move.
        std::optional<Move> best;
        const int m = static_cast<int>(ci.size());
        std::vector<double> proj(m);
        for_each_slope(ds.explain_d(), cfg.m, cfg.beta, [&](const std::vector<int>& w) {
            for (int p = 0; p < m; ++p) proj[p] = project(ds.explain_row(ci[p]), w);
            std::vector<double> thrs = proj;
            std::sort(thrs.begin(), thrs.end(), std::greater<>());
            thrs.erase(std::unique(thrs.begin(), thrs.end()), thrs.end());
            for (double thr : thrs) {
                if (thr == thrs.back()) break;  // everything on the >= side
                Hyperplane h;
                h.i = cluster;
                h.j = z.k;
                h.w = w;
                h.b = -thr;
                h.epsilon = cfg.epsilon;
                auto mv = finish_split(st, cluster, h, ds, cfg);
                if (mv && (!best || mv->loss_after < best->loss_after)) best = std::move(mv);
            }
            return true;
        });
        return best;
    }

    Rng rng(cfg.seed + 1000003ULL * (salt + 1) + 7919ULL * (cluster + 1));
    KmeansResult km = lloyd_kmeans(ds, ci, 2, rng, cfg.max_lloyd_iters);
    std::vector<int> half_a, half_b;
    for (size_t p = 0; p < ci.size(); ++p)
        (km.labels[p] == 0 ? half_a : half_b).push_back(ci[p]);
    if (half_a.empty() || half_b.empty()) return std::nullopt;

    Hyperplane h = solve_pair(ds, half_a, half_b, {cluster, z.k}, cfg);
    return finish_split(st, cluster, h, ds, cfg);
}

std::optional<Move> merge_clusters(const DescentState& st, PairKey pair, const Dataset& ds,
                                   const MpcConfig& cfg) {
    const Assignment& z = st.assignment;
    const int k = z.k;
    if (k <= 2) return std::nullopt;
    const int i = pair.first, j = pair.second;
    if (z.sizes[i] + z.sizes[j] > cfg.n_max) return std::nullopt;

    // Adjacency: the shared facet must matter for at least one of the two
    // polytopes; otherwise the clusters do not actually touch.
    bool adjacent = false;
    for (int side : {i, j}) {
        Polytope p = build_polytope(side, st.hyperplanes, k);
        for (size_t f = 0; f < p.facets.size(); ++f) {
            if (p.facets[f].other != (side == i ? j : i)) continue;
            if (!facet_redundant(p, f, ds)) adjacent = true;
            break;
        }
        if (adjacent) break;
    }
    if (!adjacent) return std::nullopt;

    auto remap = [j](int c) { return c > j ? c - 1 : c; };
    Move mv;
    mv.kind = MoveKind::merge;
    mv.a = i;
    mv.b = j;
    mv.k = k - 1;
    mv.labels = z.labels;
    for (int& v : mv.labels) v = remap(v == j ? i : v);

    for (const auto& [key, h] : st.hyperplanes) {
        if (key.first == i || key.first == j || key.second == i || key.second == j) continue;
        PairKey nk{remap(key.first), remap(key.second)};
        Hyperplane nh = h;
        nh.i = nk.first;
        nh.j = nk.second;
        mv.hyperplanes[nk] = std::move(nh);
        mv.tables[nk] = st.tables.at(key);
    }
    auto members = members_by_cluster(mv.labels, mv.k);
    for (int mcl = 0; mcl < mv.k; ++mcl) {
        if (mcl == i) continue;
        PairKey key = make_pair_key(i, mcl);
        Hyperplane h = solve_pair(ds, members[key.first], members[key.second], key, cfg);
        mv.hyperplanes[key] = h;
        mv.tables[key] = rep_errors(h, ds);
    }
    mv.loss_after = loss_fn(ds, mv.labels, mv.k, mv.tables, cfg);
    mv.delta = mv.loss_after - st.loss;
    if (mv.delta >= -kMoveAcceptTol) return std::nullopt;
    return mv;
}

void apply_move(DescentState& st, const Move& mv, const Dataset& ds, const MpcConfig& cfg) {
    st.assignment = make_assignment(ds, mv.labels, mv.k);
    st.hyperplanes = mv.hyperplanes;
    st.tables = mv.tables;
    st.rep_cost = build_rep_cost(st.tables, ds.n(), mv.k);
    if (cfg.cd_objective == CdObjective::silhouette)
        st.sil.build(ds, st.assignment.labels, mv.k);
    st.loss = mv.loss_after;
}

DescentResult coordinate_descent(const Dataset& ds, const AltMinResult& init,
                                 const MpcConfig& cfg) {
    // Compact away empty clusters and rekey their hyperplanes.
    const Assignment& z0 = init.assignment;
    std::vector<int> map_to(z0.k, -1);
    int k = 0;
    for (int c = 0; c < z0.k; ++c)
        if (z0.sizes[c] > 0) map_to[c] = k++;
    if (k < 2)
        throw std::invalid_argument("coordinate_descent: needs >= 2 nonempty clusters");
    std::vector<int> labels(ds.n());
    for (int t = 0; t < ds.n(); ++t) labels[t] = map_to[z0.labels[t]];
    HyperplaneMap planes;
    RepTable tables;
    for (const auto& [key, h] : init.hyperplanes) {
        if (map_to[key.first] < 0 || map_to[key.second] < 0) continue;
        PairKey nk{map_to[key.first], map_to[key.second]};
        Hyperplane nh = h;
        nh.i = nk.first;
        nh.j = nk.second;
        planes[nk] = std::move(nh);
        tables[nk] = init.tables.at(key);
    }
    auto members = members_by_cluster(labels, k);
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) {
            PairKey key{i, j};
            if (planes.count(key)) continue;
            Hyperplane h = solve_pair(ds, members[i], members[j], key, cfg);
            planes[key] = h;
            tables[key] = rep_errors(h, ds);
        }

    DescentState st = make_state(ds, std::move(labels), k, std::move(planes),
                                 std::move(tables), cfg);
    DescentResult res;
    res.trace.push_back(st.loss);

    auto accept = [&](const Move& mv) {
        apply_move(st, mv, ds, cfg);
        res.moves.push_back({mv.kind, mv.a, mv.b, mv.delta, mv.loss_after,
                             st.assignment.k});
        res.trace.push_back(st.loss);
    };

    while (true) {
        bool accepted = false;
        const int kk = st.assignment.k;
        for (int a = 0; a < kk && !accepted; ++a) {
            for (int b = a + 1; b < kk && !accepted; ++b) {
                auto mv = boundary_shift(st, {a, b}, ds, cfg);
                if (!mv) mv = merge_clusters(st, {a, b}, ds, cfg);
                if (mv) {
                    accept(*mv);
                    accepted = true;
                }
            }
        }
        if (!accepted) {
            for (int c = 0; c < kk && !accepted; ++c) {
                auto mv = split_cluster(st, c, ds, cfg, res.moves.size());
                if (mv) {
                    accept(*mv);
                    accepted = true;
                }
            }
        }
        if (!accepted) break;
    }

    res.assignment = std::move(st.assignment);
    res.hyperplanes = std::move(st.hyperplanes);
    res.tables = std::move(st.tables);
    res.loss = st.loss;
    return res;
}

}  // namespace polyclust
