#include "polyclust/clustering.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <string>

#include "polyclust/hyperplane_solver.hpp"

namespace polyclust {

namespace {

void check_labels(std::span<const int> labels, int k) {
    for (int v : labels)
        if (v < 0 || v >= k)
            throw std::invalid_argument("label " + std::to_string(v) +
                                        " outside [0," + std::to_string(k) + ")");
}

Matrix rows_of(const Matrix& src, std::span<const int> idx) {
    Matrix out(static_cast<int>(idx.size()), src.cols());
    for (size_t r = 0; r < idx.size(); ++r)
        for (int c = 0; c < src.cols(); ++c) out(static_cast<int>(r), c) = src(idx[r], c);
    return out;
}

}  // namespace

Assignment make_assignment(const Dataset& ds, std::vector<int> labels, int k) {
    if (static_cast<int>(labels.size()) != ds.n())
        throw std::invalid_argument("make_assignment: label count != n");
    check_labels(labels, k);
    Assignment z;
    z.labels = std::move(labels);
    z.k = k;
    z.sizes.assign(k, 0);
    for (int v : z.labels) ++z.sizes[v];
    z.centers = Matrix(k, ds.d(), 0.0);
    for (int t = 0; t < ds.n(); ++t) {
        auto x = ds.row(t);
        for (int c = 0; c < ds.d(); ++c) z.centers(z.labels[t], c) += x[c];
    }
    for (int c = 0; c < k; ++c)
        if (z.sizes[c] > 0)
            for (int col = 0; col < ds.d(); ++col) z.centers(c, col) /= z.sizes[c];
    return z;
}

void SilhouetteCache::build(const Dataset& ds, std::span<const int> labels, int k) {
    check_labels(labels, k);
    ds_ = &ds;
    n_ = ds.n();
    k_ = k;
    sums_.assign(static_cast<size_t>(n_) * k_, 0.0);
    if (ds.has_distance_matrix()) {
        for (int t = 0; t < n_; ++t) {
            auto row = ds.distance_row(t);
            double* out = sums_.data() + static_cast<size_t>(t) * k_;
            for (int u = 0; u < n_; ++u) out[labels[u]] += row[u];
        }
    } else {
        for (int t = 0; t < n_; ++t) {
            for (int u = t + 1; u < n_; ++u) {
                double d = ds.distance(t, u);
                sums_[static_cast<size_t>(t) * k_ + labels[u]] += d;
                sums_[static_cast<size_t>(u) * k_ + labels[t]] += d;
            }
        }
    }
}

void SilhouetteCache::relabel(int t, int from, int to) {
    if (ds_->has_distance_matrix()) {
        auto row = ds_->distance_row(t);
        for (int u = 0; u < n_; ++u) {
            double* s = sums_.data() + static_cast<size_t>(u) * k_;
            s[from] -= row[u];
            s[to] += row[u];
        }
    } else {
        for (int u = 0; u < n_; ++u) {
            double d = ds_->distance(t, u);
            double* s = sums_.data() + static_cast<size_t>(u) * k_;
            s[from] -= d;
            s[to] += d;
        }
    }
}

double SilhouetteCache::mean(std::span<const int> labels, std::span<const int> sizes) const {
    double total = 0.0;
    for (int t = 0; t < n_; ++t) {
        const double* s = sums_.data() + static_cast<size_t>(t) * k_;
        int c = labels[t];
        if (sizes[c] <= 1) continue;  // singleton scores 0
        double r = s[c] / (sizes[c] - 1);
        double q = std::numeric_limits<double>::infinity();
        for (int l = 0; l < k_; ++l) {
            if (l == c || sizes[l] == 0) continue;
            double v = s[l] / sizes[l];
            if (v < q) q = v;
        }
        double m = std::max(q, r);
        if (m > 0.0) total += (q - r) / m;
    }
    return total / n_;
}

void SilhouetteCache::copy_column(int c, std::vector<double>& out) const {
    out.resize(n_);
    for (int t = 0; t < n_; ++t) out[t] = sums_[static_cast<size_t>(t) * k_ + c];
}

void SilhouetteCache::restore_column(int c, const std::vector<double>& in) {
    for (int t = 0; t < n_; ++t) sums_[static_cast<size_t>(t) * k_ + c] = in[t];
}

SilhouetteReport silhouette(const Dataset& ds, std::span<const int> labels, int k) {
    if (k < 2) throw ConfigError("silhouette requires k >= 2");
    if (static_cast<int>(labels.size()) != ds.n())
        throw std::invalid_argument("silhouette: label count != n");
    check_labels(labels, k);
    std::vector<int> sizes(k, 0);
    for (int v : labels) ++sizes[v];
    for (int c = 0; c < k; ++c)
        if (sizes[c] == 0)
            throw ConfigError("silhouette: cluster " + std::to_string(c) + " is empty");

    SilhouetteCache cache;
    cache.build(ds, labels, k);
    SilhouetteReport rep;
    const int n = ds.n();
    rep.r.assign(n, 0.0);
    rep.q.assign(n, 0.0);
    rep.s.assign(n, 0.0);
    for (int t = 0; t < n; ++t) {
        int c = labels[t];
        double q = std::numeric_limits<double>::infinity();
        for (int l = 0; l < k; ++l) {
            if (l == c || sizes[l] == 0) continue;
            q = std::min(q, cache.sum(t, l) / sizes[l]);
        }
        rep.q[t] = q;
        if (sizes[c] <= 1) continue;  // r undefined, s = 0 by convention
        rep.r[t] = cache.sum(t, c) / (sizes[c] - 1);
        double m = std::max(rep.q[t], rep.r[t]);
        rep.s[t] = m > 0.0 ? (rep.q[t] - rep.r[t]) / m : 0.0;
    }
    rep.mean = std::accumulate(rep.s.begin(), rep.s.end(), 0.0) / n;
    return rep;
}

KmeansResult lloyd_kmeans(const Dataset& ds, std::span<const int> subset, int k, Rng& rng,
                          int max_iters) {
    const int m = static_cast<int>(subset.size());
    const int d = ds.d();
    if (k < 1 || k > m)
        throw std::invalid_argument("lloyd_kmeans: need 1 <= k <= subset size");

    // k-means++ seeding
    std::vector<bool> chosen(m, false);
    std::vector<double> d2(m, std::numeric_limits<double>::infinity());
    Matrix centers(k, d);
    int first = rng.uniform_int(0, m - 1);
    chosen[first] = true;
    for (int c = 0; c < d; ++c) centers(0, c) = ds.row(subset[first])[c];
    for (int s = 1; s < k; ++s) {
        double total = 0.0;
        for (int p = 0; p < m; ++p) {
            double v = squared_distance(ds.row(subset[p]), centers.row(s - 1));
            if (v < d2[p]) d2[p] = v;
            if (chosen[p]) d2[p] = 0.0;
            total += d2[p];
        }
        int pick = -1;
        if (total > 0.0) {
            double r = rng.uniform() * total;
            double cum = 0.0;
            for (int p = 0; p < m; ++p) {
                cum += d2[p];
                if (cum > r) {
                    pick = p;
                    break;
                }
            }
            if (pick < 0) {  // r landed on the tail of accumulated rounding
                for (int p = m - 1; p >= 0; --p)
                    if (d2[p] > 0.0) {
                        pick = p;
                        break;
                    }
            }
        }
        if (pick < 0) {  // duplicates only: first index not yet chosen
            for (int p = 0; p < m; ++p)
                if (!chosen[p]) {
                    pick = p;
                    break;
                }
        }
        chosen[pick] = true;
        for (int c = 0; c < d; ++c) centers(s, c) = ds.row(subset[pick])[c];
    }

    KmeansResult res;
    res.centers = std::move(centers);
    res.labels.assign(m, -1);
    std::vector<int> newlab(m);
    std::vector<int> sizes(k);
    for (res.iters = 1; res.iters <= max_iters; ++res.iters) {
        for (int p = 0; p < m; ++p) {
            int best = 0;
            double bestv = squared_distance(ds.row(subset[p]), res.centers.row(0));
            for (int c = 1; c < k; ++c) {
                double v = squared_distance(ds.row(subset[p]), res.centers.row(c));
                if (v < bestv) {
                    bestv = v;
                    best = c;
                }
            }
            newlab[p] = best;
        }
        std::fill(sizes.begin(), sizes.end(), 0);
        for (int v : newlab) ++sizes[v];
        // repair empty clusters with the farthest point of a donor cluster
        for (int c = 0; c < k; ++c) {
            while (sizes[c] == 0) {
                int donor = -1;
                double worst = -1.0;
                for (int p = 0; p < m; ++p) {
                    if (sizes[newlab[p]] < 2) continue;
                    double v = squared_distance(ds.row(subset[p]),
                                                res.centers.row(newlab[p]));
                    if (v > worst) {
                        worst = v;
                        donor = p;
                    }
                }
                --sizes[newlab[donor]];
                newlab[donor] = c;
                ++sizes[c];
            }
        }
        bool stable = (newlab == res.labels);
        res.labels = newlab;
        res.centers = Matrix(k, d, 0.0);
        for (int p = 0; p < m; ++p) {
            auto x = ds.row(subset[p]);
            for (int c = 0; c < d; ++c) res.centers(res.labels[p], c) += x[c];
        }
        for (int c = 0; c < k; ++c)
            for (int col = 0; col < d; ++col) res.centers(c, col) /= sizes[c];
        if (stable) {
            res.converged = true;
            break;
        }
    }
    res.iters = std::min(res.iters, max_iters);
    return res;
}

Assignment kmeans_pp_init(const Dataset& ds, int k, std::uint64_t seed, int max_iters) {
    if (k < 1 || k > ds.n()) throw ConfigError("kmeans_pp_init: need 1 <= k <= n");
    std::vector<int> all(ds.n());
    std::iota(all.begin(), all.end(), 0);
    Rng rng(seed);
    KmeansResult km = lloyd_kmeans(ds, all, k, rng, max_iters);
    Assignment z;
    z.labels = std::move(km.labels);
    z.k = k;
    z.sizes.assign(k, 0);
    for (int v : z.labels) ++z.sizes[v];
    z.centers = std::move(km.centers);
    return z;
}

namespace {

// Successive shortest augmenting paths with Johnson potentials.
class MinCostFlow {
public:
    explicit MinCostFlow(int nodes) : adj_(nodes) {}

    void add_edge(int u, int v, int cap, long long cost) {
        adj_[u].push_back(static_cast<int>(edges_.size()));
        edges_.push_back({v, cap, cost});
        adj_[v].push_back(static_cast<int>(edges_.size()));
        edges_.push_back({u, 0, -cost});
    }

    const auto& edge(int id) const { return edges_[id]; }

    int run(int s, int t, int need) {
        const int nv = static_cast<int>(adj_.size());
        const long long inf = LLONG_MAX / 4;
        std::vector<long long> pot(nv, 0);
        int flow = 0;
        while (flow < need) {
            std::vector<long long> dist(nv, inf);
            std::vector<int> pedge(nv, -1);
            std::priority_queue<std::pair<long long, int>,
                                std::vector<std::pair<long long, int>>,
                                std::greater<>> pq;
            dist[s] = 0;
            pq.push({0, s});
            while (!pq.empty()) {
                auto [dc, u] = pq.top();
                pq.pop();
                if (dc > dist[u]) continue;
                for (int ei : adj_[u]) {
                    const Edge& e = edges_[ei];
                    if (e.cap <= 0) continue;
                    long long nd = dc + e.cost + pot[u] - pot[e.to];
                    if (nd < dist[e.to]) {
                        dist[e.to] = nd;
                        pedge[e.to] = ei;
                        pq.push({nd, e.to});
                    }
                }
            }
            if (dist[t] >= inf) return flow;
            for (int v = 0; v < nv; ++v)
                if (dist[v] < inf) pot[v] += dist[v];
            int push = need - flow;
            for (int v = t; v != s; v = edges_[pedge[v] ^ 1].to)
                push = std::min(push, edges_[pedge[v]].cap);
            for (int v = t; v != s; v = edges_[pedge[v] ^ 1].to) {
                edges_[pedge[v]].cap -= push;
                edges_[pedge[v] ^ 1].cap += push;
            }
            flow += push;
        }
        return flow;
    }

private:
    struct Edge {
        int to;
        int cap;
        long long cost;
    };
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> adj_;
};

}  // namespace

Assignment assign_with_rep(const Dataset& ds, const Matrix& centers, const RepTable& tables,
                           double lambda, int n_min, int n_max, double resolution) {
    const int n = ds.n();
    const int k = centers.rows();
    if (centers.cols() != ds.d())
        throw std::invalid_argument("assign_with_rep: center dimension != data dimension");
    if (k < 1) throw std::invalid_argument("assign_with_rep: no centers");
    if (lambda < 0.0) throw std::invalid_argument("assign_with_rep: lambda must be >= 0");
    if (n_min < 0 || n_max < n_min)
        throw std::invalid_argument("assign_with_rep: need 0 <= n_min <= n_max");
    if (static_cast<long long>(k) * n_min > n || static_cast<long long>(k) * n_max < n)
        throw InfeasibleError("size bounds admit no assignment: k=" + std::to_string(k) +
                              " n_min=" + std::to_string(n_min) +
                              " n_max=" + std::to_string(n_max) + " n=" + std::to_string(n));
    if (!(resolution > 0.0))
        throw std::invalid_argument("assign_with_rep: resolution must be positive");

    Matrix cost(n, k);
    {
        Matrix rep = build_rep_cost(tables, n, k);
        for (int t = 0; t < n; ++t)
            for (int c = 0; c < k; ++c)
                cost(t, c) = squared_distance(ds.row(t), centers.row(c)) +
                             lambda * rep(t, c);
    }

    // Greedy fast path: the per-point argmin is globally optimal whenever it
    // already satisfies the size bounds.
    Assignment z;
    z.k = k;
    z.labels.assign(n, 0);
    z.sizes.assign(k, 0);
    for (int t = 0; t < n; ++t) {
        int best = 0;
        for (int c = 1; c < k; ++c)
            if (cost(t, c) < cost(t, best)) best = c;
        z.labels[t] = best;
        ++z.sizes[best];
    }
    bool ok = true;
    for (int c = 0; c < k && ok; ++c) ok = z.sizes[c] >= n_min && z.sizes[c] <= n_max;
    if (ok) {
        z.centers = centers;
        return z;
    }

    // Exact constrained optimum via min-cost flow.
    // Nodes: points, clusters, an overflow pool for capacity above n_min,
    // source, sink.
    const int pool = n + k;
    const int src = n + k + 1;
    const int snk = n + k + 2;
    MinCostFlow mcf(n + k + 3);
    for (int t = 0; t < n; ++t) mcf.add_edge(src, t, 1, 0);
    const int point_edge_base = 2 * n;
    for (int t = 0; t < n; ++t) {
        for (int c = 0; c < k; ++c) {
            double scaled = cost(t, c) / resolution;
            if (!(scaled < 9.0e15))
                throw std::invalid_argument(
                    "assign_with_rep: cost overflows the integer scale; "
                    "increase resolution");
            mcf.add_edge(t, n + c, 1, std::llround(scaled));
        }
    }
    for (int c = 0; c < k; ++c) {
        if (n_min > 0) mcf.add_edge(n + c, snk, n_min, 0);
        if (n_max > n_min) mcf.add_edge(n + c, pool, n_max - n_min, 0);
    }
    if (n - k * n_min > 0) mcf.add_edge(pool, snk, n - k * n_min, 0);
    int pushed = mcf.run(src, snk, n);
    if (pushed < n)
        throw InfeasibleError("constrained assignment infeasible (flow " +
                              std::to_string(pushed) + " < " + std::to_string(n) + ")");

    std::fill(z.sizes.begin(), z.sizes.end(), 0);
    for (int t = 0; t < n; ++t) {
        z.labels[t] = -1;
        for (int c = 0; c < k; ++c) {
            if (mcf.edge(point_edge_base + 2 * (t * k + c)).cap == 0) {
                z.labels[t] = c;
                break;
            }
        }
        ++z.sizes[z.labels[t]];
    }
    z.centers = centers;
    return z;
}

void update_centers(const Dataset& ds, Assignment& z) {
    for (int c = 0; c < z.k; ++c)
        if (z.sizes[c] == 0)
            throw std::invalid_argument("update_centers: cluster " + std::to_string(c) +
                                        " is empty");
    z.centers = Matrix(z.k, ds.d(), 0.0);
    for (int t = 0; t < ds.n(); ++t) {
        auto x = ds.row(t);
        for (int c = 0; c < ds.d(); ++c) z.centers(z.labels[t], c) += x[c];
    }
    for (int c = 0; c < z.k; ++c)
        for (int col = 0; col < ds.d(); ++col) z.centers(c, col) /= z.sizes[c];
}

double kmeans_term(const Dataset& ds, const Assignment& z) {
    double total = 0.0;
    for (int t = 0; t < ds.n(); ++t)
        total += squared_distance(ds.row(t), z.centers.row(z.labels[t]));
    return total;
}

AltMinResult alternating_minimization(const Dataset& ds, const MpcConfig& cfg,
                                      std::uint64_t seed) {
    AltMinResult res;
    Assignment z = kmeans_pp_init(ds, cfg.k, seed, cfg.max_lloyd_iters);
    RepTable tables;
    HyperplaneMap planes;
    double prev = std::numeric_limits<double>::infinity();

    auto update_centers_keep_empty = [&](Assignment& a) {
        Matrix sums(a.k, ds.d(), 0.0);
        for (int t = 0; t < ds.n(); ++t) {
            auto x = ds.row(t);
            for (int c = 0; c < ds.d(); ++c) sums(a.labels[t], c) += x[c];
        }
        for (int c = 0; c < a.k; ++c) {
            if (a.sizes[c] == 0) continue;  // keep the stale center
            for (int col = 0; col < ds.d(); ++col)
                a.centers(c, col) = sums(c, col) / a.sizes[c];
        }
    };

    for (int outer = 1; outer <= cfg.max_outer_iters; ++outer) {
        res.outer_iters = outer;
        for (int it = 0; it < cfg.max_lloyd_iters; ++it) {
            Assignment next = assign_with_rep(ds, z.centers, tables, cfg.lambda, cfg.n_min,
                                              cfg.n_max, cfg.assign_resolution);
            bool stable = (next.labels == z.labels);
            z.labels = std::move(next.labels);
            z.sizes = std::move(next.sizes);
            update_centers_keep_empty(z);
            if (stable) break;
        }

        planes.clear();
        tables.clear();
        std::vector<std::vector<int>> members(cfg.k);
        for (int t = 0; t < ds.n(); ++t) members[z.labels[t]].push_back(t);
        for (int i = 0; i < cfg.k; ++i) {
            if (members[i].empty()) continue;
            for (int j = i + 1; j < cfg.k; ++j) {
                if (members[j].empty()) continue;
                SeparationProblem prob;
                prob.left = rows_of(ds.explain_points(), members[i]);
                prob.right = rows_of(ds.explain_points(), members[j]);
                prob.M = cfg.m;
                prob.beta = cfg.beta;
                prob.epsilon = cfg.epsilon;
                SeparationResult sep = solve_separation(prob, cfg.slope_budget);
                Hyperplane h = sep.hyperplane;
                h.i = i;
                h.j = j;
                planes[{i, j}] = h;
                tables[{i, j}] = rep_errors(h, ds);
            }
        }

        KmRepObjective obj;
        obj.kmeans = kmeans_term(ds, z);
        obj.rep = cfg.lambda * representation_error(tables, z.labels);
        res.trace.push_back(obj);
        if (prev - obj.total() < cfg.outer_tol) {
            res.converged = true;
            break;
        }
        prev = obj.total();
    }
    res.assignment = std::move(z);
    res.hyperplanes = std::move(planes);
    res.tables = std::move(tables);
    return res;
}

}  // namespace polyclust
