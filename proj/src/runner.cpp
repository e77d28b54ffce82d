#include "polyclust/runner.hpp"

#include <chrono>
#include <exception>
#include <filesystem>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "polyclust/explain.hpp"

namespace polyclust {

namespace {

using ordered_json = nlohmann::ordered_json;

void escape_into(const std::string& s, std::string& out) {
    out += '"';
    for (char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\b': out += "\\b"; break;
            case '\f': out += "\\f"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(ch) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", ch);
                    out += buf;
                } else {
                    out += ch;
                }
        }
    }
    out += '"';
}

// nlohmann's dump() formats doubles via its own grisu; we pin the byte
// representation ourselves so exports are stable and exact.
void dump_into(const ordered_json& v, std::string& out) {
    switch (v.type()) {
        case ordered_json::value_t::object: {
            out += '{';
            bool first = true;
            for (auto it = v.begin(); it != v.end(); ++it) {
                if (!first) out += ',';
                first = false;
                escape_into(it.key(), out);
                out += ':';
                dump_into(it.value(), out);
            }
            out += '}';
            break;
        }
        case ordered_json::value_t::array: {
            out += '[';
            for (size_t i = 0; i < v.size(); ++i) {
                if (i) out += ',';
                dump_into(v[i], out);
            }
            out += ']';
            break;
        }
        case ordered_json::value_t::string:
            escape_into(v.get_ref<const std::string&>(), out);
            break;
        case ordered_json::value_t::boolean:
            out += v.get<bool>() ? "true" : "false";
            break;
        case ordered_json::value_t::number_integer:
            out += std::to_string(v.get<long long>());
            break;
        case ordered_json::value_t::number_unsigned:
            out += std::to_string(v.get<unsigned long long>());
            break;
        case ordered_json::value_t::number_float:
            out += format_double(v.get<double>());
            break;
        default:
            out += "null";
    }
}

std::string dump_stable(const ordered_json& v) {
    std::string out;
    dump_into(v, out);
    out += '\n';
    return out;
}

RepTable tables_from(const HyperplaneMap& planes, const Dataset& ds) {
    RepTable tables;
    for (const auto& [key, h] : planes) tables[key] = rep_errors(h, ds);
    return tables;
}

Metrics compute_metrics(const Dataset& ds, const MpcConfig& cfg,
                        const std::vector<int>& labels, int k, const RepTable& tables) {
    Metrics m;
    m.k_final = k;
    m.silhouette = silhouette(ds, labels, k).mean;
    m.rep_raw = representation_error(tables, labels);
    m.rep_weighted = cfg.lambda * m.rep_raw;
    Assignment z = make_assignment(ds, labels, k);
    m.kmeans = kmeans_term(ds, z);
    m.loss = loss_fn(ds, labels, k, tables, cfg);
    return m;
}

}  // namespace

MpcModel run_single(const Dataset& ds, const MpcConfig& cfg, std::uint64_t seed) {
    auto t0 = std::chrono::steady_clock::now();
    AltMinResult am = alternating_minimization(ds, cfg, seed);
    DescentResult cd = coordinate_descent(ds, am, cfg);

    MpcModel model;
    model.config = cfg;
    model.n = ds.n();
    model.d = ds.d();
    model.d_explain = ds.explain_d();
    model.labels = cd.assignment.labels;
    model.k = cd.assignment.k;
    model.hyperplanes = cd.hyperplanes;
    model.moves = cd.moves;
    model.loss_trace = cd.trace;
    model.altmin_trace = am.trace;
    model.metrics = compute_metrics(ds, cfg, model.labels, model.k, cd.tables);
    model.metrics.altmin_iters = am.outer_iters;
    model.metrics.moves_applied = static_cast<int>(cd.moves.size());
    model.metrics.seed_used = seed;
    model.metrics.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return model;
}

MpcModel run_mpc(const Dataset& ds, MpcConfig cfg) {
    cfg = resolve(cfg, ds);
    auto t0 = std::chrono::steady_clock::now();
    std::vector<MpcModel> results(cfg.restarts);
    if (cfg.workers <= 1 || cfg.restarts == 1) {
        for (int r = 0; r < cfg.restarts; ++r)
            results[r] = run_single(ds, cfg, cfg.seed + r);
    } else {
        int nw = std::min(cfg.workers, cfg.restarts);
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errs(nw);
        for (int w = 0; w < nw; ++w) {
            pool.emplace_back([&, w] {
                try {
                    for (int r = w; r < cfg.restarts; r += nw)
                        results[r] = run_single(ds, cfg, cfg.seed + r);
                } catch (...) {
                    errs[w] = std::current_exception();
                }
            });
        }
        for (auto& th : pool) th.join();
        for (auto& e : errs)
            if (e) std::rethrow_exception(e);
    }
    int best = 0;
    for (int r = 1; r < cfg.restarts; ++r)
        if (results[r].metrics.silhouette > results[best].metrics.silhouette) best = r;
    MpcModel model = std::move(results[best]);
    model.metrics.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return model;
}

SweepResult sweep_mpc(const Dataset& ds, MpcConfig base, int k_lo, int k_hi) {
    if (k_lo < 2 || k_hi < k_lo) throw ConfigError("sweep: need 2 <= lo <= hi");
    SweepResult sweep;
    for (int k = k_lo; k <= k_hi; ++k) {
        MpcConfig cfg = base;
        cfg.k = k;
        cfg.k_max = std::max(base.k_max, k);
        sweep.per_k.push_back(run_mpc(ds, cfg));
    }
    for (size_t i = 1; i < sweep.per_k.size(); ++i)
        if (sweep.per_k[i].metrics.silhouette >
            sweep.per_k[sweep.best_index].metrics.silhouette)
            sweep.best_index = static_cast<int>(i);
    return sweep;
}

Metrics evaluate_model(const MpcModel& model, const Dataset& ds) {
    if (model.n != ds.n())
        throw ConfigError("evaluate_model: dataset has " + std::to_string(ds.n()) +
                          " rows, model was trained on " + std::to_string(model.n));
    if (model.d_explain != ds.explain_d())
        throw ConfigError("evaluate_model: explanation view dimension mismatch");
    RepTable tables = tables_from(model.hyperplanes, ds);
    Metrics m = compute_metrics(ds, model.config, model.labels, model.k, tables);
    m.altmin_iters = model.metrics.altmin_iters;
    m.moves_applied = model.metrics.moves_applied;
    m.seed_used = model.metrics.seed_used;
    return m;
}

std::string model_to_json(const MpcModel& model, const Dataset* ds) {
    ordered_json j;
    j["format"] = "polyclust-model";
    j["version"] = 1;
    ordered_json cfg;
    cfg["k"] = model.config.k;
    cfg["k_max"] = model.config.k_max;
    cfg["lambda"] = model.config.lambda;
    cfg["m"] = model.config.m;
    cfg["beta"] = model.config.beta;
    cfg["epsilon"] = model.config.epsilon;
    cfg["n_min"] = model.config.n_min;
    cfg["n_max"] = model.config.n_max;
    cfg["restarts"] = model.config.restarts;
    cfg["seed"] = model.config.seed;
    cfg["cd_objective"] = to_string(model.config.cd_objective);
    cfg["preset"] = model.config.preset;
    j["config"] = cfg;
    ordered_json data;
    data["n"] = model.n;
    data["d"] = model.d;
    data["d_explain"] = model.d_explain;
    j["data"] = data;
    j["k"] = model.k;
    j["labels"] = model.labels;
    ordered_json planes = ordered_json::array();
    for (const auto& [key, h] : model.hyperplanes) {
        ordered_json p;
        p["i"] = h.i;
        p["j"] = h.j;
        p["w"] = h.w;
        p["b"] = h.b;
        p["epsilon"] = h.epsilon;
        planes.push_back(p);
    }
    j["hyperplanes"] = planes;
    ordered_json met;
    met["silhouette"] = model.metrics.silhouette;
    met["loss"] = model.metrics.loss;
    met["kmeans"] = model.metrics.kmeans;
    met["rep_weighted"] = model.metrics.rep_weighted;
    met["rep_raw"] = model.metrics.rep_raw;
    met["k_final"] = model.metrics.k_final;
    met["altmin_iters"] = model.metrics.altmin_iters;
    met["moves_applied"] = model.metrics.moves_applied;
    met["seed_used"] = model.metrics.seed_used;
    j["metrics"] = met;
    ordered_json am = ordered_json::array();
    for (const auto& o : model.altmin_trace) {
        ordered_json e;
        e["kmeans"] = o.kmeans;
        e["rep"] = o.rep;
        e["total"] = o.total();
        am.push_back(e);
    }
    j["altmin_trace"] = am;
    j["loss_trace"] = model.loss_trace;
    if (ds != nullptr) {
        ordered_json exps = ordered_json::array();
        for (int c = 0; c < model.k; ++c) {
            Explanation ex = build_explanation(*ds, model.hyperplanes, model.k, c);
            ordered_json e;
            e["cluster"] = ex.cluster;
            e["style"] = style_name(ex.style);
            e["units"] = ex.units;
            e["text"] = ex.text;
            ordered_json clauses = ordered_json::array();
            for (const Clause& cl : ex.clauses) {
                ordered_json c2;
                c2["text"] = cl.text;
                c2["w"] = cl.w;
                c2["b"] = cl.b;
                c2["epsilon"] = cl.epsilon;
                c2["on_ge"] = cl.on_ge;
                c2["comparator"] = cl.comparator;
                c2["threshold"] = cl.threshold;
                c2["other"] = cl.other;
                c2["units"] = cl.units;
                clauses.push_back(c2);
            }
            e["clauses"] = clauses;
            exps.push_back(e);
        }
        j["explanations"] = exps;
    }
    return dump_stable(j);
}

void export_model(const MpcModel& model, const Dataset& ds, const std::string& dir,
                  bool write_moves) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir + "/model.json", std::ios::binary);
        if (!out) throw ConfigError("cannot write " + dir + "/model.json");
        out << model_to_json(model, &ds);
    }
    {
        std::ofstream out(dir + "/assignments.csv", std::ios::binary);
        if (!out) throw ConfigError("cannot write " + dir + "/assignments.csv");
        out << "row,cluster\n";
        for (size_t t = 0; t < model.labels.size(); ++t)
            out << t << "," << model.labels[t] << "\n";
    }
    if (write_moves) {
        std::ofstream out(dir + "/moves.jsonl", std::ios::binary);
        if (!out) throw ConfigError("cannot write " + dir + "/moves.jsonl");
        for (const MoveRecord& mv : model.moves) {
            ordered_json e;
            e["kind"] = to_string(mv.kind);
            e["a"] = mv.a;
            e["b"] = mv.b;
            e["delta"] = mv.delta;
            e["loss_after"] = mv.loss_after;
            e["k_after"] = mv.k_after;
            out << dump_stable(e);
        }
    }
}

MpcModel import_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open model file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError("malformed model JSON in " + path + ": " + e.what());
    }
    if (j.value("format", "") != "polyclust-model")
        throw ConfigError(path + " is not a model document");

    MpcModel model;
    const auto& cfg = j.at("config");
    model.config.k = cfg.at("k");
    model.config.k_max = cfg.at("k_max");
    model.config.lambda = cfg.at("lambda");
    model.config.m = cfg.at("m");
    model.config.beta = cfg.at("beta");
    model.config.epsilon = cfg.at("epsilon");
    model.config.epsilon_auto = false;
    model.config.n_min = cfg.at("n_min");
    model.config.n_max = cfg.at("n_max");
    model.config.restarts = cfg.at("restarts");
    model.config.seed = cfg.at("seed");
    model.config.cd_objective = cd_objective_from_string(cfg.at("cd_objective"));
    model.config.preset = cfg.at("preset");
    const auto& data = j.at("data");
    model.n = data.at("n");
    model.d = data.at("d");
    model.d_explain = data.at("d_explain");
    model.k = j.at("k");
    model.labels = j.at("labels").get<std::vector<int>>();
    for (const auto& p : j.at("hyperplanes")) {
        Hyperplane h;
        h.i = p.at("i");
        h.j = p.at("j");
        h.w = p.at("w").get<std::vector<int>>();
        h.b = p.at("b");
        h.epsilon = p.at("epsilon");
        model.hyperplanes[{h.i, h.j}] = std::move(h);
    }
    const auto& met = j.at("metrics");
    model.metrics.silhouette = met.at("silhouette");
    model.metrics.loss = met.at("loss");
    model.metrics.kmeans = met.at("kmeans");
    model.metrics.rep_weighted = met.at("rep_weighted");
    model.metrics.rep_raw = met.at("rep_raw");
    model.metrics.k_final = met.at("k_final");
    model.metrics.altmin_iters = met.at("altmin_iters");
    model.metrics.moves_applied = met.at("moves_applied");
    model.metrics.seed_used = met.at("seed_used");
    for (const auto& e : j.value("altmin_trace", nlohmann::json::array())) {
        KmRepObjective o;
        o.kmeans = e.at("kmeans");
        o.rep = e.at("rep");
        model.altmin_trace.push_back(o);
    }
    if (j.contains("loss_trace"))
        model.loss_trace = j.at("loss_trace").get<std::vector<double>>();
    return model;
}

std::string sweep_to_csv(const SweepResult& sweep) {
    std::string out = "k,seed,silhouette,loss,k_final,moves,wall_seconds\n";
    for (const MpcModel& m : sweep.per_k) {
        out += std::to_string(m.config.k) + "," + std::to_string(m.metrics.seed_used) +
               "," + format_double(m.metrics.silhouette) + "," +
               format_double(m.metrics.loss) + "," + std::to_string(m.metrics.k_final) +
               "," + std::to_string(m.metrics.moves_applied) + "," +
               format_double(m.metrics.wall_seconds) + "\n";
    }
    return out;
}

}  // namespace polyclust
