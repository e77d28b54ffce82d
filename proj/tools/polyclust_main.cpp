#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "polyclust/dataset.hpp"
#include "polyclust/hyperplane_solver.hpp"
#include "polyclust/runner.hpp"
#include "polyclust/synth.hpp"

namespace {

using namespace polyclust;

struct CommonOpts {
    std::string data;
    std::string schema;
    std::string out;
    std::string epsilon = "auto";
    std::string cd_objective = "silhouette";
    std::string preset;
    MpcConfig cfg;
    bool trace = false;
};

void add_model_options(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--data", o.data, "input CSV with a header row")->required();
    cmd->add_option("--schema", o.schema, "column kind overrides (name: kind per line)");
    cmd->add_option("--k", o.cfg.k, "initial cluster count");
    cmd->add_option("--k-max", o.cfg.k_max, "cluster count ceiling for splits");
    cmd->add_option("--lambda", o.cfg.lambda, "representation error weight");
    cmd->add_option("--m", o.cfg.m, "max hyperplane coefficient magnitude");
    cmd->add_option("--beta", o.cfg.beta, "max nonzero hyperplane coefficients");
    cmd->add_option("--epsilon", o.epsilon, "separation margin, or 'auto'");
    cmd->add_option("--n-min", o.cfg.n_min, "minimum cluster size");
    cmd->add_option("--n-max", o.cfg.n_max, "maximum cluster size (0 = no cap)");
    cmd->add_option("--restarts", o.cfg.restarts, "independent seeded restarts");
    cmd->add_option("--seed", o.cfg.seed, "base RNG seed");
    cmd->add_option("--cd-objective", o.cd_objective,
                    "descent objective: silhouette|kmeans");
    cmd->add_option("--preset", o.preset, "mpc1 (M=1,beta=1) or mpc2 (M=3,beta=2)");
    cmd->add_option("--workers", o.cfg.workers, "restart threads");
    cmd->add_option("--out", o.out, "output directory")->required();
    cmd->add_flag("--trace", o.trace, "also write moves.jsonl");
}

MpcConfig finish_config(CommonOpts& o) {
    o.cfg.cd_objective = cd_objective_from_string(o.cd_objective);
    o.cfg.preset = o.preset;
    if (o.epsilon == "auto") {
        o.cfg.epsilon_auto = true;
    } else {
        o.cfg.epsilon_auto = false;
        try {
            size_t used = 0;
            o.cfg.epsilon = std::stod(o.epsilon, &used);
            if (used != o.epsilon.size()) throw std::invalid_argument(o.epsilon);
        } catch (const std::exception&) {
            throw ConfigError("--epsilon must be a number or 'auto', got '" + o.epsilon +
                              "'");
        }
    }
    return o.cfg;
}

Dataset load_with_warnings(const std::string& data, const std::string& schema) {
    Dataset ds = Dataset::load_csv(data, schema);
    for (const std::string& w : ds.warnings()) std::cerr << "warning: " << w << "\n";
    return ds;
}

void print_summary(const MpcModel& m, const std::string& out) {
    std::printf("k=%d silhouette=%.6f loss=%.6f rep_raw=%.6g moves=%d wall=%.2fs\n",
                m.metrics.k_final, m.metrics.silhouette, m.metrics.loss,
                m.metrics.rep_raw, m.metrics.moves_applied, m.metrics.wall_seconds);
    std::printf("model: %s/model.json\n", out.c_str());
}

Matrix read_numeric_csv(const std::string& path) {
    Dataset ds = Dataset::load_csv(path);
    // load_csv rescales; re-read the raw values through the recorded ranges
    Matrix raw(ds.n(), ds.d());
    for (int t = 0; t < ds.n(); ++t) {
        for (int c = 0; c < ds.d(); ++c) {
            const ColumnInfo& info = ds.columns()[c];
            double v = ds.points()(t, c);
            raw(t, c) = info.has_range
                            ? info.raw_min + v * (info.raw_max - info.raw_min)
                            : v;
        }
    }
    return raw;
}

int dispatch(CLI::App& app, const CLI::App* run_cmd, const CLI::App* sweep_cmd,
             const CLI::App* sep_cmd, const CLI::App* synth_cmd, CommonOpts& o,
             std::string& k_range, std::string& left, std::string& right, int& blobs,
             int& n, int& dims, double& sep, double& offset, double& noise,
             std::string& mode, std::uint64_t& seed, std::string& out_file,
             std::string& truth_file) {
    if (app.got_subcommand(run_cmd)) {
        MpcConfig cfg = finish_config(o);
        Dataset ds = load_with_warnings(o.data, o.schema);
        MpcModel model = run_mpc(ds, cfg);
        export_model(model, ds, o.out, o.trace);
        print_summary(model, o.out);
        return 0;
    }
    if (app.got_subcommand(sweep_cmd)) {
        size_t dots = k_range.find("..");
        if (dots == std::string::npos)
            throw ConfigError("--k-range must look like LO..HI, got '" + k_range + "'");
        int lo = 0, hi = 0;
        try {
            lo = std::stoi(k_range.substr(0, dots));
            hi = std::stoi(k_range.substr(dots + 2));
        } catch (const std::exception&) {
            throw ConfigError("--k-range must look like LO..HI, got '" + k_range + "'");
        }
        MpcConfig cfg = finish_config(o);
        Dataset ds = load_with_warnings(o.data, o.schema);
        SweepResult sweep = sweep_mpc(ds, cfg, lo, hi);
        std::filesystem::create_directories(o.out);
        {
            std::ofstream f(o.out + "/sweep.csv", std::ios::binary);
            if (!f) throw ConfigError("cannot write " + o.out + "/sweep.csv");
            f << sweep_to_csv(sweep);
        }
        const MpcModel& best = sweep.per_k[sweep.best_index];
        export_model(best, ds, o.out, o.trace);
        std::printf("best k=%d (started at k=%d)\n", best.metrics.k_final, best.config.k);
        print_summary(best, o.out);
        return 0;
    }
    if (app.got_subcommand(sep_cmd)) {
        Matrix lm = read_numeric_csv(left);
        Matrix rm = read_numeric_csv(right);
        SeparationProblem prob;
        prob.left = lm;
        prob.right = rm;
        prob.M = o.cfg.m;
        prob.beta = std::min(o.cfg.beta, lm.cols());
        if (o.epsilon == "auto") {
            Matrix all(lm.rows() + rm.rows(), lm.cols());
            for (int t = 0; t < lm.rows(); ++t)
                for (int c = 0; c < lm.cols(); ++c) all(t, c) = lm(t, c);
            for (int t = 0; t < rm.rows(); ++t)
                for (int c = 0; c < rm.cols(); ++c) all(lm.rows() + t, c) = rm(t, c);
            prob.epsilon = default_epsilon(Dataset::from_matrix(all), prob.M, prob.beta);
        } else {
            prob.epsilon = std::stod(o.epsilon);
        }
        SeparationResult res = solve_separation(prob, o.cfg.slope_budget);
        std::string w;
        for (size_t c = 0; c < res.hyperplane.w.size(); ++c) {
            if (c) w += ",";
            w += std::to_string(res.hyperplane.w[c]);
        }
        std::printf("{\"w\":[%s],\"b\":%s,\"epsilon\":%s,\"objective\":%s,\"perfect\":%s,"
                    "\"slopes_tried\":%lld}\n",
                    w.c_str(), format_double(res.hyperplane.b).c_str(),
                    format_double(res.hyperplane.epsilon).c_str(),
                    format_double(res.objective).c_str(),
                    res.perfect ? "true" : "false", res.slopes_tried);
        return 0;
    }
    if (app.got_subcommand(synth_cmd)) {
        SynthData data;
        if (mode == "blobs") {
            data = make_blobs(n, dims, blobs, sep, seed);
        } else if (mode == "xor") {
            data = make_xor_diagonal(n, offset, noise, seed);
        } else {
            throw ConfigError("--mode must be blobs or xor, got '" + mode + "'");
        }
        write_points_csv(data.points, out_file);
        if (!truth_file.empty()) {
            std::ofstream f(truth_file, std::ios::binary);
            if (!f) throw ConfigError("cannot write " + truth_file);
            f << "row,cluster\n";
            for (size_t t = 0; t < data.truth.size(); ++t)
                f << t << "," << data.truth[t] << "\n";
        }
        std::printf("wrote %d points to %s\n", data.points.rows(), out_file.c_str());
        return 0;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-polytope clustering"};
    app.require_subcommand(1);

    CommonOpts o;
    std::string k_range = "2..10";
    std::string left, right, mode = "blobs", out_file, truth_file;
    int blobs = 3, n = 300, dims = 2;
    double sep = 10.0, offset = 0.25, noise = 0.05;
    std::uint64_t seed = 42;

    CLI::App* run_cmd = app.add_subcommand("run", "fit one clustering");
    add_model_options(run_cmd, o);

    CLI::App* sweep_cmd = app.add_subcommand("sweep", "fit across a range of k");
    add_model_options(sweep_cmd, o);
    sweep_cmd->add_option("--k-range", k_range, "LO..HI inclusive")->required();

    CLI::App* sep_cmd =
        app.add_subcommand("separate", "best interpretable separator of two point sets");
    sep_cmd->add_option("--left", left, "CSV of points for the >= side")->required();
    sep_cmd->add_option("--right", right, "CSV of points for the < side")->required();
    sep_cmd->add_option("--m", o.cfg.m, "max coefficient magnitude");
    sep_cmd->add_option("--beta", o.cfg.beta, "max nonzero coefficients");
    sep_cmd->add_option("--epsilon", o.epsilon, "separation margin, or 'auto'");

    CLI::App* synth_cmd = app.add_subcommand("synth", "generate synthetic data");
    synth_cmd->add_option("--mode", mode, "blobs|xor");
    synth_cmd->add_option("--blobs", blobs, "cluster count (blobs mode)");
    synth_cmd->add_option("--n", n, "number of points");
    synth_cmd->add_option("--dims", dims, "dimensions (blobs mode)");
    synth_cmd->add_option("--sep", sep, "min center separation (blobs mode)");
    synth_cmd->add_option("--offset", offset, "band offset (xor mode)");
    synth_cmd->add_option("--noise", noise, "jitter half-width (xor mode)");
    synth_cmd->add_option("--seed", seed, "RNG seed");
    synth_cmd->add_option("--out", out_file, "output CSV path")->required();
    synth_cmd->add_option("--truth", truth_file, "also write ground-truth labels here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        return dispatch(app, run_cmd, sweep_cmd, sep_cmd, synth_cmd, o, k_range, left,
                        right, blobs, n, dims, sep, offset, noise, mode, seed, out_file,
                        truth_file);
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
