#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "polyclust/runner.hpp"
#include "polyclust/synth.hpp"
#include "support/oracles.hpp"

using namespace polyclust;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    REQUIRE(f.good());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string fresh_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(dir);
    return dir.string();
}

}  // namespace

TEST_CASE("run_mpc recovers separable blobs and fills the metrics") {
    SynthData blobs = make_blobs(50, 2, 2, 10.0, 12);
    Dataset ds = Dataset::from_matrix(blobs.points);
    MpcConfig cfg;
    cfg.k = 2;
    cfg.k_max = 2;
    MpcModel model = run_mpc(ds, cfg);
    CHECK(model.k == 2);
    CHECK(model.metrics.k_final == 2);
    CHECK(oracles::adjusted_rand_index(model.labels, blobs.truth) == doctest::Approx(1.0));
    CHECK(model.metrics.rep_raw == doctest::Approx(0.0));
    CHECK(model.metrics.silhouette ==
          doctest::Approx(silhouette(ds, model.labels, 2).mean));
    CHECK(model.metrics.loss == doctest::Approx(-model.metrics.silhouette));
    CHECK(model.hyperplanes.size() == 1);
}

TEST_CASE("more restarts can only improve the kept silhouette") {
    Rng rng(91);
    Matrix pts = oracles::random_points(rng, 40, 2);
    Dataset ds = Dataset::from_matrix(pts);
    MpcConfig cfg;
    cfg.k = 3;
    cfg.restarts = 1;
    MpcModel one = run_mpc(ds, cfg);
    cfg.restarts = 6;
    MpcModel six = run_mpc(ds, cfg);
    CHECK(six.metrics.silhouette >= one.metrics.silhouette - 1e-12);
}

TEST_CASE("restart reduction is independent of worker count") {
    Rng rng(95);
    Matrix pts = oracles::random_points(rng, 36, 2);
    Dataset ds = Dataset::from_matrix(pts);
    MpcConfig cfg;
    cfg.k = 3;
    cfg.restarts = 5;
    cfg.workers = 1;
    MpcModel serial = run_mpc(ds, cfg);
    cfg.workers = 4;
    MpcModel parallel = run_mpc(ds, cfg);
    CHECK(serial.labels == parallel.labels);
    CHECK(serial.metrics.silhouette == parallel.metrics.silhouette);
    CHECK(serial.metrics.seed_used == parallel.metrics.seed_used);
}

TEST_CASE("sweep picks the true cluster count on 3 blobs") {
    SynthData blobs = make_blobs(60, 2, 3, 10.0, 25);
    Dataset ds = Dataset::from_matrix(blobs.points);
    MpcConfig cfg;
    cfg.k_max = 5;  // keep splits from outrunning the swept k
    SweepResult sweep = sweep_mpc(ds, cfg, 2, 5);
    REQUIRE(sweep.per_k.size() == 4);
    const MpcModel& best = sweep.per_k[sweep.best_index];
    CHECK(best.metrics.k_final == 3);
    CHECK(oracles::adjusted_rand_index(best.labels, blobs.truth) == doctest::Approx(1.0));

    std::string csv = sweep_to_csv(sweep);
    int lines = 0;
    for (char ch : csv) lines += ch == '\n';
    CHECK(lines == 5);  // header + one row per swept k

    SweepResult single = sweep_mpc(ds, cfg, 3, 3);
    MpcConfig run_cfg = cfg;
    run_cfg.k = 3;
    MpcModel direct = run_mpc(ds, run_cfg);
    CHECK(single.per_k[0].labels == direct.labels);
    CHECK(single.per_k[0].metrics.silhouette == direct.metrics.silhouette);
}

TEST_CASE("export round-trips through import with identical evaluation") {
    SynthData blobs = make_blobs(45, 3, 3, 8.0, 71);
    Dataset ds = Dataset::from_matrix(blobs.points);
    MpcConfig cfg;
    cfg.k = 3;
    cfg.lambda = 0.8;
    MpcModel model = run_mpc(ds, cfg);
    std::string dir = fresh_dir("runner_roundtrip");
    export_model(model, ds, dir, true);

    MpcModel back = import_model(dir + "/model.json");
    CHECK(back.labels == model.labels);
    CHECK(back.k == model.k);
    CHECK(back.metrics.seed_used == model.metrics.seed_used);
    CHECK(back.config.lambda == model.config.lambda);
    REQUIRE(back.hyperplanes.size() == model.hyperplanes.size());
    for (const auto& [key, h] : model.hyperplanes) {
        REQUIRE(back.hyperplanes.count(key) == 1);
        CHECK(back.hyperplanes.at(key).w == h.w);
        CHECK(back.hyperplanes.at(key).b == h.b);          // bit-exact via digits
        CHECK(back.hyperplanes.at(key).epsilon == h.epsilon);
    }
    Metrics re = evaluate_model(back, ds);
    CHECK(re.silhouette == doctest::Approx(model.metrics.silhouette).epsilon(1e-12));
    CHECK(re.loss == doctest::Approx(model.metrics.loss).epsilon(1e-12));

    // labels file has one line per point plus the header
    std::string labels_csv = slurp(dir + "/assignments.csv");
    int lines = 0;
    for (char ch : labels_csv) lines += ch == '\n';
    CHECK(lines == ds.n() + 1);
    CHECK(std::filesystem::exists(dir + "/moves.jsonl"));
}

TEST_CASE("identical runs serialize to identical bytes") {
    SynthData blobs = make_blobs(40, 2, 2, 9.0, 5);
    Dataset ds = Dataset::from_matrix(blobs.points);
    MpcConfig cfg;
    cfg.k = 2;
    MpcModel a = run_mpc(ds, cfg);
    MpcModel b = run_mpc(ds, cfg);
    // wall-clock differs run to run; the document must not depend on it
    std::string ja = model_to_json(a, &ds);
    std::string jb = model_to_json(b, &ds);
    CHECK(ja == jb);

    std::string da = fresh_dir("runner_stable_a");
    std::string db = fresh_dir("runner_stable_b");
    export_model(a, ds, da, false);
    export_model(b, ds, db, false);
    CHECK(slurp(da + "/model.json") == slurp(db + "/model.json"));
    CHECK(slurp(da + "/assignments.csv") == slurp(db + "/assignments.csv"));
}

TEST_CASE("import rejects files that are not model documents") {
    std::string dir = fresh_dir("runner_badimport");
    std::filesystem::create_directories(dir);
    std::ofstream f(dir + "/model.json", std::ios::binary);
    f << "{\"format\":\"something-else\"}";
    f.close();
    CHECK_THROWS_AS(import_model(dir + "/model.json"), ConfigError);
    CHECK_THROWS_AS(import_model(dir + "/missing.json"), ConfigError);
}

TEST_CASE("model json quotes every hyperplane with its pair") {
    SynthData blobs = make_blobs(30, 2, 3, 9.0, 41);
    Dataset ds = Dataset::from_matrix(blobs.points);
    MpcConfig cfg;
    cfg.k = 3;
    MpcModel model = run_mpc(ds, cfg);
    std::string doc = model_to_json(model, &ds);
    CHECK(doc.find("\"format\":\"polyclust-model\"") != std::string::npos);
    CHECK(doc.find("\"hyperplanes\":[") != std::string::npos);
    CHECK(doc.find("\"explanations\":[") != std::string::npos);
    CHECK(doc.find("\"i\":0") != std::string::npos);
    CHECK(doc.find("\"epsilon\":") != std::string::npos);
    // no wall clock inside the stable document
    CHECK(doc.find("wall_seconds") == std::string::npos);
}
