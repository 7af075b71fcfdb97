#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "cli.hpp"
#include "sepscope/output.hpp"

using namespace sepscope;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch_dir(const char* name) {
    const auto dir = fs::temp_directory_path() / ("sepscope_test_cli_" + std::string(name));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("usage errors exit with 1") {
    CHECK(run({}).code == 1);
    CHECK(run({"frobnicate"}).code == 1);
    CHECK(run({"radial", "--no-such-flag"}).code == 1);
    CHECK(run({"radial", "--field", "qubit", "--grid", "0"}).code == 1);
    CHECK(run({"radial", "--samples", "0"}).code == 1);
    CHECK(run({"radial", "--field", "qutrit"}).code == 1);
    CHECK(run({"radial", "--resume"}).code == 1);
    CHECK(run({"viz-qubit", "--bins", "6"}).code == 1);
    CHECK(run({"viz-rebit", "--disk-radius", "1.0"}).code == 1);
    CHECK(run({"fit", "--model", "cosine"}).code == 1);
    CHECK(run({"fit", "--model", "spline", "--input", "a.csv"}).code == 1);
    const auto r = run({"radial", "--workers", "0"});
    CHECK(r.code == 1);
    CHECK(r.err.find("usage error") != std::string::npos);
}

TEST_CASE("help and version exit with 0") {
    CHECK(run({"--help"}).code == 0);
    const auto v = run({"--version"});
    CHECK(v.code == 0);
    CHECK_FALSE(v.out.empty());
}

TEST_CASE("bloore-check passes and writes a valid summary") {
    const auto dir = scratch_dir("bloore");
    const auto r = run({"bloore-check", "--out", (dir / "b.json").string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("PASS") != std::string::npos);
    const Json j = Json::parse(read_text_file(dir / "b.json"));
    CHECK(validate_summary(j).empty());
    CHECK(j["pass"] == true);
    fs::remove_all(dir);
}

TEST_CASE("radial run writes CSV, JSON, SVG and run info; output is worker-independent") {
    const auto dir = scratch_dir("radial");
    const std::vector<std::string> base{"radial", "--field", "rebit", "--sampler", "qmc", "--samples", "5000",
                                        "--grid", "21", "--seed", "3"};
    auto one = base, three = base;
    one.insert(one.end(), {"--workers", "1", "--out", (dir / "one.csv").string()});
    three.insert(three.end(), {"--workers", "3", "--out", (dir / "three.csv").string()});
    REQUIRE(run(one).code == 0);
    REQUIRE(run(three).code == 0);
    for (const char* ext : {".csv", ".json", ".svg"}) {
        const auto a = read_text_file(sibling_path(dir / "one.csv", ext));
        const auto b = read_text_file(sibling_path(dir / "three.csv", ext));
        CHECK(a == b);
    }
    CHECK(fs::exists(dir / "one.run.json"));
    const Json j = Json::parse(read_text_file(dir / "one.json"));
    CHECK(validate_summary(j).empty());
    CHECK(j["n_samples"] == 5000);
    CHECK(j["angles"] == "jacobian");
    const double p = j["probability"].get<double>();
    CHECK(p > 0.3);
    CHECK(p < 0.6);
    const auto prof = parse_profile_csv(read_text_file(dir / "one.csv"), Axis::Radial, Field::Rebit);
    CHECK(prof.grid.size() == 21);
    CHECK(prof.value.front() >= prof.value.back());
    fs::remove_all(dir);
}

TEST_CASE("checkpointed and resumed runs give the same output as a direct run") {
    const auto dir = scratch_dir("checkpoint");
    const std::vector<std::string> base{"azimuthal", "--samples", "70000", "--grid", "11", "--workers", "1"};
    auto direct = base, ck = base, resumed = base;
    direct.insert(direct.end(), {"--out", (dir / "direct.csv").string()});
    ck.insert(ck.end(), {"--out", (dir / "ck.csv").string(), "--checkpoint", (dir / "state.bin").string()});
    REQUIRE(run(direct).code == 0);
    REQUIRE(run(ck).code == 0);
    CHECK(read_text_file(dir / "direct.csv") == read_text_file(dir / "ck.csv"));
    resumed.insert(resumed.end(), {"--out", (dir / "resumed.csv").string(), "--checkpoint",
                                   (dir / "state.bin").string(), "--resume"});
    REQUIRE(run(resumed).code == 0);
    CHECK(read_text_file(dir / "direct.csv") == read_text_file(dir / "resumed.csv"));

    auto mismatch = resumed;
    mismatch.insert(mismatch.end(), {"--seed", "5"});
    CHECK(run(mismatch).code == 1);
    fs::remove_all(dir);
}

TEST_CASE("config file values apply and flags take precedence") {
    const auto dir = scratch_dir("config");
    write_text_file(dir / "run.cfg", "# desk run\nfield=rebit\nsamples=2000\ngrid=11\nseed=9\nangles=uniform\n");
    const auto r = run({"radial", "--config", (dir / "run.cfg").string(), "--seed", "4", "--out",
                        (dir / "p.csv").string()});
    REQUIRE(r.code == 0);
    const Json j = Json::parse(read_text_file(dir / "p.json"));
    CHECK(j["seed"] == 4);
    CHECK(j["n_samples"] == 2000);
    CHECK(j["grid_points"] == 11);
    CHECK(j["angles"] == "uniform");
    write_text_file(dir / "bad.cfg", "colour=blue\n");
    CHECK(run({"radial", "--config", (dir / "bad.cfg").string()}).code == 1);
    fs::remove_all(dir);
}

TEST_CASE("fit reads saved profiles; missing files exit with 2") {
    const auto dir = scratch_dir("fit");
    REQUIRE(run({"radial", "--samples", "5000", "--grid", "21", "--out", (dir / "rebit.csv").string()}).code == 0);
    const auto r = run({"fit", "--model", "beta-tail", "--input", (dir / "rebit.csv").string(), "--out",
                        (dir / "fit.json").string()});
    CHECK(r.code == 0);
    const Json j = Json::parse(read_text_file(dir / "fit.json"));
    CHECK(validate_summary(j).empty());
    CHECK(j["model"] == "beta_tail");
    CHECK(j["params"][0].get<double>() > 0.0);
    CHECK(run({"fit", "--model", "beta-tail", "--input", (dir / "missing.csv").string()}).code == 2);
    fs::remove_all(dir);
}

TEST_CASE("volume-check prints a valid summary") {
    const auto r = run({"volume-check", "--field", "rebit", "--samples", "20000", "--workers", "1"});
    REQUIRE(r.code == 0);
    const Json j = Json::parse(r.out);
    CHECK(validate_summary(j).empty());
    CHECK(j["relative_error"].get<double>() < 0.01);
}

TEST_CASE("paper scale warns and respects explicit flags") {
    const auto dir = scratch_dir("paper");
    const auto r = run({"viz-qubit", "--paper-scale", "--samples", "200", "--workers", "1", "--out",
                        (dir / "q.csv").string()});
    CHECK(r.code == 0);
    CHECK(r.err.find("warning") != std::string::npos);
    const Json j = Json::parse(read_text_file(dir / "q.json"));
    CHECK(validate_summary(j).empty());
    fs::remove_all(dir);
}

TEST_CASE("SEPSCOPE_WORKERS must be a positive integer") {
    setenv("SEPSCOPE_WORKERS", "zero", 1);
    CHECK(run({"bloore-check"}).code == 1);
    unsetenv("SEPSCOPE_WORKERS");
}
