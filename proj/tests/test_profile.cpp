#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "sepscope/profile.hpp"
#include "sepscope/state.hpp"

using namespace sepscope;

namespace {

std::filesystem::path temp_path(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "sepscope_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::vector<unsigned char> read_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& p, const std::vector<unsigned char>& b) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
    return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

const auto always = [](const AngularSample&, double) { return true; };

}  // namespace

TEST_CASE("all-separable indicator: F = m+1 radially, 1 azimuthally, probability 1") {
    for (Field f : {Field::Rebit, Field::Qubit}) {
        for (AngularDensity d : {AngularDensity::Uniform, AngularDensity::Jacobian}) {
            const SamplerConfig cfg{f, SamplerKind::QuasiMonteCarlo, 3, 4096, 1, d};
            const auto rad = radial_profile(cfg, 101, always);
            for (double v : rad.value) CHECK(v == doctest::Approx(radial_exponent(f) + 1).epsilon(1e-14));
            CHECK(integrate_profile(rad).p == doctest::Approx(1.0).epsilon(1e-6));
            const auto az = azimuthal_profile(cfg, 101, always);
            for (double v : az.value) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
            CHECK(integrate_profile(az).p == doctest::Approx(1.0).epsilon(1e-6));
        }
    }
}

TEST_CASE("step indicator 1(r <= 1/2) integrates to (1/2)^(m+1)") {
    const SamplerConfig cfg{Field::Rebit, SamplerKind::MonteCarlo, 3, 1024, 1};
    const auto p = radial_profile(cfg, 1001, [](const AngularSample&, double r) { return r <= 0.5; });
    // The quadratic interpolant smears the step over one panel pair of width 0.002.
    CHECK(integrate_profile(p).p == doctest::Approx(std::pow(0.5, 18)).epsilon(5e-3));
}

TEST_CASE("integrate_profile: monomial and constant profiles") {
    ProfileEstimate p;
    p.axis = Axis::Radial;
    p.field = Field::Rebit;
    p.grid = uniform_grid(101);
    p.value = p.grid;
    p.stderr_.assign(101, 0.0);
    CHECK(integrate_profile(p).p == doctest::Approx(1.0 / 19).epsilon(1e-6));
    p.value.assign(101, 18.0);
    CHECK(integrate_profile(p).p == doctest::Approx(1.0).epsilon(1e-6));

    p.grid = uniform_grid(100);  // odd panel count: trailing linear panel
    p.value = p.grid;
    p.stderr_.assign(100, 0.0);
    CHECK(integrate_profile(p).p == doctest::Approx(1.0 / 19).epsilon(1e-4));
}

TEST_CASE("quadrature weights: Simpson at m = 0 and exact moments") {
    const auto g = uniform_grid(5);
    const auto w = quadrature_weights(g, 0);
    const double h = 0.25;
    const double simpson[5] = {h / 3, 4 * h / 3, 2 * h / 3, 4 * h / 3, h / 3};
    for (int i = 0; i < 5; ++i) CHECK(w[i] == doctest::Approx(simpson[i]).epsilon(1e-14));
    for (int m : {17, 29}) {
        const auto grid = uniform_grid(101);
        const auto wm = quadrature_weights(grid, m);
        double s0 = 0.0, s2 = 0.0;
        for (size_t j = 0; j < grid.size(); ++j) {
            s0 += wm[j];
            s2 += wm[j] * grid[j] * grid[j];
        }
        CHECK(s0 == doctest::Approx(1.0 / (m + 1)).epsilon(1e-13));
        CHECK(s2 == doctest::Approx(1.0 / (m + 3)).epsilon(1e-13));
    }
    const std::vector<double> single{0.0};
    CHECK_THROWS_AS(quadrature_weights(single, 0), std::invalid_argument);
}

TEST_CASE("grid validation") {
    CHECK_THROWS_AS(uniform_grid(1), std::invalid_argument);
    const auto g = uniform_grid(11);
    CHECK(g.front() == 0.0);
    CHECK(g.back() == 1.0);
    for (size_t j = 1; j < g.size(); ++j) CHECK(g[j] - g[j - 1] == doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("zero total weight is an estimation error") {
    const SamplerConfig cfg{Field::Rebit, SamplerKind::MonteCarlo, 3, 10, 1};
    ProfileRun run(Axis::Radial, cfg, 11);
    CHECK_THROWS_AS(run.estimate(), EstimationError);
}

TEST_CASE("rebit radial probability at N = 10^5, grid 101") {
    for (AngularDensity d : {AngularDensity::Uniform, AngularDensity::Jacobian}) {
        const auto prof = radial_profile({Field::Rebit, SamplerKind::MonteCarlo, 42, 100000, 1, d}, 101);
        const auto p = integrate_profile(prof);
        CHECK(p.p >= 0.43);
        CHECK(p.p <= 0.50);
        // The origin is separable and F(0) is a fraction of m+1.
        CHECK(prof.value[0] <= 18.0);
        for (size_t j = 0; j < prof.value.size(); ++j) {
            CHECK(prof.value[j] >= 0.0);
            CHECK(prof.value[j] <= 18.0 + 1e-12);
        }
    }
}

TEST_CASE("rebit azimuthal probability and symmetry about 1/2") {
    const auto prof = azimuthal_profile({Field::Rebit, SamplerKind::MonteCarlo, 42, 100000, 1, AngularDensity::Jacobian}, 101);
    const auto p = integrate_profile(prof);
    CHECK(p.p >= 0.40);
    CHECK(p.p <= 0.47);
    int outside = 0;
    for (size_t j = 0; j < 101; ++j) {
        const double diff = prof.value[j] - prof.value[100 - j];
        const double se = std::hypot(prof.stderr_[j], prof.stderr_[100 - j]);
        if (std::abs(diff) > 3 * se) ++outside;
    }
    CHECK(outside == 0);
}

TEST_CASE("radial and azimuthal runs share the total weight") {
    for (AngularDensity d : {AngularDensity::Uniform, AngularDensity::Jacobian}) {
        const SamplerConfig cfg{Field::Qubit, SamplerKind::QuasiMonteCarlo, 8, 2048, 1, d};
        const auto r = radial_profile(cfg, 11);
        const auto a = azimuthal_profile(cfg, 11);
        CHECK(std::memcmp(&r.total_weight, &a.total_weight, sizeof(double)) == 0);
    }
}

TEST_CASE("doubling the sample count moves the estimate by less than 4 combined errors") {
    const auto a = integrate_profile(radial_profile({Field::Rebit, SamplerKind::MonteCarlo, 5, 20000, 1, AngularDensity::Jacobian}, 101));
    const auto b = integrate_profile(radial_profile({Field::Rebit, SamplerKind::MonteCarlo, 5, 40000, 1, AngularDensity::Jacobian}, 101));
    CHECK(std::abs(a.p - b.p) < 4 * std::hypot(a.stderr_, b.stderr_));
}

TEST_CASE("profiles are bit-identical across worker counts") {
    for (Axis axis : {Axis::Radial, Axis::Azimuthal}) {
        SamplerConfig cfg{Field::Qubit, SamplerKind::MonteCarlo, 13, 5000, 1, AngularDensity::Jacobian};
        ProfileRun one(axis, cfg, 21);
        one.run();
        cfg.workers = 3;
        ProfileRun three(axis, cfg, 21);
        three.run();
        CHECK(bit_equal(one.estimate().value, three.estimate().value));
        CHECK(bit_equal(one.estimate().stderr_, three.estimate().stderr_));
    }
}

TEST_CASE("checkpoint: save at N/2, resume, finish equals a single run") {
    const SamplerConfig cfg{Field::Rebit, SamplerKind::QuasiMonteCarlo, 21, 8192, 2, AngularDensity::Jacobian};
    ProfileRun full(Axis::Radial, cfg, 31);
    full.run();

    ProfileRun half(Axis::Radial, cfg, 31);
    half.advance_to(4096);
    const auto path = temp_path("half.ckpt");
    save_checkpoint(half.checkpoint(), path);
    const auto cp = load_checkpoint(path);
    CHECK(cp.next_index == 4096);
    CHECK(cp.config.angles == AngularDensity::Jacobian);
    auto resumed = ProfileRun::resume(cp, Axis::Radial, cfg, 31);
    resumed.run();
    CHECK(bit_equal(resumed.sums().sum_ws, full.sums().sum_ws));
    CHECK(bit_equal(resumed.estimate().value, full.estimate().value));
    CHECK(resumed.sums().sum_w == full.sums().sum_w);
}

TEST_CASE("checkpoint: mismatched runs are rejected") {
    const SamplerConfig cfg{Field::Rebit, SamplerKind::MonteCarlo, 21, 4096, 1};
    ProfileRun run(Axis::Radial, cfg, 11);
    run.advance_to(1024);
    const auto cp = run.checkpoint();
    SamplerConfig qubit = cfg;
    qubit.field = Field::Qubit;
    CHECK_THROWS_AS(ProfileRun::resume(cp, Axis::Radial, qubit, 11), CheckpointError);
    SamplerConfig other_seed = cfg;
    other_seed.seed = 22;
    CHECK_THROWS_AS(ProfileRun::resume(cp, Axis::Radial, other_seed, 11), CheckpointError);
    SamplerConfig other_angles = cfg;
    other_angles.angles = AngularDensity::Jacobian;
    CHECK_THROWS_AS(ProfileRun::resume(cp, Axis::Radial, other_angles, 11), CheckpointError);
    CHECK_THROWS_AS(ProfileRun::resume(cp, Axis::Azimuthal, cfg, 11), CheckpointError);
    CHECK_THROWS_AS(ProfileRun::resume(cp, Axis::Radial, cfg, 13), CheckpointError);
}

TEST_CASE("checkpoint: truncated, corrupted and foreign files are rejected") {
    const SamplerConfig cfg{Field::Qubit, SamplerKind::MonteCarlo, 4, 4096, 1};
    ProfileRun run(Axis::Azimuthal, cfg, 11);
    run.advance_to(2048);
    const auto path = temp_path("fuzz.ckpt");
    save_checkpoint(run.checkpoint(), path);
    const auto good = read_bytes(path);
    CHECK_NOTHROW(load_checkpoint(path));

    const auto bad = temp_path("fuzz_bad.ckpt");
    for (size_t len = 0; len < good.size(); len += 7) {
        write_bytes(bad, std::vector<unsigned char>(good.begin(), good.begin() + static_cast<long>(len)));
        CHECK_THROWS_AS(load_checkpoint(bad), CheckpointError);
    }
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 500; ++trial) {
        auto b = good;
        const size_t pos = rng() % b.size();
        b[pos] ^= static_cast<unsigned char>(1u << (rng() % 8));
        write_bytes(bad, b);
        CHECK_THROWS_AS(load_checkpoint(bad), CheckpointError);
    }
    write_bytes(bad, std::vector<unsigned char>(64, 'x'));
    CHECK_THROWS_AS(load_checkpoint(bad), CheckpointError);
    CHECK_THROWS_AS(load_checkpoint(temp_path("does_not_exist.ckpt")), CheckpointError);
}

TEST_CASE("config hash ignores workers only") {
    SamplerConfig a{Field::Rebit, SamplerKind::MonteCarlo, 1, 100, 1};
    SamplerConfig b = a;
    b.workers = 8;
    CHECK(config_hash(Axis::Radial, a, 11) == config_hash(Axis::Radial, b, 11));
    b.n_samples = 101;
    CHECK(config_hash(Axis::Radial, a, 11) != config_hash(Axis::Radial, b, 11));
    CHECK(config_hash(Axis::Radial, a, 11) != config_hash(Axis::Azimuthal, a, 11));
    CHECK(config_hash(Axis::Radial, a, 11) != config_hash(Axis::Radial, a, 12));
}
