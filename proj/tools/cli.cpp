#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <boost/algorithm/string.hpp>

#include "sepscope/fits.hpp"
#include "sepscope/output.hpp"
#include "sepscope/parallel.hpp"
#include "sepscope/profile.hpp"
#include "sepscope/special.hpp"
#include "sepscope/viz3d.hpp"

namespace sepscope::cli {

namespace {

constexpr std::uint64_t kCheckpointStride = 64 * kChunkSize;

struct UsageError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

unsigned default_workers() {
    if (const char* env = std::getenv("SEPSCOPE_WORKERS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<unsigned>(v);
        } catch (const std::exception&) {
        }
        throw UsageError("SEPSCOPE_WORKERS must be a positive integer");
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

RunConfig subcommand_defaults(const std::string& sub) {
    RunConfig c;
    c.subcommand = sub;
    if (sub == "volume-check") c.samples = 1000000;
    if (sub == "viz-rebit") {
        c.samples = 10000;
        c.grid = 51;
    }
    if (sub == "viz-qubit") c.samples = 10000;
    return c;
}

void apply_paper_scale(RunConfig& c, const std::set<std::string>& explicit_keys, std::ostream& err) {
    auto set = [&](const char* key, auto& field, auto value) {
        if (!explicit_keys.contains(key)) field = value;
    };
    const bool rebit = c.field == Field::Rebit;
    if (c.subcommand == "radial") {
        set("samples", c.samples, rebit ? 1100000ull : 10600000ull);
        set("grid", c.grid, 10001ull);
    } else if (c.subcommand == "azimuthal") {
        set("samples", c.samples, rebit ? 22825000ull : 17460000ull);
        set("grid", c.grid, 1001ull);
        if (!rebit) set("sampler", c.sampler, SamplerKind::QuasiMonteCarlo);
    } else if (c.subcommand == "viz-rebit") {
        set("samples", c.samples, 128000ull);
    } else if (c.subcommand == "viz-qubit") {
        set("samples", c.samples, 114000ull);
    }
    err << "warning: --paper-scale selects full sample counts and grids; expect hours to days of runtime\n";
}

std::set<std::string> keys_in(std::string_view text) {
    std::set<std::string> keys;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        boost::algorithm::trim(line);
        if (line.empty() || line[0] == '#') continue;
        keys.insert(boost::algorithm::trim_copy(line.substr(0, line.find('='))));
    }
    return keys;
}

void validate(const RunConfig& c) {
    const auto& s = c.subcommand;
    if (c.samples == 0) throw UsageError("--samples must be positive");
    if (c.workers == 0) throw UsageError("--workers must be positive");
    if ((s == "radial" || s == "azimuthal") && c.grid < 2) throw UsageError("--grid must be at least 2");
    if (s == "viz-rebit" && c.grid < 3) throw UsageError("--grid must be at least 3");
    if (s == "viz-rebit" && !(c.disk_radius > 0.0 && c.disk_radius < 1.0))
        throw UsageError("--disk-radius must lie in (0, 1)");
    if (s == "viz-qubit" && (c.bins < 3 || c.bins % 2 == 0)) throw UsageError("--bins must be odd and at least 3");
    if (s == "viz-qubit" && !(c.entry_bound > 0.0)) throw UsageError("--entry-bound must be positive");
    if (c.resume && c.checkpoint.empty()) throw UsageError("--resume requires --checkpoint");
    if (s == "fit") {
        if (c.model != "beta-tail" && c.model != "cosine" && c.model != "power")
            throw UsageError("--model must be beta-tail, cosine or power");
        const size_t need = c.model == "power" ? 2 : 1;
        if (c.inputs.size() != need)
            throw UsageError("--model " + c.model + " needs " + std::to_string(need) + " --input file(s)");
    }
    if (s == "radial" || s == "azimuthal") {
        if (c.sampler == SamplerKind::QuasiMonteCarlo && c.samples > (1ull << 32))
            throw UsageError("quasi-Monte Carlo supports at most 2^32 samples");
    }
}

std::filesystem::path out_path(const RunConfig& c, const std::string& fallback) {
    return c.out.empty() ? std::filesystem::path(fallback) : std::filesystem::path(c.out);
}

void write_json(const std::filesystem::path& path, const Json& j) { write_text_file(path, j.dump(2) + "\n"); }

void write_run_info(const std::filesystem::path& out, const RunConfig& c, double seconds) {
    Json j;
    j["runtime_seconds"] = seconds;
    j["workers"] = c.workers;
    j["config"] = to_config_text(c);
    write_json(sibling_path(out, ".run.json"), j);
}

Json tally_json(const RegionTally& t) {
    Json j;
    j["octahedron"] = t.measure_octahedron;
    j["tetra_minus_octa"] = t.measure_tetra_minus_octa;
    j["cube_minus_tetra"] = t.measure_cube_minus_tetra;
    return j;
}

// ---------------------------------------------------------------------------

int cmd_profile(const RunConfig& c, Axis axis, std::ostream& out) {
    const auto t0 = std::chrono::steady_clock::now();
    const SamplerConfig sc{c.field, c.sampler, c.seed, c.samples, c.workers, c.angles};
    sc.validate();
    ProfileRun run = c.resume ? ProfileRun::resume(load_checkpoint(c.checkpoint), axis, sc, c.grid)
                              : ProfileRun(axis, sc, c.grid);
    if (c.checkpoint.empty()) {
        run.run();
    } else {
        while (!run.finished()) {
            run.advance_to(run.next_index() + kCheckpointStride);
            save_checkpoint(run.checkpoint(), c.checkpoint);
        }
    }
    const ProfileEstimate prof = run.estimate();
    const ProbabilityEstimate prob = integrate_profile(prof);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const auto csv = out_path(c, std::string(to_string(axis)) + "_" + std::string(to_string(c.field)) + ".csv");
    write_text_file(csv, profile_csv(prof));
    Json j = summary_envelope("sepscope.profile/1", c);
    j["axis"] = to_string(axis);
    j["field"] = to_string(c.field);
    j["sampler"] = to_string(c.sampler);
    j["angles"] = to_string(c.angles);
    j["seed"] = c.seed;
    j["n_samples"] = prof.n_samples;
    j["grid_points"] = prof.grid.size();
    j["probability"] = prob.p;
    j["stderr"] = prob.stderr_;
    j["total_weight"] = prof.total_weight;
    j["generator"] = AngularSampler(sc).generator_name();
    write_json(sibling_path(csv, ".json"), j);
    const bool radial = axis == Axis::Radial;
    write_text_file(sibling_path(csv, ".svg"),
                    svg_line_plot(prof.grid, prof.value,
                                  {std::string(to_string(c.field)) + " " + std::string(to_string(axis)) + " separability profile",
                                   radial ? "r" : "phi_hat", radial ? "F(r)" : "F(phi_hat)"}));
    write_run_info(csv, c, seconds);
    out << to_string(axis) << ' ' << to_string(c.field) << ": probability " << format_double(prob.p) << " +- "
        << format_double(prob.stderr_) << " (" << prof.n_samples << " samples, " << format_double(seconds) << " s)\n";
    return kOk;
}

int cmd_volume(const RunConfig& c, std::ostream& out) {
    const auto t0 = std::chrono::steady_clock::now();
    const SamplerConfig sc{c.field, c.sampler, c.seed, c.samples, c.workers, c.angles};
    sc.validate();
    const VolumeCheck v = volume_check(sc);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    Json j = summary_envelope("sepscope.volume/1", c);
    j["field"] = to_string(c.field);
    j["n_samples"] = v.n_samples;
    j["estimate"] = v.estimate;
    j["stderr"] = v.stderr_;
    j["expected"] = v.expected;
    j["z_score"] = (v.estimate - v.expected) / v.stderr_;
    j["relative_error"] = std::abs(v.estimate / v.expected - 1.0);
    if (!c.out.empty()) {
        write_json(c.out, j);
        write_run_info(c.out, c, seconds);
    }
    out << j.dump(2) << '\n';
    return kOk;
}

int cmd_bloore(const RunConfig& c, std::ostream& out) {
    const BlooreReport r = bloore_integral_checks();
    Json j = summary_envelope("sepscope.bloore/1", c);
    j["integral"] = {{"value", r.integral},
                     {"expected", r.integral_expected},
                     {"expected_exact", "1/151200"},
                     {"relative_error", r.integral_rel_error},
                     {"quadrature_error", r.quadrature_error},
                     {"pass", r.integral_rel_error <= r.tolerance}};
    j["probability"] = {{"value", r.probability},
                        {"expected", r.probability_expected},
                        {"expected_exact", "8/17"},
                        {"relative_error", r.probability_rel_error},
                        {"pass", r.probability_rel_error <= r.tolerance}};
    j["complex_identity"] = "documented-only";
    j["tolerance"] = r.tolerance;
    j["pass"] = r.pass;
    if (!c.out.empty()) write_json(c.out, j);
    out << j.dump(2) << '\n';
    out << (r.pass ? "PASS" : "FAIL") << '\n';
    return r.pass ? kOk : kNumerical;
}

int cmd_fit(const RunConfig& c, std::ostream& out) {
    FitResult f;
    if (c.model == "beta-tail") {
        f = fit_beta_tail(parse_profile_csv(read_text_file(c.inputs[0]), Axis::Radial, Field::Rebit));
    } else if (c.model == "cosine") {
        f = fit_cosine(parse_profile_csv(read_text_file(c.inputs[0]), Axis::Azimuthal, c.field));
    } else {
        const auto rebit = parse_profile_csv(read_text_file(c.inputs[0]), Axis::Radial, Field::Rebit);
        const auto qubit = parse_profile_csv(read_text_file(c.inputs[1]), Axis::Radial, Field::Qubit);
        f = {FitModel::PowerCompare, {c.alpha}, power_compare(rebit, qubit, c.alpha)};
    }
    Json j = summary_envelope("sepscope.fit/1", c);
    j["model"] = to_string(f.model);
    j["params"] = f.params;
    j["rms_residual"] = f.rms_residual;
    if (!c.out.empty()) write_json(c.out, j);
    out << j.dump(2) << '\n';
    return kOk;
}

int cmd_viz_rebit(const RunConfig& c, std::ostream& out) {
    const auto t0 = std::chrono::steady_clock::now();
    RebitVizConfig vc;
    vc.n_qmc = c.samples;
    vc.grid = c.grid;
    vc.seed = c.seed;
    vc.workers = c.workers;
    vc.disk_radius = c.disk_radius;
    const RebitVizResult r = rebit_measure_map(vc);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const auto csv = out_path(c, "viz_rebit.csv");
    write_text_file(csv, surface_csv("d1", "d3", "measure", r.axis, r.axis, r.measure));
    Json j = summary_envelope("sepscope.viz-rebit/1", c);
    j["measure_definition"] =
        "sqrt(det(J^T J)) of the 9x8 jacobian of (gamma_A, omega_A, gamma_B, omega_B, d1, d3) -> rho' at d2 = 0, "
        "averaged over gamma uniform in the disk of radius disk_radius";
    j["generator"] = "sobol-joe-kuo scrambled, 6 dimensions";
    Json plane = tally_json(r.plane);
    plane["octa_over_tetra"] = r.plane_octa_over_tetra();
    plane["cube_minus_tetra_over_tetra"] = r.plane_cube_minus_tetra_over_tetra();
    plane["entangled_over_witness"] = r.plane_entangled_over_witness();
    j["plane"] = plane;
    Json ext = tally_json(r.extruded);
    ext["octa_over_tetra"] = r.extruded_octa_over_tetra();
    ext["cube_minus_tetra_over_tetra"] = r.extruded_cube_minus_tetra_over_tetra();
    ext["entangled_over_witness"] = r.extruded_entangled_over_witness();
    j["extruded"] = ext;
    j["samples_used"] = r.plane.samples_used;
    j["samples_skipped"] = r.plane.samples_skipped;
    write_json(sibling_path(csv, ".json"), j);
    write_text_file(sibling_path(csv, ".svg"),
                    svg_heat_map(r.axis, r.axis, r.measure, {"two-rebit measure over the d1-d3 plane", "d1", "d3"}));
    write_run_info(csv, c, seconds);
    out << "viz-rebit: octa/tetra " << format_double(r.plane_octa_over_tetra()) << ", (cube-tetra)/tetra "
        << format_double(r.plane_cube_minus_tetra_over_tetra()) << ", entangled/witness "
        << format_double(r.plane_entangled_over_witness()) << " (" << format_double(seconds) << " s)\n";
    return kOk;
}

int cmd_viz_qubit(const RunConfig& c, std::ostream& out) {
    const auto t0 = std::chrono::steady_clock::now();
    QubitVizConfig vc;
    vc.n_qmc = c.samples;
    vc.bins = c.bins;
    vc.entry_bound = c.entry_bound;
    vc.seed = c.seed;
    vc.workers = c.workers;
    const QubitVizResult r = qubit_measure_bins(vc);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const size_t nb = c.bins;
    std::vector<double> centers(nb);
    for (size_t i = 0; i < nb; ++i) centers[i] = -1.0 + (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(nb);
    const auto csv = out_path(c, "viz_qubit.csv");
    std::string bins = "d1,d2,d3,measure\n";
    for (size_t i1 = 0; i1 < nb; ++i1)
        for (size_t i2 = 0; i2 < nb; ++i2)
            for (size_t i3 = 0; i3 < nb; ++i3)
                bins += format_double(centers[i1]) + ',' + format_double(centers[i2]) + ',' + format_double(centers[i3]) +
                        ',' + format_double(r.bin_measure[(i1 * nb + i2) * nb + i3]) + '\n';
    write_text_file(csv, bins);

    const std::array<std::pair<const char*, const char*>, 3> axes{{{"d2", "d3"}, {"d1", "d3"}, {"d1", "d2"}}};
    Json marginal_files = Json::array();
    for (int k = 0; k < 3; ++k) {
        const auto stem = csv.stem().string() + "_marginal_d" + std::to_string(k + 1);
        const auto mcsv = csv.parent_path() / (stem + ".csv");
        write_text_file(mcsv, surface_csv(axes[k].first, axes[k].second, "measure", centers, centers, r.marginals[k]));
        write_text_file(sibling_path(mcsv, ".svg"),
                        svg_heat_map(centers, centers, r.marginals[k],
                                     {"two-qubit measure summed over d" + std::to_string(k + 1), axes[k].first,
                                      axes[k].second}));
        marginal_files.push_back(mcsv.filename().string());
    }

    Json j = summary_envelope("sepscope.viz-qubit/1", c);
    j["generator"] = "sobol-joe-kuo scrambled, 15 dimensions";
    j["measure_definition"] = "|det| of the 15x15 jacobian of (A chart, B chart, d) -> rho'";
    j["separability"] = r.separability;
    j["separability_stderr"] = r.separability_stderr;
    j["tally"] = tally_json(r.tally);
    j["samples_used"] = r.tally.samples_used;
    j["samples_skipped"] = r.tally.samples_skipped;
    j["outside_tetrahedron"] = r.outside_tetrahedron;
    j["negative_jacobian"] = r.negative_jacobian;
    j["negative_fraction"] = r.negative_fraction;
    j["marginal_files"] = marginal_files;
    write_json(sibling_path(csv, ".json"), j);
    write_run_info(csv, c, seconds);
    out << "viz-qubit: separability " << format_double(r.separability) << " +- " << format_double(r.separability_stderr)
        << ", negative-jacobian fraction " << format_double(r.negative_fraction) << " (" << format_double(seconds)
        << " s)\n";
    return kOk;
}

int dispatch(const RunConfig& c, std::ostream& out) {
    const auto& s = c.subcommand;
    if (s == "radial") return cmd_profile(c, Axis::Radial, out);
    if (s == "azimuthal") return cmd_profile(c, Axis::Azimuthal, out);
    if (s == "volume-check") return cmd_volume(c, out);
    if (s == "bloore-check") return cmd_bloore(c, out);
    if (s == "fit") return cmd_fit(c, out);
    if (s == "viz-rebit") return cmd_viz_rebit(c, out);
    if (s == "viz-qubit") return cmd_viz_qubit(c, out);
    throw UsageError("unknown subcommand " + s);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Separability-probability estimation for two-rebit and two-qubit states", "sepscope"};
    app.require_subcommand(1);
    app.set_version_flag("--version", SEPSCOPE_VERSION);

    std::map<std::string, std::string> values;
    std::vector<std::string> inputs;
    std::string config_path;
    bool resume = false, paper_scale = false;

    const std::vector<std::pair<std::string, std::string>> subcommands{
        {"radial", "separability profile along the radius"},
        {"azimuthal", "separability profile along the azimuth"},
        {"bloore-check", "exact two-rebit identities by quadrature"},
        {"fit", "fit saved profile CSVs"},
        {"viz-rebit", "two-rebit measure over the d1-d3 plane"},
        {"viz-qubit", "two-qubit measure binned over d-space"},
        {"volume-check", "Hilbert-Schmidt volume by Monte Carlo"},
    };
    for (const auto& [name, help] : subcommands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--field", values["field"], "rebit | qubit");
        sub->add_option("--samples", values["samples"], "number of samples");
        sub->add_option("--grid", values["grid"], "grid points");
        sub->add_option("--seed", values["seed"], "random seed");
        sub->add_option("--sampler", values["sampler"], "mc | qmc");
        sub->add_option("--workers", values["workers"], "worker threads (default: SEPSCOPE_WORKERS or all cores)");
        sub->add_option("--out", values["out"], "output path");
        sub->add_option("--checkpoint", values["checkpoint"], "checkpoint file");
        sub->add_flag("--resume", resume, "resume from --checkpoint");
        sub->add_flag("--paper-scale", paper_scale, "use the full-scale sample counts and grids");
        sub->add_option("--config", config_path, "key=value config file; flags take precedence");
        if (name == "radial" || name == "azimuthal" || name == "volume-check")
            sub->add_option("--angles", values["angles"], "jacobian | uniform polar-angle density");
        if (name == "viz-rebit") sub->add_option("--disk-radius", values["disk-radius"], "radius of the gamma disk");
        if (name == "viz-qubit") {
            sub->add_option("--bins", values["bins"], "bins per axis (odd)");
            sub->add_option("--entry-bound", values["entry-bound"], "bound on the group-chart entries");
        }
        if (name == "fit") {
            sub->add_option("--input", inputs, "profile CSV (power: rebit then qubit)");
            sub->add_option("--model", values["model"], "beta-tail | cosine | power");
            sub->add_option("--alpha", values["alpha"], "power for --model power");
        }
    }

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        const CLI::App* sub = app.get_subcommands().front();
        const std::string name = sub->get_name();
        RunConfig cfg = subcommand_defaults(name);
        cfg.workers = default_workers();
        std::set<std::string> explicit_keys;
        if (!config_path.empty()) {
            const std::string text = read_text_file(config_path);
            cfg = parse_config_text(text, cfg);
            explicit_keys = keys_in(text);
        }
        std::string flags;
        for (const auto& [key, value] : values) {
            if (sub->get_option_no_throw("--" + key) == nullptr || sub->count("--" + key) == 0) continue;
            flags += key + "=" + value + "\n";
            explicit_keys.insert(key);
        }
        if (sub->get_option_no_throw("--input") != nullptr && sub->count("--input") > 0) {
            flags += "input=" + boost::algorithm::join(inputs, ",") + "\n";
            explicit_keys.insert("input");
        }
        if (resume) flags += "resume=true\n";
        if (paper_scale) flags += "paper-scale=true\n";
        cfg = parse_config_text(flags, cfg);
        cfg.subcommand = name;
        if (cfg.paper_scale) apply_paper_scale(cfg, explicit_keys, err);
        validate(cfg);
        return dispatch(cfg, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const ConfigError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const CheckpointError& e) {
        err << "checkpoint error: " << e.what() << "\n";
        return kUsage;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << "\n";
        return kNumerical;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return kNumerical;
    } catch (const EstimationError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    } catch (const std::invalid_argument& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kNumerical;
    }
}

}  // namespace sepscope::cli
