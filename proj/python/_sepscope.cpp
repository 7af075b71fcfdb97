#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sepscope/fits.hpp"
#include "sepscope/profile.hpp"
#include "sepscope/special.hpp"
#include "sepscope/state.hpp"
#include "sepscope/viz3d.hpp"

namespace py = pybind11;
using namespace sepscope;

namespace {

SamplerConfig sampler_config(const std::string& field, std::uint64_t samples, std::uint64_t seed,
                             const std::string& sampler, unsigned workers, const std::string& angles) {
    SamplerConfig c{parse_field(field), parse_sampler_kind(sampler), seed, samples, workers,
                    parse_angular_density(angles)};
    c.validate();
    return c;
}

py::dict profile_dict(const ProfileEstimate& p) {
    const ProbabilityEstimate prob = integrate_profile(p);
    py::dict d;
    d["axis"] = std::string(to_string(p.axis));
    d["field"] = std::string(to_string(p.field));
    d["grid"] = p.grid;
    d["value"] = p.value;
    d["stderr"] = p.stderr_;
    d["n_samples"] = p.n_samples;
    d["total_weight"] = p.total_weight;
    d["probability"] = prob.p;
    d["probability_stderr"] = prob.stderr_;
    return d;
}

ProfileEstimate profile_from(Axis axis, const std::string& field, std::vector<double> grid, std::vector<double> value) {
    ProfileEstimate p;
    p.axis = axis;
    p.field = parse_field(field);
    p.stderr_.assign(grid.size(), 0.0);
    p.grid = std::move(grid);
    p.value = std::move(value);
    return p;
}

py::dict tally_dict(const RegionTally& t) {
    py::dict d;
    d["octahedron"] = t.measure_octahedron;
    d["tetra_minus_octa"] = t.measure_tetra_minus_octa;
    d["cube_minus_tetra"] = t.measure_cube_minus_tetra;
    d["samples_used"] = t.samples_used;
    d["samples_skipped"] = t.samples_skipped;
    return d;
}

}  // namespace

PYBIND11_MODULE(_sepscope, m) {
    m.doc() = "Separability-probability estimation for two-rebit and two-qubit density matrices";
    m.attr("__version__") = SEPSCOPE_VERSION;

    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<EstimationError>(m, "EstimationError", PyExc_RuntimeError);

    m.def("reg_inc_beta", &reg_inc_beta, py::arg("x"), py::arg("a"), py::arg("b"));
    m.def("jac_real_nu", &jac_real_nu, py::arg("nu"));
    m.def("bloore_integral_checks", [] {
        const BlooreReport r = bloore_integral_checks();
        py::dict d;
        d["integral"] = r.integral;
        d["integral_expected"] = r.integral_expected;
        d["probability"] = r.probability;
        d["probability_expected"] = r.probability_expected;
        d["pass"] = r.pass;
        return d;
    });

    m.def("hs_volume", [](const std::string& field) { return hs_volume(parse_field(field)); }, py::arg("field"));
    m.def(
        "volume_check",
        [](const std::string& field, std::uint64_t samples, std::uint64_t seed, const std::string& sampler,
           unsigned workers, const std::string& angles) {
            py::gil_scoped_release release;
            const VolumeCheck v = volume_check(sampler_config(field, samples, seed, sampler, workers, angles));
            py::gil_scoped_acquire acquire;
            py::dict d;
            d["estimate"] = v.estimate;
            d["stderr"] = v.stderr_;
            d["expected"] = v.expected;
            return d;
        },
        py::arg("field"), py::arg("samples"), py::arg("seed") = 0, py::arg("sampler") = "mc", py::arg("workers") = 1,
        py::arg("angles") = "jacobian");

    m.def(
        "radial_profile",
        [](const std::string& field, std::uint64_t samples, std::size_t grid, std::uint64_t seed,
           const std::string& sampler, unsigned workers, const std::string& angles) {
            const auto cfg = sampler_config(field, samples, seed, sampler, workers, angles);
            ProfileEstimate p;
            {
                py::gil_scoped_release release;
                p = radial_profile(cfg, grid);
            }
            return profile_dict(p);
        },
        py::arg("field"), py::arg("samples"), py::arg("grid") = 101, py::arg("seed") = 0, py::arg("sampler") = "mc",
        py::arg("workers") = 1, py::arg("angles") = "jacobian");
    m.def(
        "azimuthal_profile",
        [](const std::string& field, std::uint64_t samples, std::size_t grid, std::uint64_t seed,
           const std::string& sampler, unsigned workers, const std::string& angles) {
            const auto cfg = sampler_config(field, samples, seed, sampler, workers, angles);
            ProfileEstimate p;
            {
                py::gil_scoped_release release;
                p = azimuthal_profile(cfg, grid);
            }
            return profile_dict(p);
        },
        py::arg("field"), py::arg("samples"), py::arg("grid") = 101, py::arg("seed") = 0, py::arg("sampler") = "mc",
        py::arg("workers") = 1, py::arg("angles") = "jacobian");

    m.def(
        "fit_beta_tail",
        [](std::vector<double> grid, std::vector<double> value) {
            const FitResult f = fit_beta_tail(profile_from(Axis::Radial, "rebit", std::move(grid), std::move(value)));
            return py::make_tuple(f.params, f.rms_residual);
        },
        py::arg("grid"), py::arg("value"));
    m.def(
        "fit_cosine",
        [](std::vector<double> grid, std::vector<double> value) {
            const FitResult f = fit_cosine(profile_from(Axis::Azimuthal, "rebit", std::move(grid), std::move(value)));
            return py::make_tuple(f.params, f.rms_residual);
        },
        py::arg("grid"), py::arg("value"));
    m.def(
        "power_compare",
        [](std::vector<double> grid, std::vector<double> rebit, std::vector<double> qubit, double alpha) {
            return power_compare(profile_from(Axis::Radial, "rebit", grid, std::move(rebit)),
                                 profile_from(Axis::Radial, "qubit", grid, std::move(qubit)), alpha);
        },
        py::arg("grid"), py::arg("rebit"), py::arg("qubit"), py::arg("alpha"));

    m.def("partial_transpose", &partial_transpose, py::arg("rho"));
    m.def("is_separable_ppt", py::overload_cast<const Matrix4&>(&is_separable_ppt), py::arg("rho"));
    m.def("eigenvalues", [](const Matrix4& rho) { return eigenvalues4(rho).lambda; }, py::arg("rho"));
    m.def(
        "max_concurrence", [](const Matrix4& rho) { return max_concurrence(eigenvalues4(rho)); }, py::arg("rho"));
    m.def(
        "cholesky_compose",
        [](const std::string& field, std::vector<double> coords) {
            return cholesky_compose(CholeskyFactor(parse_field(field), coords)).matrix();
        },
        py::arg("field"), py::arg("coords"));

    m.def(
        "pauli_matrix", [](double d1, double d2, double d3) { return pauli_matrix({d1, d2, d3}); }, py::arg("d1"),
        py::arg("d2"), py::arg("d3"));
    m.def(
        "classify_region", [](double d1, double d2, double d3) { return std::string(to_string(classify_region({d1, d2, d3}))); },
        py::arg("d1"), py::arg("d2"), py::arg("d3"));
    m.def(
        "det_rho_formula", [](double d1, double d2, double d3, double t) { return det_rho_formula({d1, d2, d3}, t); },
        py::arg("d1"), py::arg("d2"), py::arg("d3"), py::arg("trace_norm") = 1.0);
    m.def(
        "det_pt_formula", [](double d1, double d2, double d3, double t) { return det_pt_formula({d1, d2, d3}, t); },
        py::arg("d1"), py::arg("d2"), py::arg("d3"), py::arg("trace_norm") = 1.0);
    m.def(
        "bargmann_to_sl2r",
        [](double gre, double gim, double omega) { return Eigen::Matrix2d(bargmann_to_sl2r({gre, gim, omega}).real()); },
        py::arg("gamma_re"), py::arg("gamma_im"), py::arg("omega"));

    m.def(
        "rebit_measure_map",
        [](std::uint64_t n_qmc, std::size_t grid, std::uint64_t seed, double disk_radius, unsigned workers) {
            RebitVizConfig c;
            c.n_qmc = n_qmc;
            c.grid = grid;
            c.seed = seed;
            c.disk_radius = disk_radius;
            c.workers = workers;
            RebitVizResult r;
            {
                py::gil_scoped_release release;
                r = rebit_measure_map(c);
            }
            py::dict d;
            d["axis"] = r.axis;
            d["measure"] = r.measure;
            d["plane"] = tally_dict(r.plane);
            d["extruded"] = tally_dict(r.extruded);
            return d;
        },
        py::arg("n_qmc") = 10000, py::arg("grid") = 51, py::arg("seed") = 0, py::arg("disk_radius") = 0.9,
        py::arg("workers") = 1);
    m.def(
        "qubit_measure_bins",
        [](std::uint64_t n_qmc, std::size_t bins, double entry_bound, std::uint64_t seed, unsigned workers) {
            QubitVizConfig c;
            c.n_qmc = n_qmc;
            c.bins = bins;
            c.entry_bound = entry_bound;
            c.seed = seed;
            c.workers = workers;
            QubitVizResult r;
            {
                py::gil_scoped_release release;
                r = qubit_measure_bins(c);
            }
            py::dict d;
            d["bin_measure"] = r.bin_measure;
            d["marginals"] = r.marginals;
            d["tally"] = tally_dict(r.tally);
            d["separability"] = r.separability;
            d["separability_stderr"] = r.separability_stderr;
            d["negative_fraction"] = r.negative_fraction;
            return d;
        },
        py::arg("n_qmc") = 10000, py::arg("bins") = 7, py::arg("entry_bound") = 500.0, py::arg("seed") = 0,
        py::arg("workers") = 1);
}
