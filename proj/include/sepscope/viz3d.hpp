#pragma once

// Pauli-diagonal states under local SL(2) conjugation and the measures they induce on the
// cube / tetrahedron / octahedron picture of d-space.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "sepscope/state.hpp"

namespace sepscope {

struct DPoint {
    double d1 = 0.0, d2 = 0.0, d3 = 0.0;
};

/// Bargmann chart of SL(2,R): |gamma| < 1, omega in [0, 2 pi).
struct Sl2rParam {
    double gamma_re = 0.0, gamma_im = 0.0, omega = 0.0;
};

/// Unit-determinant chart of SL(2,C): [[a, b], [c, (1 + b c) / a]].
struct Sl2cParam {
    Complex a{1.0, 0.0}, b{0.0, 0.0}, c{0.0, 0.0};
    Complex d() const { return (1.0 + b * c) / a; }
};

enum class Region { Separable, Entangled, Witness };

std::string_view to_string(Region r);

struct RegionTally {
    double measure_octahedron = 0.0;
    double measure_tetra_minus_octa = 0.0;
    double measure_cube_minus_tetra = 0.0;
    std::uint64_t samples_used = 0;
    std::uint64_t samples_skipped = 0;

    double total() const { return measure_octahedron + measure_tetra_minus_octa + measure_cube_minus_tetra; }
    double tetrahedron() const { return measure_octahedron + measure_tetra_minus_octa; }
    void add(Region r, double w);
    void merge(const RegionTally& o);
};

/// Matrix (I + sum_k d_k sigma_k (x) sigma_k) / 4, which is real for every d.
Matrix4 pauli_matrix(const DPoint& d);
DensityMatrix pauli_state(const DPoint& d);

/// The four eigenvalues (1 + s.d)/4 over s in {(+,-,+), (-,+,+), (+,+,-), (-,-,-)}.
std::array<double, 4> pauli_eigenvalues(const DPoint& d);

/// (A (x) B) rho (A (x) B)^dagger / trace. Returns nullopt when the trace is below 1e-300.
std::optional<Matrix4> conjugate_matrix(const Matrix4& rho, const Matrix2& a, const Matrix2& b);
/// The result is tagged Rebit only when rho, A and B are all real.
std::optional<DensityMatrix> conjugate_state(const DensityMatrix& rho, const Matrix2& a, const Matrix2& b);

/// Tr[(A (x) B) rho_d (A (x) B)^dagger].
double conjugation_trace(const DPoint& d, const Matrix2& a, const Matrix2& b);

/// Closed-form det(rho') and det(rho'^PT) of a conjugated Pauli-diagonal state, given the
/// conjugation trace. Valid for unit-determinant A and B.
double det_rho_formula(const DPoint& d, double trace_norm);
double det_pt_formula(const DPoint& d, double trace_norm);

bool in_cube(const DPoint& d);
bool in_tetrahedron(const DPoint& d);
bool in_octahedron(const DPoint& d);
/// Boundary ties within 1e-12 resolve toward the more inclusive region.
Region classify_region(const DPoint& d);

/// Lengths of the d2-intervals at fixed (d1, d3) lying in the tetrahedron and in the octahedron.
double tetrahedron_d2_length(double d1, double d3);
double octahedron_d2_length(double d1, double d3);

/// Bargmann SU(1,1) element conjugated by the Cayley matrix into SL(2,R).
/// Throws DomainError if |gamma| >= 1. The returned matrix has zero imaginary parts.
Matrix2 bargmann_to_sl2r(const Sl2rParam& p);
/// Throws DomainError if |a| < 1e-6.
Matrix2 sl2c_matrix(const Sl2cParam& p);

/// Real coordinates of a unit-trace Hermitian matrix: diagonal 11, 22, 33 followed by the
/// upper off-diagonals (12, 13, 14, 23, 24, 34); Qubit stores (Re, Im) for each of those.
/// Output size is 9 (Rebit) or 15 (Qubit).
void state_coordinates(const Matrix4& m, Field field, std::span<double> out);

using VectorMap = std::function<void(std::span<const double> in, std::span<double> out)>;

/// Central-difference jacobian (out_dim x in_dim), step h_rel * max(1, |x_j|) per column.
/// Throws EstimationError if the map returns a non-finite value.
Eigen::MatrixXd numerical_jacobian(const VectorMap& map, std::span<const double> x, int out_dim,
                                   double h_rel = 1e-5);
/// sqrt(det(J^T J)).
double gram_determinant(const Eigen::MatrixXd& j);

/// Map Gamma coordinates -> (rho11, rho22, rho33, off-diagonal entries), whose jacobian
/// determinant is the Cholesky-chart volume element.
VectorMap cholesky_to_entries_map(Field field);

// ---------------------------------------------------------------------------
// Two-rebit measure on the d1-d3 plane

struct RebitVizConfig {
    std::uint64_t n_qmc = 10000;
    std::size_t grid = 51;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    /// gamma is drawn uniformly from the disk of this radius.
    double disk_radius = 0.9;
    /// Test hook: the Sobol coordinates used for A are used for B and vice versa.
    bool swap_roles = false;
};

struct RebitVizResult {
    RebitVizConfig config;
    std::vector<double> axis;     // grid abscissae in [-1, 1], used for both d1 and d3
    std::vector<double> measure;  // grid x grid, row-major in (d1, d3): mean Gram determinant
    std::vector<double> stderr_;
    /// Grid points classified on the d2 = 0 plane, each weighted by its measure.
    RegionTally plane;
    /// The d2-independent measure extruded over the cube: each grid point weighted by the
    /// d2-length of each region above it.
    RegionTally extruded;

    double plane_octa_over_tetra() const;
    double plane_cube_minus_tetra_over_tetra() const;
    double plane_entangled_over_witness() const;
    double extruded_octa_over_tetra() const;
    double extruded_cube_minus_tetra_over_tetra() const;
    double extruded_entangled_over_witness() const;
};

/// Bargmann parameters of (A, B) used for QMC point `index`.
std::pair<Sl2rParam, Sl2rParam> rebit_viz_group_sample(const RebitVizConfig& cfg, std::uint64_t index);

/// Gram determinant of the jacobian of (A params, B params, d1, d3) -> rebit coordinates of rho'
/// at d2 = 0, computed by generic numerical differentiation (reference for the fast path).
double rebit_gram_reference(const Sl2rParam& pa, const Sl2rParam& pb, double d1, double d3);

RebitVizResult rebit_measure_map(const RebitVizConfig& cfg);

// ---------------------------------------------------------------------------
// Two-qubit measure binned over the tetrahedron

struct QubitVizConfig {
    std::uint64_t n_qmc = 10000;
    std::size_t bins = 7;
    double entry_bound = 500.0;
    std::uint64_t seed = 0;
    unsigned workers = 1;
    /// Test hook: A = B = I and the measure is the Gram determinant of d -> rho.
    bool identity_group = false;
};

struct QubitVizResult {
    QubitVizConfig config;
    std::vector<double> bin_measure;  // bins^3, index (i1 * bins + i2) * bins + i3
    std::array<std::vector<double>, 3> marginals;  // marginals[k]: summed over d_{k+1}, bins^2
    RegionTally tally;
    double separability = 0.0;  // octahedron measure / tetrahedron measure
    double separability_stderr = 0.0;
    std::uint64_t outside_tetrahedron = 0;
    std::uint64_t negative_jacobian = 0;
    double negative_fraction = 0.0;  // among samples with a usable jacobian
};

/// Signed determinant of the 15x15 jacobian of (A chart, B chart, d) -> qubit coordinates of
/// rho'. Parameters: (a_re, a_im, b_re, b_im, c_re, c_im) for A, the same for B, then d1, d2, d3.
double qubit_jacobian_det(std::span<const double> params);

QubitVizResult qubit_measure_bins(const QubitVizConfig& cfg);

}  // namespace sepscope
