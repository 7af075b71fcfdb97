#pragma once

// Exact 4x4 state algebra on the Cholesky chart of two-rebit / two-qubit density matrices.
//
// Coordinate ordering used everywhere in the library (n = 9 or 15 reals):
//   Gamma11, Gamma22, Gamma33, then the strictly-lower entries row-major
//   Gamma21, Gamma31, Gamma32, Gamma41, Gamma42, Gamma43,
// where each off-diagonal contributes (Re, Im) adjacently for Qubit and a single real for Rebit.
// Gamma44 is not a coordinate; it is fixed by unit trace.

#include <array>
#include <span>
#include <vector>

#include "sepscope/types.hpp"

namespace sepscope {

/// Partial-transpose determinant threshold for the separability test.
inline constexpr double kPptTolerance = -1e-14;
/// Eigenvalue threshold for positive semidefiniteness.
inline constexpr double kPsdTolerance = -1e-10;

class CholeskyFactor {
public:
    /// Throws DomainError if the coordinate count does not match the field, a diagonal entry is
    /// negative, or the point lies outside the closed unit ball.
    CholeskyFactor(Field field, std::span<const double> coords);

    static CholeskyFactor zero(Field field);

    Field field() const { return field_; }
    std::span<const double> coords() const { return {x_.data(), static_cast<size_t>(dimension(field_))}; }

    double diag(int k) const { return x_[k]; }  // k = 0, 1, 2
    /// Strictly-lower entry Gamma[row][col] (0-based, row > col).
    Complex offdiag(int row, int col) const;
    double squared_norm() const;
    /// The completing entry Gamma44 = sqrt(1 - |coords|^2).
    double gamma44() const;

    /// Full lower-triangular Gamma including Gamma44.
    Matrix4 lower() const;

private:
    CholeskyFactor() = default;
    Field field_ = Field::Rebit;
    std::array<double, 15> x_{};
};

/// Unit-trace Hermitian 4x4 matrix tagged with its field and a positive-semidefiniteness flag.
class DensityMatrix {
public:
    /// Validates hermiticity and unit trace to 1e-12; Rebit inputs must have vanishing imaginary
    /// parts (to 1e-12) and are stored with exact zeros.
    static DensityMatrix from_matrix(Field field, const Matrix4& m);

    Field field() const { return field_; }
    const Matrix4& matrix() const { return m_; }
    Complex operator()(int i, int j) const { return m_(i, j); }
    bool is_psd() const { return psd_; }

private:
    DensityMatrix(Field field, const Matrix4& m, bool psd) : field_(field), m_(m), psd_(psd) {}
    friend DensityMatrix cholesky_compose(const CholeskyFactor& g);

    Field field_;
    Matrix4 m_;
    bool psd_;
};

struct Spectrum {
    std::array<double, 4> lambda{};  // descending
    double sum() const { return lambda[0] + lambda[1] + lambda[2] + lambda[3]; }
    double min() const { return lambda[3]; }
};

/// n-ball point in hyperspherical coordinates: n-2 polar angles plus the azimuth.
struct HyperspherePoint {
    double r = 0.0;
    std::vector<double> theta;
    double phi = 0.0;

    int n() const { return static_cast<int>(theta.size()) + 2; }
};

DensityMatrix cholesky_compose(const CholeskyFactor& g);
CholeskyFactor cholesky_decompose(const DensityMatrix& rho);

/// det(rho) from the factor alone: (Gamma11 Gamma22 Gamma33)^2 (1 - |coords|^2).
double determinant_cholesky(const CholeskyFactor& g);

/// Transpose with respect to the second qubit: m[2i+a][2j+b] -> m[2i+b][2j+a].
Matrix4 partial_transpose(const Matrix4& m);

bool is_separable_ppt(const DensityMatrix& rho);
bool is_separable_ppt(const Matrix4& rho);

/// Eigenvalues of a Hermitian matrix in descending order. Throws DomainError if the input is
/// not Hermitian to 1e-10.
Spectrum eigenvalues4(const Matrix4& m);

/// max(0, l1 - l3 - 2 sqrt(l2 l4)).
double max_concurrence(const Spectrum& s);

std::vector<double> to_cartesian(const HyperspherePoint& p);
HyperspherePoint to_hypersphere(std::span<const double> x);

/// Maps a point of the restricted chart (theta1..3 in [0, pi/2]) to its Cholesky factor.
CholeskyFactor ball_to_factor(const HyperspherePoint& p, Field field);

/// Validates angle ranges for the given field; throws DomainError otherwise.
void check_angles(std::span<const double> theta, double phi, Field field);

/// Evaluates det of the partial transpose along the ray through a fixed unit direction.
///
/// With Gamma = r * Gamma_hat (Gamma44 = sqrt(1 - r^2)) the composed state is exactly
/// rho(r) = r^2 L L^dagger + (1 - r^2) E44, where L is the direction's lower-triangular part,
/// so the partial transpose is affine in r^2 and each grid radius costs one 4x4 determinant.
class RayEvaluator {
public:
    RayEvaluator(std::span<const double> unit_direction, Field field);

    double det_pt(double r) const;
    bool separable_at(double r) const { return det_pt(r) >= kPptTolerance; }

    /// Sign of det(rho^PT(r)) as r -> 0+. Near the origin det = r^6 (c3 + r^2 c4 + ...), with
    /// c3 the determinant of the leading 3x3 block of (L L^dagger)^PT.
    bool separable_near_origin() const;

private:
    Matrix4 q_;  // (L L^dagger)^PT
};

std::vector<bool> det_pt_on_radial_ray(std::span<const double> theta, double phi, Field field,
                                       std::span<const double> r_grid);

/// Diagnostic: number of sign changes of det(rho^PT) along a ray, sampled on `samples` radii.
int ppt_sign_changes(std::span<const double> theta, double phi, Field field, int samples);

}  // namespace sepscope
