#include "sepscope/state.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

namespace sepscope {

namespace {

struct Index2 {
    int row, col;
};
constexpr std::array<Index2, 6> kOffdiag{{{1, 0}, {2, 0}, {2, 1}, {3, 0}, {3, 1}, {3, 2}}};

int offdiag_slot(int row, int col) {
    for (int s = 0; s < 6; ++s)
        if (kOffdiag[s].row == row && kOffdiag[s].col == col) return s;
    throw DomainError("not a strictly-lower index");
}

Matrix4 lower_from_coords(std::span<const double> x, Field field) {
    Matrix4 g = Matrix4::Zero();
    for (int k = 0; k < 3; ++k) g(k, k) = x[k];
    int o = 3;
    for (const auto& [row, col] : kOffdiag) {
        if (field == Field::Qubit) {
            g(row, col) = Complex(x[o], x[o + 1]);
            o += 2;
        } else {
            g(row, col) = Complex(x[o], 0.0);
            o += 1;
        }
    }
    return g;
}

double max_abs(const Matrix4& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

std::string_view to_string(Field f) { return f == Field::Rebit ? "rebit" : "qubit"; }

Field parse_field(std::string_view name) {
    if (name == "rebit") return Field::Rebit;
    if (name == "qubit") return Field::Qubit;
    throw DomainError("unknown field '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// CholeskyFactor

CholeskyFactor::CholeskyFactor(Field field, std::span<const double> coords) : field_(field) {
    const auto n = static_cast<size_t>(dimension(field));
    if (coords.size() != n) throw DomainError("coordinate count does not match field");
    std::copy(coords.begin(), coords.end(), x_.begin());
    for (int k = 0; k < 3; ++k)
        if (!(x_[k] >= 0.0)) throw DomainError("negative Cholesky diagonal");
    if (squared_norm() > 1.0 + 1e-12) throw DomainError("outside unit ball");
}

CholeskyFactor CholeskyFactor::zero(Field field) {
    CholeskyFactor g;
    g.field_ = field;
    return g;
}

Complex CholeskyFactor::offdiag(int row, int col) const {
    const int s = offdiag_slot(row, col);
    if (field_ == Field::Qubit) return {x_[3 + 2 * s], x_[4 + 2 * s]};
    return {x_[3 + s], 0.0};
}

double CholeskyFactor::squared_norm() const {
    double s = 0.0;
    for (double v : coords()) s += v * v;
    return s;
}

double CholeskyFactor::gamma44() const { return std::sqrt(std::max(0.0, 1.0 - squared_norm())); }

Matrix4 CholeskyFactor::lower() const {
    Matrix4 g = lower_from_coords(coords(), field_);
    g(3, 3) = gamma44();
    return g;
}

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix DensityMatrix::from_matrix(Field field, const Matrix4& m) {
    if (max_abs(m - m.adjoint()) > 1e-12) throw DomainError("matrix is not Hermitian");
    const Complex tr = m.trace();
    if (std::abs(tr.real() - 1.0) > 1e-12 || std::abs(tr.imag()) > 1e-12)
        throw DomainError("matrix does not have unit trace");
    Matrix4 stored = m;
    if (field == Field::Rebit) {
        if (m.imag().cwiseAbs().maxCoeff() > 1e-12)
            throw DomainError("rebit matrix has imaginary entries");
        stored = m.real().cast<Complex>();
    }
    const bool psd = eigenvalues4(stored).min() >= kPsdTolerance;
    return DensityMatrix(field, stored, psd);
}

// ---------------------------------------------------------------------------
// Composition / decomposition

DensityMatrix cholesky_compose(const CholeskyFactor& g) {
    const Matrix4 gamma = g.lower();
    return DensityMatrix(g.field(), gamma * gamma.adjoint(), true);
}

CholeskyFactor cholesky_decompose(const DensityMatrix& rho) {
    if (eigenvalues4(rho.matrix()).min() < kPsdTolerance) throw DomainError("matrix is not positive semidefinite");

    const Matrix4& m = rho.matrix();
    Matrix4 g = Matrix4::Zero();
    for (int k = 0; k < 4; ++k) {
        double d = m(k, k).real();
        for (int j = 0; j < k; ++j) d -= std::norm(g(k, j));
        g(k, k) = std::sqrt(std::max(d, 0.0));
        for (int i = k + 1; i < 4; ++i) {
            Complex s = m(i, k);
            for (int j = 0; j < k; ++j) s -= g(i, j) * std::conj(g(k, j));
            g(i, k) = g(k, k).real() > 1e-300 ? s / g(k, k).real() : Complex(0.0);
        }
    }

    const Field field = rho.field();
    std::vector<double> x;
    x.reserve(dimension(field));
    for (int k = 0; k < 3; ++k) x.push_back(g(k, k).real());
    for (const auto& [row, col] : kOffdiag) {
        x.push_back(g(row, col).real());
        if (field == Field::Qubit) x.push_back(g(row, col).imag());
    }
    // Rounding can push |x| a hair above 1 for states with rho44 ~ 0.
    double norm2 = 0.0;
    for (double v : x) norm2 += v * v;
    if (norm2 > 1.0) {
        const double s = 1.0 / std::sqrt(norm2);
        for (double& v : x) v *= s;
    }
    return CholeskyFactor(field, x);
}

double determinant_cholesky(const CholeskyFactor& g) {
    const double p = g.diag(0) * g.diag(1) * g.diag(2);
    return p * p * (1.0 - g.squared_norm());
}

// ---------------------------------------------------------------------------
// Partial transpose, PPT, spectra

Matrix4 partial_transpose(const Matrix4& m) {
    Matrix4 out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) out(2 * i + a, 2 * j + b) = m(2 * i + b, 2 * j + a);
    return out;
}

bool is_separable_ppt(const Matrix4& rho) {
    return partial_transpose(rho).determinant().real() >= kPptTolerance;
}

bool is_separable_ppt(const DensityMatrix& rho) { return is_separable_ppt(rho.matrix()); }

Spectrum eigenvalues4(const Matrix4& m) {
    if (max_abs(m - m.adjoint()) > 1e-10) throw DomainError("matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix4> solver(m, Eigen::EigenvaluesOnly);
    const auto& ev = solver.eigenvalues();  // ascending
    Spectrum s;
    for (int k = 0; k < 4; ++k) s.lambda[k] = ev(3 - k);
    return s;
}

double max_concurrence(const Spectrum& s) {
    const double prod = s.lambda[1] * s.lambda[3];
    if (prod < -1e-12) throw DomainError("spectrum is not that of a density matrix");
    const double c = s.lambda[0] - s.lambda[2] - 2.0 * std::sqrt(std::max(prod, 0.0));
    return std::max(0.0, c);
}

// ---------------------------------------------------------------------------
// Hyperspherical chart

std::vector<double> to_cartesian(const HyperspherePoint& p) {
    const int n = p.n();
    std::vector<double> x(n);
    double sines = p.r;
    for (int k = 0; k < n - 2; ++k) {
        x[k] = sines * std::cos(p.theta[k]);
        sines *= std::sin(p.theta[k]);
    }
    x[n - 2] = sines * std::cos(p.phi);
    x[n - 1] = sines * std::sin(p.phi);
    return x;
}

HyperspherePoint to_hypersphere(std::span<const double> x) {
    const int n = static_cast<int>(x.size());
    if (n < 3) throw DomainError("hypersphere dimension must be at least 3");
    std::vector<double> tail(n + 1, 0.0);  // tail[k] = sum_{j >= k} x_j^2
    for (int k = n - 1; k >= 0; --k) tail[k] = tail[k + 1] + x[k] * x[k];

    HyperspherePoint p;
    p.r = std::sqrt(tail[0]);
    p.theta.resize(n - 2);
    for (int k = 0; k < n - 2; ++k) p.theta[k] = std::atan2(std::sqrt(tail[k + 1]), x[k]);
    p.phi = std::atan2(x[n - 1], x[n - 2]);
    if (p.phi < 0.0) p.phi += 2.0 * std::numbers::pi;
    return p;
}

void check_angles(std::span<const double> theta, double phi, Field field) {
    constexpr double eps = 1e-12;
    constexpr double pi = std::numbers::pi;
    if (static_cast<int>(theta.size()) != dimension(field) - 2)
        throw DomainError("angle count does not match field");
    for (size_t k = 0; k < theta.size(); ++k) {
        const double hi = k < 3 ? pi / 2 : pi;
        if (!(theta[k] >= -eps && theta[k] <= hi + eps)) throw DomainError("polar angle out of range");
    }
    if (!(phi >= -eps && phi <= 2 * pi + eps)) throw DomainError("azimuth out of range");
}

CholeskyFactor ball_to_factor(const HyperspherePoint& p, Field field) {
    if (p.n() != dimension(field)) throw DomainError("hypersphere dimension does not match field");
    if (!(p.r >= 0.0 && p.r <= 1.0)) throw DomainError("radius out of range");
    check_angles(p.theta, p.phi, field);
    auto x = to_cartesian(p);
    // Angles at the pi/2 edge can leave a -1e-17 diagonal after cos().
    for (int k = 0; k < 3; ++k) x[k] = std::max(0.0, x[k]);
    return CholeskyFactor(field, x);
}

// ---------------------------------------------------------------------------
// Radial rays

RayEvaluator::RayEvaluator(std::span<const double> unit_direction, Field field) {
    if (static_cast<int>(unit_direction.size()) != dimension(field))
        throw DomainError("direction size does not match field");
    const Matrix4 l = lower_from_coords(unit_direction, field);
    q_ = partial_transpose(l * l.adjoint());
}

double RayEvaluator::det_pt(double r) const {
    const double t = r * r;
    Matrix4 m = t * q_;
    m(3, 3) += 1.0 - t;
    return m.determinant().real();
}

bool RayEvaluator::separable_near_origin() const {
    const double c3 = q_.topLeftCorner<3, 3>().determinant().real();
    if (c3 != 0.0) return c3 > 0.0;
    Matrix4 d = q_;
    d(3, 3) -= 1.0;
    return d.determinant().real() >= 0.0;
}

std::vector<bool> det_pt_on_radial_ray(std::span<const double> theta, double phi, Field field,
                                       std::span<const double> r_grid) {
    check_angles(theta, phi, field);
    HyperspherePoint p{1.0, {theta.begin(), theta.end()}, phi};
    const auto dir = to_cartesian(p);
    const RayEvaluator ray(dir, field);
    std::vector<bool> out;
    out.reserve(r_grid.size());
    for (double r : r_grid) {
        if (!(r >= 0.0 && r <= 1.0)) throw DomainError("radius out of range");
        out.push_back(ray.separable_at(r));
    }
    return out;
}

int ppt_sign_changes(std::span<const double> theta, double phi, Field field, int samples) {
    check_angles(theta, phi, field);
    HyperspherePoint p{1.0, {theta.begin(), theta.end()}, phi};
    const RayEvaluator ray(to_cartesian(p), field);
    int changes = 0;
    int prev = 0;
    for (int i = 1; i <= samples; ++i) {
        const double d = ray.det_pt(static_cast<double>(i) / samples);
        const int s = d > 0 ? 1 : (d < 0 ? -1 : 0);
        if (s != 0 && prev != 0 && s != prev) ++changes;
        if (s != 0) prev = s;
    }
    return changes;
}

}  // namespace sepscope
