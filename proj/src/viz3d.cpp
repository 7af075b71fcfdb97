#include "sepscope/viz3d.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "sepscope/parallel.hpp"
#include "sepscope/sobol.hpp"

namespace sepscope {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTie = 1e-12;
constexpr std::array<std::array<int, 3>, 4> kSignPatterns{{{1, -1, 1}, {-1, 1, 1}, {1, 1, -1}, {-1, -1, -1}}};

const std::array<Matrix2, 3>& paulis() {
    static const std::array<Matrix2, 3> s = [] {
        const Complex i{0.0, 1.0};
        std::array<Matrix2, 3> p;
        p[0] << 0, 1, 1, 0;
        p[1] << 0, -i, i, 0;
        p[2] << 1, 0, 0, -1;
        return p;
    }();
    return s;
}

template <class M2>
auto kron(const M2& a, const M2& b) {
    Eigen::Matrix<typename M2::Scalar, 4, 4> k;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int p = 0; p < 2; ++p)
                for (int q = 0; q < 2; ++q) k(2 * i + p, 2 * j + q) = a(i, j) * b(p, q);
    return k;
}

// Real symmetric 4x4 -> 9 rebit coordinates.
Eigen::Matrix<double, 9, 1> rebit_coords(const Eigen::Matrix4d& m) {
    Eigen::Matrix<double, 9, 1> c;
    c << m(0, 0), m(1, 1), m(2, 2), m(0, 1), m(0, 2), m(0, 3), m(1, 2), m(1, 3), m(2, 3);
    return c;
}

Eigen::Matrix2d real_part(const Matrix2& m) { return m.real(); }

// sigma_k (x) sigma_k / 4 as real matrices (k = 0 is the identity term).
const std::array<Eigen::Matrix4d, 4>& pauli_basis() {
    static const std::array<Eigen::Matrix4d, 4> b = [] {
        std::array<Eigen::Matrix4d, 4> out;
        out[0] = Eigen::Matrix4d::Identity() / 4.0;
        for (int k = 0; k < 3; ++k) {
            const Matrix4 s = kron(paulis()[k], paulis()[k]);
            out[k + 1] = s.real() / 4.0;
        }
        return out;
    }();
    return b;
}

Sl2rParam bargmann_from_unit(const double* u, double radius) {
    const double rho = radius * std::sqrt(u[0]);
    const double arg = 2.0 * kPi * u[1];
    return {rho * std::cos(arg), rho * std::sin(arg), 2.0 * kPi * u[2]};
}

// d/dp of the Bargmann matrix for p = gamma_re, gamma_im, omega.
std::array<Eigen::Matrix2d, 3> bargmann_derivatives(const Sl2rParam& p) {
    constexpr double h = 1e-6;
    std::array<Eigen::Matrix2d, 3> d;
    for (int k = 0; k < 3; ++k) {
        Sl2rParam lo = p, hi = p;
        double* plo = k == 0 ? &lo.gamma_re : k == 1 ? &lo.gamma_im : &lo.omega;
        double* phi = k == 0 ? &hi.gamma_re : k == 1 ? &hi.gamma_im : &hi.omega;
        *plo -= h;
        *phi += h;
        d[k] = (real_part(bargmann_to_sl2r(hi)) - real_part(bargmann_to_sl2r(lo))) / (2.0 * h);
    }
    return d;
}

struct RebitAcc {
    std::vector<double> sum_g, sum_g2;
    std::uint64_t used = 0, skipped = 0;

    void merge(const RebitAcc& o) {
        if (sum_g.empty()) {
            sum_g.assign(o.sum_g.size(), 0.0);
            sum_g2.assign(o.sum_g2.size(), 0.0);
        }
        for (size_t j = 0; j < o.sum_g.size(); ++j) {
            sum_g[j] += o.sum_g[j];
            sum_g2[j] += o.sum_g2[j];
        }
        used += o.used;
        skipped += o.skipped;
    }
};

// Per-sample precomputation of the linear-in-d structure of the unnormalized state
// N(d) = M (sum_k d_k S_k) M^T and of its derivatives with respect to the six group parameters.
struct RebitSampleJet {
    std::array<Eigen::Matrix<double, 9, 1>, 4> n;       // coords of N_k
    std::array<double, 4> tn{};                          // tr N_k
    std::array<std::array<Eigen::Matrix<double, 9, 1>, 4>, 6> dn;  // coords of dN_k / dp
    std::array<std::array<double, 4>, 6> tdn{};

    RebitSampleJet(const Sl2rParam& pa, const Sl2rParam& pb) {
        const Eigen::Matrix2d a = real_part(bargmann_to_sl2r(pa));
        const Eigen::Matrix2d b = real_part(bargmann_to_sl2r(pb));
        const auto da = bargmann_derivatives(pa);
        const auto db = bargmann_derivatives(pb);
        const Eigen::Matrix4d m = kron(a, b);
        std::array<Eigen::Matrix4d, 6> dm;
        for (int k = 0; k < 3; ++k) {
            dm[k] = kron(da[k], b);
            dm[k + 3] = kron(a, db[k]);
        }
        const auto& s = pauli_basis();
        for (int k = 0; k < 4; ++k) {
            const Eigen::Matrix4d nk = m * s[k] * m.transpose();
            n[k] = rebit_coords(nk);
            tn[k] = nk.trace();
            for (int p = 0; p < 6; ++p) {
                const Eigen::Matrix4d t = dm[p] * s[k] * m.transpose();
                const Eigen::Matrix4d dnk = t + t.transpose();
                dn[p][k] = rebit_coords(dnk);
                tdn[p][k] = dnk.trace();
            }
        }
    }

    // Gram determinant at (d1, 0, d3); nullopt if the normalizer underflows.
    std::optional<double> gram(double d1, double d3) const {
        const double t = tn[0] + d1 * tn[1] + d3 * tn[3];
        if (!(t > 1e-300)) return std::nullopt;
        const Eigen::Matrix<double, 9, 1> rho = (n[0] + d1 * n[1] + d3 * n[3]) / t;
        Eigen::Matrix<double, 9, 8> j;
        for (int p = 0; p < 6; ++p) {
            const double tr = tdn[p][0] + d1 * tdn[p][1] + d3 * tdn[p][3];
            j.col(p) = (dn[p][0] + d1 * dn[p][1] + d3 * dn[p][3] - tr * rho) / t;
        }
        j.col(6) = (n[1] - tn[1] * rho) / t;
        j.col(7) = (n[3] - tn[3] * rho) / t;
        const Eigen::Matrix<double, 8, 8> g = j.transpose() * j;
        return std::sqrt(std::max(0.0, g.determinant()));
    }
};

double ratio(double num, double den) { return den > 0.0 ? num / den : std::nan(""); }

struct QubitAcc {
    std::vector<double> bins;
    RegionTally tally;
    double sum_w = 0.0, sum_w2 = 0.0, sum_ws = 0.0, sum_w2s = 0.0;
    std::uint64_t outside = 0, negative = 0;

    void merge(const QubitAcc& o) {
        if (bins.empty()) bins.assign(o.bins.size(), 0.0);
        for (size_t j = 0; j < o.bins.size(); ++j) bins[j] += o.bins[j];
        tally.merge(o.tally);
        sum_w += o.sum_w;
        sum_w2 += o.sum_w2;
        sum_ws += o.sum_ws;
        sum_w2s += o.sum_w2s;
        outside += o.outside;
        negative += o.negative;
    }
};

Matrix4 qubit_conjugated(std::span<const double> x) {
    const Sl2cParam pa{{x[0], x[1]}, {x[2], x[3]}, {x[4], x[5]}};
    const Sl2cParam pb{{x[6], x[7]}, {x[8], x[9]}, {x[10], x[11]}};
    auto r = conjugate_matrix(pauli_matrix({x[12], x[13], x[14]}), sl2c_matrix(pa), sl2c_matrix(pb));
    if (!r) throw EstimationError("vanishing conjugation trace");
    return *r;
}

// Gram determinant of d -> rho_d (15 x 3), constant since the map is affine.
double identity_group_measure(const DPoint& d) {
    const VectorMap f = [](std::span<const double> in, std::span<double> out) {
        state_coordinates(pauli_matrix({in[0], in[1], in[2]}), Field::Qubit, out);
    };
    const std::array<double, 3> x{d.d1, d.d2, d.d3};
    return gram_determinant(numerical_jacobian(f, x, 15));
}

size_t bin_index(double d, size_t bins) {
    const auto i = static_cast<size_t>(std::floor((d + 1.0) * 0.5 * static_cast<double>(bins)));
    return std::min(i, bins - 1);
}

}  // namespace

std::string_view to_string(Region r) {
    switch (r) {
        case Region::Separable: return "separable";
        case Region::Entangled: return "entangled";
        case Region::Witness: return "witness";
    }
    return "unknown";
}

void RegionTally::add(Region r, double w) {
    switch (r) {
        case Region::Separable: measure_octahedron += w; break;
        case Region::Entangled: measure_tetra_minus_octa += w; break;
        case Region::Witness: measure_cube_minus_tetra += w; break;
    }
}

void RegionTally::merge(const RegionTally& o) {
    measure_octahedron += o.measure_octahedron;
    measure_tetra_minus_octa += o.measure_tetra_minus_octa;
    measure_cube_minus_tetra += o.measure_cube_minus_tetra;
    samples_used += o.samples_used;
    samples_skipped += o.samples_skipped;
}

Matrix4 pauli_matrix(const DPoint& d) {
    Matrix4 m = Matrix4::Identity();
    const std::array<double, 3> dk{d.d1, d.d2, d.d3};
    for (int k = 0; k < 3; ++k) m += dk[k] * kron(paulis()[k], paulis()[k]);
    return m / 4.0;
}

DensityMatrix pauli_state(const DPoint& d) {
    if (!in_cube(d)) throw DomainError("pauli_state: d outside the cube");
    return DensityMatrix::from_matrix(Field::Rebit, pauli_matrix(d));
}

std::array<double, 4> pauli_eigenvalues(const DPoint& d) {
    std::array<double, 4> ev{};
    for (int s = 0; s < 4; ++s)
        ev[s] = (1.0 + kSignPatterns[s][0] * d.d1 + kSignPatterns[s][1] * d.d2 + kSignPatterns[s][2] * d.d3) / 4.0;
    return ev;
}

std::optional<Matrix4> conjugate_matrix(const Matrix4& rho, const Matrix2& a, const Matrix2& b) {
    const Matrix4 m = kron(a, b);
    const Matrix4 out = m * rho * m.adjoint();
    const double t = out.trace().real();
    if (!(t > 1e-300)) return std::nullopt;
    return out / t;
}

std::optional<DensityMatrix> conjugate_state(const DensityMatrix& rho, const Matrix2& a, const Matrix2& b) {
    auto m = conjugate_matrix(rho.matrix(), a, b);
    if (!m) return std::nullopt;
    const bool real = rho.field() == Field::Rebit && a.imag().isZero(0.0) && b.imag().isZero(0.0);
    // Restore exact hermiticity lost to rounding.
    const Matrix4 h = 0.5 * (*m + m->adjoint());
    return DensityMatrix::from_matrix(real ? Field::Rebit : Field::Qubit, h);
}

double conjugation_trace(const DPoint& d, const Matrix2& a, const Matrix2& b) {
    const Matrix4 m = kron(a, b);
    return (m * pauli_matrix(d) * m.adjoint()).trace().real();
}

double det_rho_formula(const DPoint& d, double trace_norm) {
    if (!(trace_norm > 0.0)) throw DomainError("det_rho_formula: trace must be positive");
    const double d1 = d.d1, d2 = d.d2, d3 = d.d3;
    const double num = (d1 - d2 - d3 - 1) * (d1 + d2 - d3 + 1) * (d1 - d2 + d3 + 1) * (d1 + d2 + d3 - 1);
    return num / (256.0 * std::pow(trace_norm, 4));
}

double det_pt_formula(const DPoint& d, double trace_norm) {
    if (!(trace_norm > 0.0)) throw DomainError("det_pt_formula: trace must be positive");
    const double d1 = d.d1, d2 = d.d2, d3 = d.d3;
    const double num = (d1 - d2 - d3 + 1) * (d1 + d2 - d3 - 1) * (d1 - d2 + d3 - 1) * (d1 + d2 + d3 + 1);
    return num / (256.0 * std::pow(trace_norm, 4));
}

bool in_cube(const DPoint& d) {
    return std::abs(d.d1) <= 1.0 + kTie && std::abs(d.d2) <= 1.0 + kTie && std::abs(d.d3) <= 1.0 + kTie;
}

bool in_tetrahedron(const DPoint& d) {
    const auto ev = pauli_eigenvalues(d);
    return std::all_of(ev.begin(), ev.end(), [](double l) { return l >= -kTie; });
}

bool in_octahedron(const DPoint& d) { return std::abs(d.d1) + std::abs(d.d2) + std::abs(d.d3) <= 1.0 + kTie; }

Region classify_region(const DPoint& d) {
    if (!in_tetrahedron(d)) return Region::Witness;
    return in_octahedron(d) ? Region::Separable : Region::Entangled;
}

double tetrahedron_d2_length(double d1, double d3) {
    return std::max(0.0, 2.0 * (1.0 - std::max(std::abs(d1), std::abs(d3))));
}

double octahedron_d2_length(double d1, double d3) { return std::max(0.0, 2.0 * (1.0 - std::abs(d1) - std::abs(d3))); }

Matrix2 bargmann_to_sl2r(const Sl2rParam& p) {
    const Complex g{p.gamma_re, p.gamma_im};
    const double g2 = std::norm(g);
    if (!(g2 < 1.0)) throw DomainError("bargmann_to_sl2r: |gamma| must be < 1");
    const double s = 1.0 / std::sqrt(1.0 - g2);
    const Complex e = std::polar(1.0, p.omega);
    const Complex alpha = e * s, beta = g * std::conj(e) * s;
    Matrix2 u;
    u << alpha, beta, std::conj(beta), std::conj(alpha);
    const Complex i{0.0, 1.0};
    Matrix2 c;
    c << 1.0, -i, -i, 1.0;
    c /= std::sqrt(2.0);
    Matrix2 m = c * u * c.adjoint();
    for (int r = 0; r < 2; ++r)
        for (int k = 0; k < 2; ++k) m(r, k) = m(r, k).real();
    return m;
}

Matrix2 sl2c_matrix(const Sl2cParam& p) {
    if (std::abs(p.a) < 1e-6) throw DomainError("sl2c_matrix: |a| must be >= 1e-6");
    Matrix2 m;
    m << p.a, p.b, p.c, p.d();
    return m;
}

void state_coordinates(const Matrix4& m, Field field, std::span<double> out) {
    const size_t need = static_cast<size_t>(dimension(field));
    if (out.size() < need) throw std::invalid_argument("state_coordinates: output too small");
    out[0] = m(0, 0).real();
    out[1] = m(1, 1).real();
    out[2] = m(2, 2).real();
    size_t k = 3;
    for (int r = 0; r < 4; ++r)
        for (int c = r + 1; c < 4; ++c) {
            out[k++] = m(r, c).real();
            if (field == Field::Qubit) out[k++] = m(r, c).imag();
        }
}

Eigen::MatrixXd numerical_jacobian(const VectorMap& map, std::span<const double> x, int out_dim, double h_rel) {
    if (!(h_rel > 0.0)) throw std::invalid_argument("numerical_jacobian: step must be positive");
    const int n = static_cast<int>(x.size());
    Eigen::MatrixXd j(out_dim, n);
    std::vector<double> xp(x.begin(), x.end());
    std::vector<double> f_hi(out_dim), f_lo(out_dim);
    for (int c = 0; c < n; ++c) {
        const double h = h_rel * std::max(1.0, std::abs(x[c]));
        xp[c] = x[c] + h;
        map(xp, f_hi);
        xp[c] = x[c] - h;
        map(xp, f_lo);
        xp[c] = x[c];
        for (int r = 0; r < out_dim; ++r) {
            if (!std::isfinite(f_hi[r]) || !std::isfinite(f_lo[r]))
                throw EstimationError("numerical_jacobian: map returned a non-finite value");
            j(r, c) = (f_hi[r] - f_lo[r]) / (2.0 * h);
        }
    }
    return j;
}

double gram_determinant(const Eigen::MatrixXd& j) {
    const Eigen::MatrixXd g = j.transpose() * j;
    return std::sqrt(std::max(0.0, g.determinant()));
}

VectorMap cholesky_to_entries_map(Field field) {
    return [field](std::span<const double> in, std::span<double> out) {
        const Matrix4 l = CholeskyFactor(field, in).lower();
        state_coordinates(l * l.adjoint(), field, out);
    };
}

// ---------------------------------------------------------------------------

double RebitVizResult::plane_octa_over_tetra() const { return ratio(plane.measure_octahedron, plane.tetrahedron()); }
double RebitVizResult::plane_cube_minus_tetra_over_tetra() const {
    return ratio(plane.measure_cube_minus_tetra, plane.tetrahedron());
}
double RebitVizResult::plane_entangled_over_witness() const {
    return ratio(plane.measure_tetra_minus_octa, plane.measure_cube_minus_tetra);
}
double RebitVizResult::extruded_octa_over_tetra() const {
    return ratio(extruded.measure_octahedron, extruded.tetrahedron());
}
double RebitVizResult::extruded_cube_minus_tetra_over_tetra() const {
    return ratio(extruded.measure_cube_minus_tetra, extruded.tetrahedron());
}
double RebitVizResult::extruded_entangled_over_witness() const {
    return ratio(extruded.measure_tetra_minus_octa, extruded.measure_cube_minus_tetra);
}

std::pair<Sl2rParam, Sl2rParam> rebit_viz_group_sample(const RebitVizConfig& cfg, std::uint64_t index) {
    const ScrambledSobol sobol(6, cfg.seed);
    std::array<double, 6> u{};
    sobol.point(index, u);
    const Sl2rParam first = bargmann_from_unit(u.data(), cfg.disk_radius);
    const Sl2rParam second = bargmann_from_unit(u.data() + 3, cfg.disk_radius);
    return cfg.swap_roles ? std::pair{second, first} : std::pair{first, second};
}

double rebit_gram_reference(const Sl2rParam& pa, const Sl2rParam& pb, double d1, double d3) {
    const VectorMap f = [](std::span<const double> in, std::span<double> out) {
        const Matrix2 a = bargmann_to_sl2r({in[0], in[1], in[2]});
        const Matrix2 b = bargmann_to_sl2r({in[3], in[4], in[5]});
        auto rho = conjugate_matrix(pauli_matrix({in[6], 0.0, in[7]}), a, b);
        if (!rho) throw EstimationError("vanishing conjugation trace");
        state_coordinates(*rho, Field::Rebit, out);
    };
    const std::array<double, 8> x{pa.gamma_re, pa.gamma_im, pa.omega, pb.gamma_re, pb.gamma_im, pb.omega, d1, d3};
    return gram_determinant(numerical_jacobian(f, x, 9));
}

RebitVizResult rebit_measure_map(const RebitVizConfig& cfg) {
    if (cfg.grid < 3) throw std::invalid_argument("rebit_measure_map: grid must be >= 3");
    if (cfg.n_qmc == 0) throw std::invalid_argument("rebit_measure_map: n_qmc must be positive");
    if (!(cfg.disk_radius > 0.0 && cfg.disk_radius < 1.0))
        throw std::invalid_argument("rebit_measure_map: disk radius must lie in (0, 1)");
    RebitVizResult res;
    res.config = cfg;
    const size_t k = cfg.grid;
    res.axis.resize(k);
    for (size_t i = 0; i < k; ++i) res.axis[i] = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(k - 1);

    const ScrambledSobol sobol(6, cfg.seed);
    auto map = [&](std::uint64_t begin, std::uint64_t end) {
        RebitAcc acc;
        acc.sum_g.assign(k * k, 0.0);
        acc.sum_g2.assign(k * k, 0.0);
        std::array<double, 6> u{};
        std::vector<double> g(k * k);
        for (std::uint64_t s = begin; s < end; ++s) {
            sobol.point(s, u);
            Sl2rParam pa = bargmann_from_unit(u.data(), cfg.disk_radius);
            Sl2rParam pb = bargmann_from_unit(u.data() + 3, cfg.disk_radius);
            if (cfg.swap_roles) std::swap(pa, pb);
            const RebitSampleJet jet(pa, pb);
            bool ok = true;
            for (size_t c = 0; c < k * k && ok; ++c) {
                const auto v = jet.gram(res.axis[c / k], res.axis[c % k]);
                ok = v.has_value();
                if (ok) g[c] = *v;
            }
            if (!ok) {
                acc.skipped += 1;
                continue;
            }
            for (size_t c = 0; c < k * k; ++c) {
                acc.sum_g[c] += g[c];
                acc.sum_g2[c] += g[c] * g[c];
            }
            acc.used += 1;
        }
        return acc;
    };
    const RebitAcc acc = chunked_reduce<RebitAcc>(0, cfg.n_qmc, cfg.workers, map);
    if (acc.used == 0) throw EstimationError("rebit_measure_map: every sample was skipped");

    const double n = static_cast<double>(acc.used);
    res.measure.resize(k * k);
    res.stderr_.resize(k * k);
    for (size_t c = 0; c < k * k; ++c) {
        const double mean = acc.sum_g[c] / n;
        const double var = n > 1 ? std::max(0.0, acc.sum_g2[c] / n - mean * mean) * n / (n - 1) : 0.0;
        res.measure[c] = mean;
        res.stderr_[c] = std::sqrt(var / n);
    }
    for (size_t i = 0; i < k; ++i)
        for (size_t j = 0; j < k; ++j) {
            const double d1 = res.axis[i], d3 = res.axis[j];
            const double m = res.measure[i * k + j];
            res.plane.add(classify_region({d1, 0.0, d3}), m);
            const double lt = tetrahedron_d2_length(d1, d3), lo = octahedron_d2_length(d1, d3);
            res.extruded.measure_octahedron += m * lo;
            res.extruded.measure_tetra_minus_octa += m * (lt - lo);
            res.extruded.measure_cube_minus_tetra += m * (2.0 - lt);
        }
    res.plane.samples_used = res.extruded.samples_used = acc.used;
    res.plane.samples_skipped = res.extruded.samples_skipped = acc.skipped;
    return res;
}

// ---------------------------------------------------------------------------

double qubit_jacobian_det(std::span<const double> params) {
    if (params.size() != 15) throw std::invalid_argument("qubit_jacobian_det: expected 15 parameters");
    const VectorMap f = [](std::span<const double> in, std::span<double> out) {
        state_coordinates(qubit_conjugated(in), Field::Qubit, out);
    };
    return numerical_jacobian(f, params, 15).determinant();
}

QubitVizResult qubit_measure_bins(const QubitVizConfig& cfg) {
    if (cfg.bins < 3 || cfg.bins % 2 == 0) throw std::invalid_argument("qubit_measure_bins: bins must be odd and >= 3");
    if (cfg.n_qmc == 0) throw std::invalid_argument("qubit_measure_bins: n_qmc must be positive");
    if (!(cfg.entry_bound > 0.0)) throw std::invalid_argument("qubit_measure_bins: entry bound must be positive");
    const size_t nb = cfg.bins;
    const ScrambledSobol sobol(15, cfg.seed);

    auto map = [&](std::uint64_t begin, std::uint64_t end) {
        QubitAcc acc;
        acc.bins.assign(nb * nb * nb, 0.0);
        std::array<double, 15> u{}, x{};
        for (std::uint64_t s = begin; s < end; ++s) {
            sobol.point(s, u);
            for (int p = 0; p < 12; ++p) x[p] = cfg.entry_bound * (2.0 * u[p] - 1.0);
            for (int p = 12; p < 15; ++p) x[p] = 2.0 * u[p] - 1.0;
            const DPoint d{x[12], x[13], x[14]};
            if (!in_tetrahedron(d)) {
                acc.outside += 1;
                continue;
            }
            double w = 0.0;
            if (cfg.identity_group) {
                w = identity_group_measure(d);
            } else {
                double det = 0.0;
                try {
                    det = qubit_jacobian_det(x);
                } catch (const std::exception&) {
                    acc.tally.samples_skipped += 1;
                    continue;
                }
                if (!std::isfinite(det) || std::abs(det) < 1e-250) {
                    acc.tally.samples_skipped += 1;
                    continue;
                }
                if (det < 0.0) acc.negative += 1;
                w = std::abs(det);
            }
            const Region r = classify_region(d);
            acc.tally.add(r, w);
            acc.tally.samples_used += 1;
            acc.bins[(bin_index(d.d1, nb) * nb + bin_index(d.d2, nb)) * nb + bin_index(d.d3, nb)] += w;
            acc.sum_w += w;
            acc.sum_w2 += w * w;
            if (r == Region::Separable) {
                acc.sum_ws += w;
                acc.sum_w2s += w * w;
            }
        }
        return acc;
    };
    const QubitAcc acc = chunked_reduce<QubitAcc>(0, cfg.n_qmc, cfg.workers, map);

    QubitVizResult res;
    res.config = cfg;
    res.bin_measure = acc.bins;
    if (res.bin_measure.empty()) res.bin_measure.assign(nb * nb * nb, 0.0);
    for (auto& m : res.marginals) m.assign(nb * nb, 0.0);
    for (size_t i1 = 0; i1 < nb; ++i1)
        for (size_t i2 = 0; i2 < nb; ++i2)
            for (size_t i3 = 0; i3 < nb; ++i3) {
                const double v = res.bin_measure[(i1 * nb + i2) * nb + i3];
                res.marginals[0][i2 * nb + i3] += v;
                res.marginals[1][i1 * nb + i3] += v;
                res.marginals[2][i1 * nb + i2] += v;
            }
    res.tally = acc.tally;
    res.outside_tetrahedron = acc.outside;
    res.negative_jacobian = acc.negative;
    const double used = static_cast<double>(acc.tally.samples_used);
    if (!(acc.sum_w > 0.0)) throw EstimationError("qubit_measure_bins: no usable samples");
    res.negative_fraction = static_cast<double>(acc.negative) / used;
    const double rr = acc.sum_ws / acc.sum_w;
    const double ss = acc.sum_w2s * (1.0 - 2.0 * rr) + rr * rr * acc.sum_w2;
    res.separability = rr;
    res.separability_stderr = used > 1 ? std::sqrt(std::max(0.0, used / (used - 1) * ss) / (acc.sum_w * acc.sum_w)) : 0.0;
    return res;
}

}  // namespace sepscope
