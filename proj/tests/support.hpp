#pragma once

#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "sepscope/state.hpp"

namespace sepscope::test {

/// Uniform point of the closed n-ball with nonnegative first three coordinates.
inline std::vector<double> random_ball_point(std::mt19937_64& rng, Field field, double max_radius = 1.0) {
    const int n = dimension(field);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unif;
    std::vector<double> x(n);
    double norm = 0.0;
    for (auto& v : x) {
        v = gauss(rng);
        norm += v * v;
    }
    norm = std::sqrt(norm);
    const double r = max_radius * std::pow(unif(rng), 1.0 / n);
    for (int i = 0; i < n; ++i) x[i] *= r / norm;
    for (int i = 0; i < 3; ++i) x[i] = std::abs(x[i]);
    return x;
}

inline CholeskyFactor random_factor(std::mt19937_64& rng, Field field) {
    return CholeskyFactor(field, random_ball_point(rng, field));
}

/// Lower-triangular Gamma assembled directly from the coordinate ordering.
inline Matrix4 lower_from_coords(const std::vector<double>& x, Field field) {
    Matrix4 g = Matrix4::Zero();
    g(0, 0) = x[0];
    g(1, 1) = x[1];
    g(2, 2) = x[2];
    const int pos[6][2] = {{1, 0}, {2, 0}, {2, 1}, {3, 0}, {3, 1}, {3, 2}};
    size_t k = 3;
    double norm = 0.0;
    for (double v : x) norm += v * v;
    for (const auto& p : pos) {
        if (field == Field::Rebit) {
            g(p[0], p[1]) = x[k++];
        } else {
            g(p[0], p[1]) = Complex(x[k], x[k + 1]);
            k += 2;
        }
    }
    g(3, 3) = std::sqrt(std::max(0.0, 1.0 - norm));
    return g;
}

inline Eigen::Vector4d hermitian_eigenvalues(const Matrix4& m) {
    Eigen::SelfAdjointEigenSolver<Matrix4> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

/// 4x4 determinant by cofactor expansion, independent of any library decomposition.
inline Complex cofactor_det(const Matrix4& m) {
    auto det3 = [&](int skip_col) {
        int c[3], k = 0;
        for (int j = 0; j < 4; ++j)
            if (j != skip_col) c[k++] = j;
        return m(1, c[0]) * (m(2, c[1]) * m(3, c[2]) - m(2, c[2]) * m(3, c[1])) -
               m(1, c[1]) * (m(2, c[0]) * m(3, c[2]) - m(2, c[2]) * m(3, c[0])) +
               m(1, c[2]) * (m(2, c[0]) * m(3, c[1]) - m(2, c[1]) * m(3, c[0]));
    };
    Complex d = 0.0;
    for (int j = 0; j < 4; ++j) d += (j % 2 == 0 ? 1.0 : -1.0) * m(0, j) * det3(j);
    return d;
}

inline Matrix2 random_matrix2(std::mt19937_64& rng, bool complex_entries, double scale = 2.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    Matrix2 m;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) m(i, j) = Complex(u(rng), complex_entries ? u(rng) : 0.0);
    return m;
}

/// Rescales to unit determinant (principal square root of det).
inline Matrix2 unit_determinant(const Matrix2& m) { return m / std::sqrt(m.determinant()); }

}  // namespace sepscope::test
