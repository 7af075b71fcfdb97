#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace sepscope {

using Complex = std::complex<double>;
using Matrix4 = Eigen::Matrix<Complex, 4, 4>;
using Matrix2 = Eigen::Matrix<Complex, 2, 2>;

/// Scalar field of the density-matrix entries: real (two rebits) or complex (two qubits).
enum class Field { Rebit, Qubit };

/// Number of free real parameters of a unit-trace 4x4 density matrix.
constexpr int dimension(Field f) { return f == Field::Rebit ? 9 : 15; }

/// Exponent m of the radial factor r^m in the composite Hilbert-Schmidt jacobian.
constexpr int radial_exponent(Field f) { return f == Field::Rebit ? 17 : 29; }

/// Exponents (a, b, c) of Gamma11^a Gamma22^b Gamma33^c in the Cholesky jacobian.
struct DiagonalExponents {
    int a, b, c;
};
constexpr DiagonalExponents diagonal_exponents(Field f) {
    return f == Field::Rebit ? DiagonalExponents{4, 3, 2} : DiagonalExponents{7, 5, 3};
}

std::string_view to_string(Field f);
Field parse_field(std::string_view name);

class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class EstimationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace sepscope
