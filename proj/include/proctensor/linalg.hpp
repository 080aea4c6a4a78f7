#pragma once

// Dense complex linear algebra used throughout the library.
//
// Index convention: a matrix on H_1 ⊗ ... ⊗ H_n is indexed row-major over the
// factors, i.e. the leftmost factor is the most significant digit.  All
// transposes are taken in the fixed computational basis.

#include <Eigen/Dense>

#include <complex>
#include <span>
#include <vector>

namespace proctensor {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

namespace tol {
inline constexpr double kHermitian = 1e-10;
inline constexpr double kPositive = 1e-10;
inline constexpr double kEquality = 1e-9;
inline constexpr double kSpanMembership = 1e-9;
}  // namespace tol

CMatrix kron(const CMatrix& a, const CMatrix& b);

// kron(factors[0], factors[1], ...); an empty list yields the 1x1 identity.
CMatrix kron_all(std::span<const CMatrix> factors);

// Reduced matrix over the factors listed in `keep` (factor order preserved).
// Throws std::invalid_argument("bad factorization") when prod(dims) does not
// match the matrix dimension.
CMatrix partial_trace(const CMatrix& m, const std::vector<int>& dims, const std::vector<int>& keep);

// Pairs the factor `leg` of `m` with `x`:
//   result = tr_leg[(1 ⊗ xᵀ ⊗ 1) m]
// i.e. result[r, c] = Σ_{k,i} x(k, i) · m[(r, leg=k), (c, leg=i)].
// The result lives on the remaining factors.
CMatrix pair_leg(const CMatrix& m, const std::vector<int>& dims, int leg, const CMatrix& x);

// Applies a superoperator to one tensor factor of `m`.  `superop` acts on the
// row-major vectorisation of that factor: vec(Y)[r * D + c] = Y(r, c).
CMatrix apply_leg_superop(const CMatrix& m, const std::vector<int>& dims, int leg,
                          const CMatrix& superop);

CMatrix identity(int d);
CMatrix pauli_x();
CMatrix pauli_y();
CMatrix pauli_z();
CMatrix ket_bra(const CVector& ket, const CVector& bra);
CMatrix projector(const CVector& ket);

// Row-major vectorisation.
CVector vec(const CMatrix& m);
CMatrix unvec(const CVector& v, int rows, int cols);

bool is_hermitian(const CMatrix& m, double tolerance = tol::kHermitian);
bool is_unitary(const CMatrix& m, double tolerance = 1e-12);
// Smallest eigenvalue of the Hermitian part of m.
double min_eigenvalue(const CMatrix& m);
bool is_positive_semidefinite(const CMatrix& m, double tolerance = tol::kPositive);
bool is_density_matrix(const CMatrix& m, double tolerance = tol::kPositive);

// exp(-i t h) for Hermitian h, through its eigendecomposition.
CMatrix unitary_evolution(const CMatrix& h, double t);

// ½‖a − b‖₁ for Hermitian a, b.
double trace_distance(const CMatrix& a, const CMatrix& b);

// Numerical rank via SVD with a relative threshold.
int numerical_rank(const CMatrix& m, double relative_tolerance = 1e-10);

double frobenius_distance(const CMatrix& a, const CMatrix& b);

}  // namespace proctensor
