#pragma once

#include "proctensor/choi.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace proctensor {

// `preparation` marks a basis of state preparations (d_in = 1), used for the
// initial-state leg of a tensor.
enum class BasisLabel { full, unitary, projective, preparation, custom };

std::string to_string(BasisLabel label);
BasisLabel basis_label_from_string(const std::string& s);

struct OpBasis {
    std::vector<CPMapChoi> elements;
    std::vector<CMatrix> duals;
    BasisLabel label = BasisLabel::custom;
    int span_dim = 0;
    int d_in = 0;
    int d_out = 0;

    int size() const { return static_cast<int>(elements.size()); }
    int leg_dim() const { return d_in * d_out; }
};

// Validates the elements (equal dimensions, Hermitian, independent) and
// computes duals.
OpBasis make_basis(std::vector<CPMapChoi> elements, BasisLabel label);

// Θ_μ = Σ_ν (G⁻¹)_{μν} B_ν with G_{μν} = tr(B_μ B_ν).  Throws ValidationError
// "linearly dependent basis" when G is singular.
std::vector<CMatrix> compute_duals(const std::vector<CPMapChoi>& elements);

// Gram matrix tr(B_μ B_ν) of the Choi matrices.
CMatrix gram_matrix(const std::vector<CPMapChoi>& elements);

// Pure states |k⟩, (|k⟩+|l⟩)/√2, (|k⟩+i|l⟩)/√2 (k < l); for d = 2 these are
// Q1..Q4 = (1+σz)/2, (1+σx)/2, (1−σx)/2, (1+σy)/2 instead.
std::vector<CMatrix> state_basis(int d);

// d⁴ maps Q_i ⊗ Q_jᵀ (measure Q_j, prepare Q_i), ordered i-major.
OpBasis full_op_basis(int d);

// Z0 = 1, Z(j,±) = (1 ± iσ_j)/√2, Z(j+k+1,+) = (1 + iσ_j/√2 + iσ_k/√2)/√2,
// ordered Z0, (1,+), (1,−), (2,+), (2,−), (3,+), (3,−), (1,2), (1,3), (2,3).
OpBasis unitary_basis_qubit();
std::vector<CMatrix> unitary_basis_qubit_operators();

// Nine maps Q ⊗ Qᵀ: Q(j,±) = (1 ± σ_j)/2 then Q(k+l+1,+) = (1 + σ_k/√2 + σ_l/√2)/2.
OpBasis projective_basis_qubit();

// Greedy rank growth over seeded random pure states, up to d²(d+1)²/4 maps.
OpBasis projective_basis(int d, std::uint64_t seed = 1);

// Haar unitaries kept while they increase the Gram rank, up to (d²−1)²+1.
OpBasis random_unitary_basis(int d, std::uint64_t seed);

// Preparations of the state_basis(d) states (d_in = 1).
OpBasis preparation_basis(int d);

CMatrix haar_unitary(int d, std::uint64_t seed);

struct SpanDecomposition {
    std::vector<Complex> coefficients;
    double residual = 0.0;           // ‖x − Σ b_μ B_μ‖_F
    double relative_residual = 0.0;  // residual / ‖x‖_F (0 for x = 0)
    bool in_span = false;            // relative_residual < tol::kSpanMembership
};

SpanDecomposition span_decompose(const CMatrix& x, const OpBasis& basis);

// Superoperator of the oblique projector Y ↦ Σ tr(Θ_α Y) B_α onto the span,
// acting on row-major vec(Y).
CMatrix span_projector(const OpBasis& basis);

// 2d² − d rank-one projectors onto |k⟩, (|k⟩±|l⟩)/√2, (|k⟩±i|l⟩)/√2; their
// sum is (2d − 1)·1.
std::vector<CMatrix> overcomplete_projectors(int d);

// Index symmetries shared by every combination of Q ⊗ Qᵀ maps.  Necessary for
// membership; sufficient for d = 2.
bool projective_span_membership(const CMatrix& x, double tolerance = 1e-10);

}  // namespace proctensor
