#include "oracles.hpp"
#include "proctensor/bases.hpp"
#include "proctensor/errors.hpp"

#include <gtest/gtest.h>

using namespace proctensor;

namespace {

CMatrix pauli(int j) { return j == 1 ? pauli_x() : j == 2 ? pauli_y() : pauli_z(); }

double max_duality_error(const OpBasis& b) {
    double worst = 0.0;
    for (int m = 0; m < b.size(); ++m)
        for (int n = 0; n < b.size(); ++n) {
            const Complex v = (b.duals[n] * b.elements[m].choi).trace();
            worst = std::max(worst, std::abs(v - (m == n ? 1.0 : 0.0)));
        }
    return worst;
}

CPMapChoi conj_map(const CMatrix& a, const CMatrix& b) {
    return make_map(oracle::choi_from_action([&](const CMatrix& r) { return CMatrix(a * r * b); }, 2), 2, 2);
}

}  // namespace

TEST(FullBasis, QubitCountsAndFirstElement) {
    const OpBasis b = full_op_basis(2);
    EXPECT_EQ(b.size(), 16);
    EXPECT_EQ(b.span_dim, 16);
    EXPECT_EQ(numerical_rank(gram_matrix(b.elements)), 16);
    const CMatrix q1 = 0.5 * (identity(2) + pauli_z());
    EXPECT_LT((b.elements[0].choi - kron(q1, q1.transpose())).norm(), 1e-15);
    EXPECT_LT(max_duality_error(b), 1e-10);
}

TEST(FullBasis, QutritCounts) {
    const OpBasis b = full_op_basis(3);
    EXPECT_EQ(b.size(), 81);
    EXPECT_EQ(numerical_rank(gram_matrix(b.elements)), 81);
    EXPECT_LT(max_duality_error(b), 1e-10);
}

TEST(StateBasis, QubitMatchesQ1ToQ4) {
    const auto q = state_basis(2);
    ASSERT_EQ(q.size(), 4u);
    EXPECT_LT((q[1] - 0.5 * (identity(2) + pauli_x())).norm(), 1e-15);
    EXPECT_LT((q[2] - 0.5 * (identity(2) - pauli_x())).norm(), 1e-15);
    EXPECT_LT((q[3] - 0.5 * (identity(2) + pauli_y())).norm(), 1e-15);
}

TEST(UnitaryBasis, SpanDimension) {
    const OpBasis b = unitary_basis_qubit();
    EXPECT_EQ(b.size(), 10);
    EXPECT_EQ(b.span_dim, 10);
    EXPECT_EQ(numerical_rank(gram_matrix(b.elements)), 10);
    EXPECT_LT(max_duality_error(b), 1e-10);
    for (const auto& u : unitary_basis_qubit_operators()) EXPECT_TRUE(is_unitary(u));
}

// σ_j ρ σ_j = Z_{(j,+)} + Z_{(j,−)} − Z₀ as maps.
TEST(UnitaryBasis, SquareDecompositionIdentity) {
    const OpBasis b = unitary_basis_qubit();
    for (int j = 1; j <= 3; ++j) {
        const CMatrix lhs = conj_map(pauli(j), pauli(j)).choi;
        const CMatrix rhs = b.elements[2 * j - 1].choi + b.elements[2 * j].choi - b.elements[0].choi;
        EXPECT_LT((lhs - rhs).norm(), 1e-10) << "j=" << j;
    }
}

// σ_jρσ_k + σ_kρσ_j = 4Z_(jk) − (1+√2)(Z_(j,+) + Z_(k,+)) − (1−√2)(Z_(j,−) + Z_(k,−)).
TEST(UnitaryBasis, CrossDecompositionIdentity) {
    const OpBasis b = unitary_basis_qubit();
    const double r2 = std::sqrt(2.0);
    const int pairs[3][2] = {{1, 2}, {1, 3}, {2, 3}};
    for (int p = 0; p < 3; ++p) {
        const int j = pairs[p][0], k = pairs[p][1];
        const CMatrix lhs = conj_map(pauli(j), pauli(k)).choi + conj_map(pauli(k), pauli(j)).choi;
        const CMatrix rhs = 4.0 * b.elements[7 + p].choi -
                            (1.0 + r2) * (b.elements[2 * j - 1].choi + b.elements[2 * k - 1].choi) -
                            (1.0 - r2) * (b.elements[2 * j].choi + b.elements[2 * k].choi);
        EXPECT_LT((lhs - rhs).norm(), 1e-10) << "pair " << j << k;
    }
}

TEST(UnitaryBasis, SpansEveryQubitUnitary) {
    const OpBasis b = unitary_basis_qubit();
    for (std::uint64_t s = 0; s < 100; ++s) {
        const SpanDecomposition sd = span_decompose(unitary_map(haar_unitary(2, 1000 + s)).choi, b);
        EXPECT_LT(sd.relative_residual, 1e-9);
        EXPECT_TRUE(sd.in_span);
    }
}

TEST(ProjectiveBasis, QubitCountsAndElements) {
    const OpBasis b = projective_basis_qubit();
    EXPECT_EQ(b.size(), 9);
    EXPECT_EQ(b.span_dim, 9);
    EXPECT_EQ(numerical_rank(gram_matrix(b.elements)), 9);
    for (const auto& e : b.elements) {
        EXPECT_GE(min_eigenvalue(e.choi), -1e-12);
        EXPECT_EQ(numerical_rank(e.choi), 1);
    }
    EXPECT_LT(max_duality_error(b), 1e-10);
}

TEST(ProjectiveBasis, SomeDualIsNotPositive) {
    const OpBasis b = projective_basis_qubit();
    double lowest = 0.0;
    for (const auto& d : b.duals) lowest = std::min(lowest, min_eigenvalue(d));
    EXPECT_LT(lowest, -1e-6);
}

TEST(ProjectiveBasis, QutritGreedyReachesBound) {
    const OpBasis b = projective_basis(3, 5);
    EXPECT_EQ(b.size(), 36);
    EXPECT_EQ(numerical_rank(gram_matrix(b.elements)), 36);
    EXPECT_LT(max_duality_error(b), 1e-9);
}

TEST(RandomUnitaryBasis, CountsAndChannelProperties) {
    const OpBasis b2 = random_unitary_basis(2, 17);
    EXPECT_EQ(b2.size(), 10);
    for (const auto& e : b2.elements) {
        EXPECT_GE(min_eigenvalue(e.choi), -1e-10);
        EXPECT_LT((output_marginal(e) - identity(2)).norm(), 1e-10);
    }
    const OpBasis b3 = random_unitary_basis(3, 17);
    EXPECT_EQ(b3.size(), 65);
    EXPECT_EQ(numerical_rank(gram_matrix(b3.elements)), 65);
}

TEST(RandomUnitaryBasis, DeterministicForSeed) {
    const OpBasis a = random_unitary_basis(2, 99), b = random_unitary_basis(2, 99);
    for (int i = 0; i < a.size(); ++i) EXPECT_EQ(a.elements[i].choi, b.elements[i].choi);
}

TEST(ComputeDuals, OrthonormalBasisIsSelfDual) {
    std::vector<CPMapChoi> els;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            const CMatrix pa = a == 0 ? identity(2) : pauli(a);
            const CMatrix pb = b == 0 ? identity(2) : pauli(b);
            els.push_back(make_map(0.5 * kron(pa, pb), 2, 2));
        }
    const auto duals = compute_duals(els);
    for (int i = 0; i < 16; ++i) EXPECT_LT((duals[i] - els[i].choi).norm(), 1e-12);
}

TEST(ComputeDuals, StatesQ1ToQ4) {
    const OpBasis b = preparation_basis(2);
    EXPECT_EQ(b.size(), 4);
    EXPECT_LT(max_duality_error(b), 1e-12);
}

TEST(ComputeDuals, DependentSetThrows) {
    std::vector<CPMapChoi> els{identity_map(2), unitary_map(pauli_x()), identity_map(2)};
    try {
        compute_duals(els);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("linearly dependent basis"), std::string::npos);
    }
}

TEST(SpanDecompose, ElementGivesUnitVector) {
    const OpBasis b = unitary_basis_qubit();
    const SpanDecomposition sd = span_decompose(b.elements[4].choi, b);
    for (int i = 0; i < b.size(); ++i) EXPECT_LT(std::abs(sd.coefficients[i] - (i == 4 ? 1.0 : 0.0)), 1e-12);
    EXPECT_LT(sd.residual, 1e-12);
}

TEST(SpanDecompose, UnitalVersusNonUnital) {
    const OpBasis b = unitary_basis_qubit();
    const CPMapChoi depol = make_map(0.5 * kron(identity(2), identity(2)), 2, 2);
    EXPECT_LT(span_decompose(depol.choi, b).residual, 1e-10);
    CMatrix k0 = CMatrix::Zero(2, 2), k1 = CMatrix::Zero(2, 2);
    k0(0, 0) = 1.0;
    k0(1, 1) = std::sqrt(0.5);
    k1(0, 1) = std::sqrt(0.5);
    const CPMapChoi ad = choi_from_kraus({k0, k1}, 2, 2);
    EXPECT_GT(span_decompose(ad.choi, b).residual, 0.1);
    EXPECT_FALSE(span_decompose(ad.choi, b).in_span);
}

TEST(SpanDecompose, RealCombinationsGiveRealCoefficients) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n;
    for (const OpBasis& b : {full_op_basis(2), unitary_basis_qubit(), projective_basis_qubit()}) {
        CMatrix x = CMatrix::Zero(4, 4);
        for (const auto& e : b.elements) x += n(rng) * e.choi;
        for (const Complex c : span_decompose(x, b).coefficients) EXPECT_LT(std::abs(c.imag()), 1e-10);
    }
}

TEST(SpanProjector, IdempotentAndFixesElements) {
    const OpBasis b = projective_basis_qubit();
    const CMatrix p = span_projector(b);
    EXPECT_LT((p * p - p).norm(), 1e-10);
    for (const auto& e : b.elements) EXPECT_LT((p * vec(e.choi) - vec(e.choi)).norm(), 1e-12);
}

TEST(OvercompleteProjectors, QubitAndQutrit) {
    for (int d : {2, 3}) {
        const auto ps = overcomplete_projectors(d);
        EXPECT_EQ(static_cast<int>(ps.size()), 2 * d * d - d);
        CMatrix sum = CMatrix::Zero(d, d);
        for (const auto& p : ps) {
            EXPECT_LT((p * p - p).norm(), 1e-12);
            sum += p;
        }
        EXPECT_LT((sum - (2.0 * d - 1.0) * identity(d)).norm(), 1e-12);
    }
}

TEST(ProjectiveSpanMembership, Examples) {
    for (std::uint64_t s = 0; s < 10; ++s) {
        const CVector v = haar_unitary(2, 50 + s).col(0);
        const CMatrix q = projector(v);
        EXPECT_TRUE(projective_span_membership(kron(q, q.transpose())));
    }
    EXPECT_FALSE(projective_span_membership(unitary_map(pauli_x()).choi));
    EXPECT_TRUE(projective_span_membership(CMatrix::Zero(4, 4)));
}

TEST(ProjectiveSpanMembership, AgreesWithDecompositionForQubits) {
    const OpBasis b = projective_basis_qubit();
    std::mt19937_64 rng(12);
    std::normal_distribution<double> n;
    for (int trial = 0; trial < 40; ++trial) {
        CMatrix x;
        if (trial % 2 == 0) {
            x = CMatrix::Zero(4, 4);
            for (const auto& e : b.elements) x += n(rng) * e.choi;
        } else {
            x = oracle::random_hermitian(4, rng);
        }
        EXPECT_EQ(projective_span_membership(x), span_decompose(x, b).in_span) << "trial " << trial;
    }
}

TEST(MakeBasis, RejectsMixedDimensions) {
    std::vector<CPMapChoi> els{identity_map(2), identity_map(3)};
    EXPECT_THROW(make_basis(els, BasisLabel::custom), ValidationError);
}

TEST(MakeBasis, RejectsNonHermitian) {
    CMatrix m = CMatrix::Zero(4, 4);
    m(0, 1) = 1.0;
    std::vector<CPMapChoi> els{make_map(m, 2, 2)};
    EXPECT_THROW(make_basis(els, BasisLabel::custom), ValidationError);
}

TEST(BasisLabel, StringRoundTrip) {
    for (auto l : {BasisLabel::full, BasisLabel::unitary, BasisLabel::projective, BasisLabel::preparation,
                   BasisLabel::custom})
        EXPECT_EQ(basis_label_from_string(to_string(l)), l);
    EXPECT_THROW(basis_label_from_string("bogus"), ValidationError);
}

TEST(HaarUnitary, UnitaryAndSeeded) {
    const CMatrix u = haar_unitary(3, 4);
    EXPECT_TRUE(is_unitary(u, 1e-12));
    EXPECT_EQ(u, haar_unitary(3, 4));
    EXPECT_NE(u, haar_unitary(3, 5));
}
