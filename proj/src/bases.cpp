#include "proctensor/bases.hpp"

#include "proctensor/errors.hpp"

#include <Eigen/QR>

#include <cmath>
#include <random>

namespace proctensor {

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

CVector basis_ket(int d, int k) {
    CVector v = CVector::Zero(d);
    v(k) = 1.0;
    return v;
}

CPMapChoi projective_map(const CMatrix& q) {
    return CPMapChoi{kron(q, q.transpose()), static_cast<int>(q.rows()), static_cast<int>(q.rows()),
                     TraceClass::non_increasing};
}

int grown_rank(const std::vector<CPMapChoi>& kept, const CPMapChoi& candidate) {
    std::vector<CPMapChoi> trial = kept;
    trial.push_back(candidate);
    return numerical_rank(gram_matrix(trial), 1e-9);
}

CVector random_ket(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    CVector v(d);
    for (int i = 0; i < d; ++i) v(i) = Complex(n(rng), n(rng));
    return v.normalized();
}

CMatrix haar_from_rng(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    CMatrix g(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g(i, j) = Complex(n(rng), n(rng)) * kInvSqrt2;
    Eigen::HouseholderQR<CMatrix> qr(g);
    CMatrix q = qr.householderQ();
    const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    // Fix the phases of R's diagonal so Q is Haar distributed.
    for (int j = 0; j < d; ++j) {
        const Complex rd = r(j, j);
        const double a = std::abs(rd);
        if (a > 0.0) q.col(j) *= rd / a;
    }
    return q;
}

}  // namespace

std::string to_string(BasisLabel label) {
    switch (label) {
        case BasisLabel::full: return "full";
        case BasisLabel::unitary: return "unitary";
        case BasisLabel::projective: return "projective";
        case BasisLabel::preparation: return "preparation";
        case BasisLabel::custom: return "custom";
    }
    return "custom";
}

BasisLabel basis_label_from_string(const std::string& s) {
    if (s == "full") return BasisLabel::full;
    if (s == "unitary") return BasisLabel::unitary;
    if (s == "projective") return BasisLabel::projective;
    if (s == "preparation") return BasisLabel::preparation;
    if (s == "custom") return BasisLabel::custom;
    throw ValidationError("unknown basis label '" + s + "'");
}

CMatrix gram_matrix(const std::vector<CPMapChoi>& elements) {
    const int n = static_cast<int>(elements.size());
    CMatrix g(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = a; b < n; ++b) {
            // tr(A B) = Σ_ij A_ij B_ji
            g(a, b) = elements[a].choi.cwiseProduct(elements[b].choi.transpose()).sum();
            g(b, a) = g(a, b);
        }
    return g;
}

std::vector<CMatrix> compute_duals(const std::vector<CPMapChoi>& elements) {
    if (elements.empty()) throw ValidationError("compute_duals: empty basis");
    const CMatrix g = gram_matrix(elements);
    const int n = static_cast<int>(elements.size());
    if (numerical_rank(g, 1e-10) < n) throw ValidationError("linearly dependent basis");
    const CMatrix ginv = g.fullPivLu().inverse();
    std::vector<CMatrix> duals;
    duals.reserve(n);
    for (int m = 0; m < n; ++m) {
        CMatrix theta = CMatrix::Zero(elements[m].choi.rows(), elements[m].choi.cols());
        for (int v = 0; v < n; ++v) theta += ginv(m, v) * elements[v].choi;
        // Hermitian up to rounding; remove the drift.
        duals.push_back(0.5 * (theta + theta.adjoint()));
    }
    return duals;
}

OpBasis make_basis(std::vector<CPMapChoi> elements, BasisLabel label) {
    if (elements.empty()) throw ValidationError("basis must have at least one element");
    const int d_in = elements.front().d_in, d_out = elements.front().d_out;
    for (const auto& e : elements) {
        if (e.d_in != d_in || e.d_out != d_out) {
            throw ValidationError("basis elements must share input and output dimensions");
        }
        if (!is_hermitian(e.choi, tol::kHermitian)) {
            throw ValidationError("basis elements must be Hermitian Choi matrices");
        }
    }
    OpBasis b;
    b.duals = compute_duals(elements);
    b.span_dim = static_cast<int>(elements.size());
    b.elements = std::move(elements);
    b.label = label;
    b.d_in = d_in;
    b.d_out = d_out;
    return b;
}

std::vector<CMatrix> state_basis(int d) {
    if (d < 1) throw ValidationError("dimension must be positive");
    const CMatrix id = identity(2);
    if (d == 2) {
        return {0.5 * (id + pauli_z()), 0.5 * (id + pauli_x()), 0.5 * (id - pauli_x()),
                0.5 * (id + pauli_y())};
    }
    std::vector<CMatrix> out;
    for (int k = 0; k < d; ++k) out.push_back(projector(basis_ket(d, k)));
    for (int k = 0; k < d; ++k)
        for (int l = k + 1; l < d; ++l) {
            out.push_back(projector(basis_ket(d, k) + basis_ket(d, l)));
            out.push_back(projector(basis_ket(d, k) + Complex(0, 1) * basis_ket(d, l)));
        }
    return out;
}

OpBasis full_op_basis(int d) {
    if (d < 2) throw ValidationError("full_op_basis: d must be at least 2");
    const auto states = state_basis(d);
    std::vector<CPMapChoi> el;
    el.reserve(states.size() * states.size());
    for (const auto& qi : states)
        for (const auto& qj : states) el.push_back(causal_break(qi, qj));
    return make_basis(std::move(el), BasisLabel::full);
}

std::vector<CMatrix> unitary_basis_qubit_operators() {
    const CMatrix id = identity(2);
    const CMatrix s[3] = {pauli_x(), pauli_y(), pauli_z()};
    const Complex i(0.0, 1.0);
    std::vector<CMatrix> ops{id};
    for (int j = 0; j < 3; ++j) {
        ops.push_back(kInvSqrt2 * (id + i * s[j]));
        ops.push_back(kInvSqrt2 * (id - i * s[j]));
    }
    for (int j = 0; j < 3; ++j)
        for (int k = j + 1; k < 3; ++k) ops.push_back(kInvSqrt2 * (id + i * kInvSqrt2 * (s[j] + s[k])));
    return ops;
}

OpBasis unitary_basis_qubit() {
    std::vector<CPMapChoi> el;
    for (const auto& u : unitary_basis_qubit_operators()) el.push_back(unitary_map(u));
    return make_basis(std::move(el), BasisLabel::unitary);
}

OpBasis projective_basis_qubit() {
    const CMatrix id = identity(2);
    const CMatrix s[3] = {pauli_x(), pauli_y(), pauli_z()};
    std::vector<CPMapChoi> el;
    for (int j = 0; j < 3; ++j) {
        el.push_back(projective_map(0.5 * (id + s[j])));
        el.push_back(projective_map(0.5 * (id - s[j])));
    }
    for (int k = 0; k < 3; ++k)
        for (int l = k + 1; l < 3; ++l) el.push_back(projective_map(0.5 * (id + kInvSqrt2 * (s[k] + s[l]))));
    return make_basis(std::move(el), BasisLabel::projective);
}

OpBasis projective_basis(int d, std::uint64_t seed) {
    if (d < 2) throw ValidationError("projective_basis: d must be at least 2");
    if (d == 2) return projective_basis_qubit();
    const int target = d * d * (d + 1) * (d + 1) / 4;
    std::mt19937_64 rng(seed);
    std::vector<CPMapChoi> kept;
    const int max_attempts = 50 * target;
    for (int attempt = 0; attempt < max_attempts && static_cast<int>(kept.size()) < target; ++attempt) {
        CPMapChoi cand = projective_map(projector(random_ket(d, rng)));
        if (grown_rank(kept, cand) > static_cast<int>(kept.size())) kept.push_back(std::move(cand));
    }
    if (static_cast<int>(kept.size()) < target) {
        throw NumericalError("projective_basis: rank growth stalled at " + std::to_string(kept.size()));
    }
    return make_basis(std::move(kept), BasisLabel::projective);
}

CMatrix haar_unitary(int d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return haar_from_rng(d, rng);
}

OpBasis random_unitary_basis(int d, std::uint64_t seed) {
    if (d < 2) throw ValidationError("random_unitary_basis: d must be at least 2");
    const int target = (d * d - 1) * (d * d - 1) + 1;
    std::mt19937_64 rng(seed);
    std::vector<CPMapChoi> kept;
    const int max_attempts = 50 * target;
    for (int attempt = 0; attempt < max_attempts && static_cast<int>(kept.size()) < target; ++attempt) {
        CPMapChoi cand = unitary_map(haar_from_rng(d, rng));
        if (grown_rank(kept, cand) > static_cast<int>(kept.size())) kept.push_back(std::move(cand));
    }
    if (static_cast<int>(kept.size()) < target) {
        throw NumericalError("random_unitary_basis: rank growth stalled at " + std::to_string(kept.size()));
    }
    return make_basis(std::move(kept), BasisLabel::unitary);
}

OpBasis preparation_basis(int d) {
    std::vector<CPMapChoi> el;
    for (const auto& s : state_basis(d)) el.push_back(preparation(s));
    return make_basis(std::move(el), BasisLabel::preparation);
}

SpanDecomposition span_decompose(const CMatrix& x, const OpBasis& basis) {
    if (basis.elements.empty()) throw ValidationError("span_decompose: empty basis");
    const auto& ref = basis.elements.front().choi;
    if (x.rows() != ref.rows() || x.cols() != ref.cols()) {
        throw ValidationError("span_decompose: dimension mismatch");
    }
    SpanDecomposition out;
    CMatrix recon = CMatrix::Zero(x.rows(), x.cols());
    for (int m = 0; m < basis.size(); ++m) {
        const Complex b = basis.duals[m].cwiseProduct(x.transpose()).sum();
        out.coefficients.push_back(b);
        recon += b * basis.elements[m].choi;
    }
    out.residual = (x - recon).norm();
    const double n = x.norm();
    out.relative_residual = n > 0.0 ? out.residual / n : 0.0;
    out.in_span = out.relative_residual < tol::kSpanMembership;
    return out;
}

CMatrix span_projector(const OpBasis& basis) {
    const long dim = basis.leg_dim();
    CMatrix s = CMatrix::Zero(dim * dim, dim * dim);
    for (int m = 0; m < basis.size(); ++m) {
        // tr(Θ Y) = Σ_ij Θ_ji Y_ij = vec(Θᵀ) · vec(Y)
        s += vec(basis.elements[m].choi) * vec(basis.duals[m].transpose()).transpose();
    }
    return s;
}

std::vector<CMatrix> overcomplete_projectors(int d) {
    if (d < 2) throw ValidationError("overcomplete_projectors: d must be at least 2");
    const Complex i(0.0, 1.0);
    std::vector<CMatrix> out;
    for (int k = 0; k < d; ++k) out.push_back(projector(basis_ket(d, k)));
    for (int k = 0; k < d; ++k)
        for (int l = k + 1; l < d; ++l) {
            out.push_back(projector(basis_ket(d, k) + basis_ket(d, l)));
            out.push_back(projector(basis_ket(d, k) - basis_ket(d, l)));
            out.push_back(projector(basis_ket(d, k) + i * basis_ket(d, l)));
            out.push_back(projector(basis_ket(d, k) - i * basis_ket(d, l)));
        }
    return out;
}

bool projective_span_membership(const CMatrix& x, double tolerance) {
    const long n = x.rows();
    const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(n))));
    if (x.cols() != n || static_cast<long>(d) * d != n) {
        throw ValidationError("projective_span_membership: expected a d^2 x d^2 matrix");
    }
    // N[(k,k'),(l,l')] with row = k*d + k', col = l*d + l'.
    auto at = [&](int a, int b, int c, int e) { return x(a * d + b, c * d + e); };
    for (int k = 0; k < d; ++k)
        for (int kp = 0; kp < d; ++kp)
            for (int l = 0; l < d; ++l)
                for (int lp = 0; lp < d; ++lp) {
                    const Complex v = at(k, kp, l, lp);
                    if (std::abs(v - at(lp, l, kp, k)) > tolerance) return false;
                    if (std::abs(v - at(k, l, kp, lp)) > tolerance) return false;
                    if (std::abs(std::conj(v) - at(kp, k, lp, l)) > tolerance) return false;
                }
    return true;
}

}  // namespace proctensor
