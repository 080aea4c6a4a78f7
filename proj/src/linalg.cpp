#include "proctensor/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace proctensor {

namespace {

long product(const std::vector<int>& dims) {
    return std::accumulate(dims.begin(), dims.end(), 1L, std::multiplies<>());
}

void check_factorization(const CMatrix& m, const std::vector<int>& dims) {
    if (m.rows() != m.cols()) {
        throw std::invalid_argument("bad factorization: matrix is not square");
    }
    for (int d : dims) {
        if (d <= 0) {
            throw std::invalid_argument("bad factorization: non-positive factor dimension");
        }
    }
    if (product(dims) != m.rows()) {
        throw std::invalid_argument("bad factorization: factor dimensions do not multiply to " +
                                    std::to_string(m.rows()));
    }
}

struct LegSplit {
    long left;
    long dim;
    long right;
};

LegSplit split_at(const std::vector<int>& dims, int leg) {
    if (leg < 0 || leg >= static_cast<int>(dims.size())) {
        throw std::invalid_argument("leg index out of range");
    }
    LegSplit s{1, dims[leg], 1};
    for (int i = 0; i < leg; ++i) s.left *= dims[i];
    for (std::size_t i = leg + 1; i < dims.size(); ++i) s.right *= dims[i];
    return s;
}

}  // namespace

CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

CMatrix kron_all(std::span<const CMatrix> factors) {
    CMatrix out = CMatrix::Identity(1, 1);
    for (const auto& f : factors) out = kron(out, f);
    return out;
}

CMatrix partial_trace(const CMatrix& m, const std::vector<int>& dims, const std::vector<int>& keep) {
    check_factorization(m, dims);
    const int n = static_cast<int>(dims.size());
    std::vector<bool> kept(n, false);
    for (int k : keep) {
        if (k < 0 || k >= n) throw std::invalid_argument("bad factorization: keep index out of range");
        kept[k] = true;
    }
    // Strides of the full index and of the reduced (kept) index.
    std::vector<long> stride(n), kept_stride(n, 0);
    long s = 1, ks = 1;
    for (int i = n - 1; i >= 0; --i) {
        stride[i] = s;
        s *= dims[i];
        if (kept[i]) {
            kept_stride[i] = ks;
            ks *= dims[i];
        }
    }
    const long out_dim = ks;
    // Enumerate (kept row, kept col, traced multi-index) through digit vectors.
    std::vector<int> traced;
    for (int i = 0; i < n; ++i) if (!kept[i]) traced.push_back(i);
    long traced_count = 1;
    for (int t : traced) traced_count *= dims[t];

    // Map each reduced index to its contribution to the full index.
    std::vector<long> kept_offset(out_dim, 0);
    for (long r = 0; r < out_dim; ++r) {
        long off = 0;
        for (int i = 0; i < n; ++i) {
            if (!kept[i]) continue;
            off += ((r / kept_stride[i]) % dims[i]) * stride[i];
        }
        kept_offset[r] = off;
    }
    std::vector<long> traced_offset(traced_count, 0);
    for (long t = 0; t < traced_count; ++t) {
        long rem = t, off = 0;
        for (int j = static_cast<int>(traced.size()) - 1; j >= 0; --j) {
            const int f = traced[j];
            off += (rem % dims[f]) * stride[f];
            rem /= dims[f];
        }
        traced_offset[t] = off;
    }

    CMatrix out = CMatrix::Zero(out_dim, out_dim);
    for (long r = 0; r < out_dim; ++r) {
        for (long c = 0; c < out_dim; ++c) {
            Complex acc = 0.0;
            for (long t = 0; t < traced_count; ++t) {
                acc += m(kept_offset[r] + traced_offset[t], kept_offset[c] + traced_offset[t]);
            }
            out(r, c) = acc;
        }
    }
    return out;
}

CMatrix pair_leg(const CMatrix& m, const std::vector<int>& dims, int leg, const CMatrix& x) {
    check_factorization(m, dims);
    const LegSplit s = split_at(dims, leg);
    if (x.rows() != s.dim || x.cols() != s.dim) {
        throw std::invalid_argument("pair_leg: operator dimension does not match leg dimension");
    }
    const long out_dim = s.left * s.right;
    CMatrix out = CMatrix::Zero(out_dim, out_dim);
    for (long l = 0; l < s.left; ++l) {
        for (long lp = 0; lp < s.left; ++lp) {
            for (long k = 0; k < s.dim; ++k) {
                for (long i = 0; i < s.dim; ++i) {
                    const Complex xv = x(k, i);
                    if (xv == Complex(0.0)) continue;
                    const long row0 = (l * s.dim + k) * s.right;
                    const long col0 = (lp * s.dim + i) * s.right;
                    out.block(l * s.right, lp * s.right, s.right, s.right) +=
                        xv * m.block(row0, col0, s.right, s.right);
                }
            }
        }
    }
    return out;
}

CMatrix apply_leg_superop(const CMatrix& m, const std::vector<int>& dims, int leg,
                          const CMatrix& superop) {
    check_factorization(m, dims);
    const LegSplit s = split_at(dims, leg);
    const long d2 = s.dim * s.dim;
    if (superop.rows() != d2 || superop.cols() != d2) {
        throw std::invalid_argument("apply_leg_superop: superoperator dimension mismatch");
    }
    CMatrix out = CMatrix::Zero(m.rows(), m.cols());
    for (long l = 0; l < s.left; ++l) {
        for (long lp = 0; lp < s.left; ++lp) {
            for (long a = 0; a < s.dim; ++a) {
                for (long b = 0; b < s.dim; ++b) {
                    auto dst = out.block((l * s.dim + a) * s.right, (lp * s.dim + b) * s.right,
                                         s.right, s.right);
                    for (long c = 0; c < s.dim; ++c) {
                        for (long d = 0; d < s.dim; ++d) {
                            const Complex sv = superop(a * s.dim + b, c * s.dim + d);
                            if (sv == Complex(0.0)) continue;
                            dst += sv * m.block((l * s.dim + c) * s.right, (lp * s.dim + d) * s.right,
                                                s.right, s.right);
                        }
                    }
                }
            }
        }
    }
    return out;
}

CMatrix identity(int d) { return CMatrix::Identity(d, d); }

CMatrix pauli_x() {
    CMatrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

CMatrix pauli_y() {
    CMatrix m(2, 2);
    m << 0, Complex(0, -1), Complex(0, 1), 0;
    return m;
}

CMatrix pauli_z() {
    CMatrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

CMatrix ket_bra(const CVector& ket, const CVector& bra) { return ket * bra.adjoint(); }

CMatrix projector(const CVector& ket) {
    const CVector n = ket.normalized();
    return n * n.adjoint();
}

CVector vec(const CMatrix& m) {
    CVector v(m.size());
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) v(r * m.cols() + c) = m(r, c);
    return v;
}

CMatrix unvec(const CVector& v, int rows, int cols) {
    if (v.size() != static_cast<Eigen::Index>(rows) * cols) {
        throw std::invalid_argument("unvec: size mismatch");
    }
    CMatrix m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = v(r * cols + c);
    return m;
}

bool is_hermitian(const CMatrix& m, double tolerance) {
    if (m.rows() != m.cols()) return false;
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tolerance;
}

bool is_unitary(const CMatrix& m, double tolerance) {
    if (m.rows() != m.cols()) return false;
    return (m.adjoint() * m - CMatrix::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() <= tolerance;
}

double min_eigenvalue(const CMatrix& m) {
    const CMatrix h = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

bool is_positive_semidefinite(const CMatrix& m, double tolerance) {
    return is_hermitian(m, tolerance) && min_eigenvalue(m) >= -tolerance;
}

bool is_density_matrix(const CMatrix& m, double tolerance) {
    return is_positive_semidefinite(m, tolerance) && std::abs(m.trace() - Complex(1.0)) <= tolerance;
}

CMatrix unitary_evolution(const CMatrix& h, double t) {
    if (!is_hermitian(h, 1e-12)) {
        throw std::invalid_argument("unitary_evolution: generator is not Hermitian");
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (h + h.adjoint()));
    const Eigen::VectorXd& w = es.eigenvalues();
    CVector phases(w.size());
    for (Eigen::Index i = 0; i < w.size(); ++i) phases(i) = std::exp(Complex(0.0, -w(i) * t));
    const CMatrix& v = es.eigenvectors();
    return v * phases.asDiagonal() * v.adjoint();
}

double trace_distance(const CMatrix& a, const CMatrix& b) {
    const CMatrix diff = a - b;
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (diff + diff.adjoint()), Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

int numerical_rank(const CMatrix& m, double relative_tolerance) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<CMatrix> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0) return 0;
    int rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > relative_tolerance * s(0)) ++rank;
    return rank;
}

double frobenius_distance(const CMatrix& a, const CMatrix& b) { return (a - b).norm(); }

}  // namespace proctensor
