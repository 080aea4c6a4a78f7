#include "proctensor/choi.hpp"

#include "proctensor/errors.hpp"

#include <algorithm>
#include <cmath>

namespace proctensor {

CPMapChoi make_map(CMatrix choi, int d_in, int d_out, TraceClass trace_class) {
    if (d_in <= 0 || d_out <= 0) throw ValidationError("map dimensions must be positive");
    const long n = static_cast<long>(d_in) * d_out;
    if (choi.rows() != n || choi.cols() != n) {
        throw ValidationError("Choi matrix must be " + std::to_string(n) + "x" + std::to_string(n));
    }
    return CPMapChoi{std::move(choi), d_in, d_out, trace_class};
}

CPMapChoi choi_from_kraus(std::span<const CMatrix> kraus, int d_in, int d_out) {
    if (kraus.empty()) throw ValidationError("choi_from_kraus: empty Kraus list");
    const long n = static_cast<long>(d_in) * d_out;
    CMatrix choi = CMatrix::Zero(n, n);
    CMatrix kk = CMatrix::Zero(d_in, d_in);
    for (const auto& k : kraus) {
        if (k.rows() != d_out || k.cols() != d_in) {
            throw ValidationError("choi_from_kraus: Kraus operator must be d_out x d_in");
        }
        // Row-major vec(K) is the (out, in) ket of K ⊗ 1 |Φ+⟩.
        const CVector v = vec(k);
        choi += v * v.adjoint();
        kk += k.adjoint() * k;
    }
    const CMatrix id = CMatrix::Identity(d_in, d_in);
    TraceClass tc = TraceClass::unrestricted;
    if ((kk - id).cwiseAbs().maxCoeff() <= 1e-10) {
        tc = TraceClass::preserving;
    } else if (min_eigenvalue(id - kk) >= -1e-10) {
        tc = TraceClass::non_increasing;
    }
    return CPMapChoi{std::move(choi), d_in, d_out, tc};
}

CPMapChoi choi_from_kraus(std::initializer_list<CMatrix> kraus, int d_in, int d_out) {
    return choi_from_kraus(std::span<const CMatrix>(kraus.begin(), kraus.size()), d_in, d_out);
}

CPMapChoi unitary_map(const CMatrix& u) {
    if (u.rows() != u.cols()) throw ValidationError("unitary_map: matrix is not square");
    const int d = static_cast<int>(u.rows());
    return choi_from_kraus({u}, d, d);
}

CPMapChoi identity_map(int d) { return unitary_map(identity(d)); }

CPMapChoi preparation(const CMatrix& state) {
    if (state.rows() != state.cols()) throw ValidationError("preparation: state is not square");
    const int d = static_cast<int>(state.rows());
    const bool unit_trace = std::abs(state.trace() - Complex(1.0)) <= 1e-10;
    return CPMapChoi{state, 1, d, unit_trace ? TraceClass::preserving : TraceClass::unrestricted};
}

CMatrix apply_choi(const CPMapChoi& map, const CMatrix& rho) {
    if (rho.rows() != map.d_in || rho.cols() != map.d_in) {
        throw ValidationError("apply_choi: input state has the wrong dimension");
    }
    return pair_leg(map.choi, {map.d_out, map.d_in}, 1, rho);
}

CMatrix apply_on_system(const CPMapChoi& map, const CMatrix& rho_se, int d_sys, int d_env) {
    if (rho_se.rows() != static_cast<long>(d_sys) * d_env) {
        throw ValidationError("apply_on_system: state dimension does not match sys x env");
    }
    if (map.d_in == 1) {
        const CMatrix rho_e = partial_trace(rho_se, {d_sys, d_env}, {1});
        return kron(map.choi, rho_e);
    }
    if (map.d_in != d_sys) throw ValidationError("apply_on_system: map input dimension mismatch");
    // out[(a,e),(b,f)] = Σ_{k,i} Λ[(a,k),(b,i)] ρ[(k,e),(i,f)]
    const int dout = map.d_out;
    CMatrix out = CMatrix::Zero(static_cast<long>(dout) * d_env, static_cast<long>(dout) * d_env);
    for (int a = 0; a < dout; ++a) {
        for (int b = 0; b < dout; ++b) {
            auto dst = out.block(a * d_env, b * d_env, d_env, d_env);
            for (int k = 0; k < d_sys; ++k) {
                for (int i = 0; i < d_sys; ++i) {
                    const Complex c = map.choi(a * d_sys + k, b * d_sys + i);
                    if (c == Complex(0.0)) continue;
                    dst += c * rho_se.block(k * d_env, i * d_env, d_env, d_env);
                }
            }
        }
    }
    return out;
}

CPMapChoi causal_break(const CMatrix& p, const CMatrix& pi) {
    if (!is_density_matrix(p, 1e-10)) {
        throw ValidationError("causal_break: prepared state must be positive with unit trace");
    }
    if (pi.rows() != pi.cols() || !is_hermitian(pi, 1e-10) || min_eigenvalue(pi) < -1e-10 ||
        min_eigenvalue(CMatrix::Identity(pi.rows(), pi.cols()) - pi) < -1e-10) {
        throw ValidationError("causal_break: measurement operator must satisfy 0 <= Pi <= 1");
    }
    const bool complete = (pi - CMatrix::Identity(pi.rows(), pi.cols())).cwiseAbs().maxCoeff() <= 1e-12;
    return CPMapChoi{kron(p, pi.transpose()), static_cast<int>(pi.rows()), static_cast<int>(p.rows()),
                     complete ? TraceClass::preserving : TraceClass::non_increasing};
}

CPMapChoi seq_tensor(std::span<const CPMapChoi> maps) {
    if (maps.empty()) throw ValidationError("seq_tensor: empty sequence");
    CMatrix choi = CMatrix::Identity(1, 1);
    int d_in = 1, d_out = 1;
    bool all_tp = true, all_ni = true;
    for (const auto& m : maps) {
        choi = kron(choi, m.choi);
        d_in *= m.d_in;
        d_out *= m.d_out;
        all_tp = all_tp && m.trace_class == TraceClass::preserving;
        all_ni = all_ni && m.trace_class != TraceClass::unrestricted;
    }
    if (maps.size() == 1) return maps.front();
    // The combined object is a multi-step Choi matrix; d_in/d_out record the
    // products of the per-step dimensions (legs interleave out/in per step).
    const TraceClass tc = all_tp ? TraceClass::preserving
                          : all_ni ? TraceClass::non_increasing
                                   : TraceClass::unrestricted;
    return CPMapChoi{std::move(choi), d_in, d_out, tc};
}

CPMapChoi seq_tensor(std::initializer_list<CPMapChoi> maps) {
    return seq_tensor(std::span<const CPMapChoi>(maps.begin(), maps.size()));
}

CPMapChoi sequence_choi(std::span<const CPMapChoi> chronological_ops) {
    std::vector<CPMapChoi> reversed(chronological_ops.rbegin(), chronological_ops.rend());
    return seq_tensor(reversed);
}

CMatrix output_marginal(const CPMapChoi& map) {
    return partial_trace(map.choi, {map.d_out, map.d_in}, {1});
}

bool is_trace_preserving(const CPMapChoi& map, double tolerance) {
    return (output_marginal(map) - CMatrix::Identity(map.d_in, map.d_in)).cwiseAbs().maxCoeff() <=
           tolerance;
}

bool is_completely_positive(const CPMapChoi& map, double tolerance) {
    return is_positive_semidefinite(map.choi, tolerance);
}

CMatrix effect(const CPMapChoi& map) { return output_marginal(map).transpose(); }

CMatrix superoperator(const CPMapChoi& map) {
    // Λ̂[ρ]_{ab} = Σ_{k,i} Λ[(a,k),(b,i)] ρ_{ki}
    const int dout = map.d_out, din = map.d_in;
    CMatrix s(static_cast<long>(dout) * dout, static_cast<long>(din) * din);
    for (int a = 0; a < dout; ++a)
        for (int b = 0; b < dout; ++b)
            for (int k = 0; k < din; ++k)
                for (int i = 0; i < din; ++i) s(a * dout + b, k * din + i) = map.choi(a * din + k, b * din + i);
    return s;
}

}  // namespace proctensor
