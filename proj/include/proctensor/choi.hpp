#pragma once

// Choi representation of (trace non-increasing) CP maps.
//
// A map Λ̂: B(H_in) → B(H_out) is stored as
//   Λ = Σ_ij Λ̂[|i⟩⟨j|] ⊗ |i⟩⟨j|   ∈ B(H_out) ⊗ B(H_in),
// built from the unnormalised maximally entangled state, and acts as
//   Λ̂[ρ] = tr_in[(1_out ⊗ ρᵀ) Λ].
//
// Multi-step objects put the latest step leftmost:
//   step_{N-1} ⊗ ... ⊗ step_0,   each step = (out_k ⊗ in_k).
// A preparation is a map with d_in = 1; its Choi matrix is the prepared state.

#include "proctensor/linalg.hpp"

#include <span>
#include <vector>

namespace proctensor {

enum class TraceClass { preserving, non_increasing, unrestricted };

struct CPMapChoi {
    CMatrix choi;
    int d_in = 0;
    int d_out = 0;
    TraceClass trace_class = TraceClass::unrestricted;

    int leg_dim() const { return d_in * d_out; }
};

// Checked constructor: validates the Choi dimensions.
CPMapChoi make_map(CMatrix choi, int d_in, int d_out, TraceClass trace_class = TraceClass::unrestricted);

CPMapChoi choi_from_kraus(std::span<const CMatrix> kraus, int d_in, int d_out);
CPMapChoi choi_from_kraus(std::initializer_list<CMatrix> kraus, int d_in, int d_out);
CPMapChoi unitary_map(const CMatrix& u);
CPMapChoi identity_map(int d);
// Prepares `state` irrespective of the input; d_in = 1.
CPMapChoi preparation(const CMatrix& state);

CMatrix apply_choi(const CPMapChoi& map, const CMatrix& rho);

// Applies `map` to the first factor of a state on sys ⊗ env.  A preparation
// (d_in = 1) discards the system and prepares its output.
CMatrix apply_on_system(const CPMapChoi& map, const CMatrix& rho_se, int d_sys, int d_env);

// Measure Π, reprepare P: Choi P ⊗ Πᵀ.
CPMapChoi causal_break(const CMatrix& p, const CMatrix& pi);

// Kronecker product of the maps in the given order.  Pass the latest step
// first: seq_tensor({A_{N-1}, ..., A_0}).
CPMapChoi seq_tensor(std::span<const CPMapChoi> maps);
CPMapChoi seq_tensor(std::initializer_list<CPMapChoi> maps);

// Same as seq_tensor but takes the operations in chronological order
// (ops[k] acts at t_k).
CPMapChoi sequence_choi(std::span<const CPMapChoi> chronological_ops);

// tr_out Λ; equals 1_in for trace-preserving maps.
CMatrix output_marginal(const CPMapChoi& map);
bool is_trace_preserving(const CPMapChoi& map, double tolerance = 1e-10);
bool is_completely_positive(const CPMapChoi& map, double tolerance = tol::kPositive);
// POVM element realised by the map: tr Λ̂[ρ] = tr(Π ρ) with Π = (tr_out Λ)ᵀ.
CMatrix effect(const CPMapChoi& map);

// Superoperator S with vec(Λ̂[ρ]) = S vec(ρ) (row-major vectorisation).
CMatrix superoperator(const CPMapChoi& map);

}  // namespace proctensor
