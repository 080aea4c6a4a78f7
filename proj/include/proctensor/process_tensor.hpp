#pragma once

// Multi-step process tensors.
//
// Leg order of the Choi matrix: out ⊗ step_{N-1} ⊗ ... ⊗ step_0 with each
// step leg = (out_k ⊗ in_k).  A preparation step (d_in = 1) has only its
// output factor; it is how an initial-state leg is modelled.

#include "proctensor/bases.hpp"
#include "proctensor/simulator.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace proctensor {

struct ProcessTensor {
    CMatrix choi;
    int n_steps = 0;
    int d_sys = 0;
    BasisLabel basis_label = BasisLabel::custom;
    std::vector<OpBasis> step_bases;  // step_bases[k] belongs to t_k

    // {d_sys, leg_{N-1}, ..., leg_0}
    std::vector<int> leg_dims() const;
    // Position of step k in leg_dims().
    int leg_position(int step) const { return n_steps - step; }
    long input_dim() const;
};

inline constexpr const char* kLegOrder = "out,step{N-1}..step0; step=(out,in)";

// Oracle outputs keyed by the basis indices (α_0, ..., α_{N-1}).
using ReconstructionCache = std::map<std::vector<int>, CMatrix>;

struct ReconstructOptions {
    int threads = 1;
    ReconstructionCache* cache = nullptr;
};

struct ReconstructStats {
    long oracle_calls = 0;
    long cache_hits = 0;
    double max_trace = 0.0;
    std::vector<std::string> warnings;
};

// Queries the oracle on every product sequence of basis elements and
// assembles Σ η_ᾱ ⊗ Θᵀ_{α_{N-1}} ⊗ ... ⊗ Θᵀ_{α_0}.  Sequences are enumerated in
// mixed-radix order with α_{N-1} most significant; the sum is formed in that
// order regardless of the thread count.
ProcessTensor reconstruct(const Oracle& oracle, const std::vector<OpBasis>& step_bases, int d_sys,
                          const ReconstructOptions& options = {}, ReconstructStats* stats = nullptr);
ProcessTensor reconstruct(const Oracle& oracle, const OpBasis& basis, int n_steps, int d_sys,
                          const ReconstructOptions& options = {}, ReconstructStats* stats = nullptr);

// Tensor with an initial-state leg: step 0 is a preparation basis, steps
// 1..n_steps-1 use `basis`.
ProcessTensor reconstruct_with_preparation(const Oracle& oracle, const OpBasis& basis, int n_steps, int d_sys,
                                           const ReconstructOptions& options = {},
                                           ReconstructStats* stats = nullptr);

// Output state for a (possibly correlated) multi-step operation in leg order.
// Never rejects out-of-span input; see span_residual.
CMatrix apply_choi_sequence(const ProcessTensor& pt, const CMatrix& seq_choi);

// A function object rather than an overload set: Eigen arguments make
// unqualified calls look in namespace std, where std::apply would win.
struct ApplyFn {
    CMatrix operator()(const ProcessTensor& pt, const CMatrix& seq_choi) const {
        return apply_choi_sequence(pt, seq_choi);
    }
    CMatrix operator()(const ProcessTensor& pt, const CPMapChoi& seq) const {
        return apply_choi_sequence(pt, seq.choi);
    }
};
inline constexpr ApplyFn apply{};
// Product sequence given chronologically.
CMatrix apply_sequence(const ProcessTensor& pt, std::span<const CPMapChoi> chronological_ops);

// ‖X − P(X)‖_F / ‖X‖_F with P the product of the per-step span projectors.
double span_residual(const ProcessTensor& pt, const CMatrix& seq_choi);
bool step_in_span(const OpBasis& basis, const CPMapChoi& op, double tolerance = tol::kSpanMembership);

// Pairs step `step` with `op`; returns the (N-1)-step conditional tensor.
ProcessTensor contract(const ProcessTensor& pt, int step, const CPMapChoi& op);

struct Subprocess {
    CMatrix choi;  // on legs step_{k-1} ⊗ ... ⊗ step_j
    int j = 0;
    int k = 0;
    std::string fill_ops_used;
};

// Default "do nothing" fill for a basis: identity if it lies in the span,
// otherwise dephasing in the computational basis.  Throws when neither does.
CPMapChoi default_fill(const OpBasis& basis);

// M^{k:j}: steps k..N-1 filled with `fill` (fill[i] acts at step k+i), steps
// 0..j-1 with `past_fill` (default_fill of each step's basis when unset), the
// output traced.  Throws ValidationError "inadmissible fill" when a fill is
// outside the span.
Subprocess containment_probability_map(const ProcessTensor& pt, int j, int k, const std::vector<CPMapChoi>& fill,
                                       const std::optional<CPMapChoi>& past_fill = std::nullopt);
// Probability of a (k−j)-step sequence given in leg order.
Complex probability(const Subprocess& m, const CMatrix& seq_choi);

// T^{k:0} recovered from an N-step tensor whose step-k basis contains an
// informationally complete set of effects.  Steps after k use default fills.
ProcessTensor intermediate_from_icpovm(const ProcessTensor& pt, int k);

struct PositivityReport {
    double min_eigenvalue = 0.0;
    bool is_positive = false;
};
PositivityReport positivity_report(const ProcessTensor& pt, double tolerance = 1e-8);

// Hierarchy of trace conditions: tr_out T = 1_{out_{N-1}} ⊗ T^{N-1:0}, and so on
// down to step 0.  Reports the largest deviation (Frobenius).
struct CausalityReport {
    double max_deviation = 0.0;
    bool causal = false;
};
CausalityReport causality_report(const ProcessTensor& pt, double tolerance = 1e-8);

// d_leg^N minus the number of basis sequences: basis directions the
// restricted tensor maps to zero.
long zeroed_dimension(const ProcessTensor& pt);

}  // namespace proctensor
