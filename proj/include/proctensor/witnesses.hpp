#pragma once

#include "proctensor/process_tensor.hpp"

#include <optional>
#include <string>
#include <vector>

namespace proctensor {

struct CorrelationWitness {
    CMatrix k_matrix;
    double norm = 0.0;
    bool detected = false;
    std::string basis_label;
};

// K = T − L for one-step tensors built with the same basis, T from the
// correlated state and L from its product counterpart.  Detected when
// ‖K‖_F > relative_tolerance · ‖T‖_F.
CorrelationWitness correlation_memory(const ProcessTensor& pt_correlated, const ProcessTensor& pt_product,
                                      double relative_tolerance = 1e-9);

// K̂[A] = tr_E{U (A ⊗ 1)[χ] U†}; χ must have vanishing marginals.
CMatrix k_exact(const CMatrix& chi, const CMatrix& u_se, const CPMapChoi& probe);

// χ = ρ_SE − ρ_S ⊗ ρ_E
CMatrix correlation_part(const CMatrix& rho_se, int d_sys, int d_env);

struct CausalBreak {
    CMatrix prep;    // P
    CMatrix effect;  // Π
    CPMapChoi choi;  // P ⊗ Πᵀ
};

CausalBreak make_break(const CMatrix& prep, const CMatrix& effect);
// Every state_basis(d) preparation paired with every overcomplete projector.
std::vector<CausalBreak> overcomplete_breaks(int d);

struct MarkovViolation {
    int history1 = 0, history2 = 0;
    int break1 = 0, break2 = 0;
    double discrepancy = 0.0;
};

struct MarkovReport {
    std::vector<MarkovViolation> violations;
    bool is_markovian_within_test = true;
    double tolerance = 0.0;
    double max_discrepancy = 0.0;
};

// Breaks act at the last step; each history covers steps 0..N-2
// (chronological).  An empty history list means the single empty history,
// which is what one-step tensors need.
MarkovReport markov_test(const ProcessTensor& pt, const std::vector<std::vector<CPMapChoi>>& histories,
                         const std::vector<CausalBreak>& breaks, double tolerance = 1e-8);

struct CptpConsistency {
    double residual = 0.0;
    bool detected = false;
};

// Least-squares fit of one linear map L with y_α ≈ L(x_α) over the basis,
// where y_α is the tensor output for f_α and x_α the system state f_α hands to
// the dynamics.  Without rho_s every element must be a measure-and-reprepare
// map P ⊗ M, giving x_α = tr(y_α)·P/tr(P); with rho_s, x_α = f_α[ρ_S].
CptpConsistency cptp_consistency(const ProcessTensor& pt, const std::optional<CMatrix>& rho_s = std::nullopt,
                                 double tolerance = 1e-8);

struct DetectionCheck {
    double k_norm = 0.0;
    bool detected = false;
    bool violation_found = false;
    bool holds = true;  // detected ⇒ violation_found
    MarkovReport report;
};

// Instantiates the statement "detectable correlations ⇒ non-Markovian" for a
// unitary-type scenario: K from k_exact over the overcomplete break probes,
// then a Markov test on the one-step full tensor.
DetectionCheck detection_check(const Scenario& sc, double k_threshold = 1e-6, double markov_tolerance = 1e-8);
bool detection_implies_nonmarkov_check(const Scenario& sc);

}  // namespace proctensor
