#pragma once

// Ground-truth simulation of a system coupled to an environment, with local
// operations kicked in at the grid times t_0 .. t_{N-1} and the reduced
// system state read out at t_N.

#include "proctensor/choi.hpp"

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace proctensor {

// Explicit SE unitaries, one per interval [t_k, t_{k+1}].
struct MatrixUnitaryEnv {
    std::vector<CMatrix> unitaries;
};

// H = ω(σx⊗σx + σy⊗σy + σz⊗σz) on a qubit system and a qubit environment.
struct HeisenbergEnv {
    double omega = 1.0;
};

// H = (g/2) σz ⊗ x̂ with a Lorentzian (Cauchy) distributed x of width γ.
// The environment never appears explicitly; env dimension is 1.
struct ShallowPocketEnv {
    double g = 1.0;
    double gamma = 1.0;
};

// Every interval applies the SE swap, whatever its length.
struct SwapEnv {};

using EnvModel = std::variant<MatrixUnitaryEnv, HeisenbergEnv, ShallowPocketEnv, SwapEnv>;

std::string env_variant_name(const EnvModel& env);

// Two-qubit X-state, layout in the |00>,|01>,|10>,|11> basis.
struct XStateParams {
    double a11 = 0.0, a22 = 0.0, a33 = 0.0, a44 = 0.0;
    Complex a14 = 0.0, a23 = 0.0;
};

struct ProductInitial {
    CMatrix rho_s;
    CMatrix rho_e;
};

using InitialSpec = std::variant<XStateParams, CMatrix, ProductInitial>;

struct Scenario {
    int d_sys = 2;
    EnvModel env;
    InitialSpec initial;
    std::vector<double> times;
    std::string label;
    // "Do nothing" operation used to fill untouched steps; identity if unset.
    std::optional<CPMapChoi> default_map;

    int n_steps() const { return static_cast<int>(times.size()) - 1; }
};

int env_dim(const Scenario& sc);
CMatrix initial_state(const Scenario& sc);  // on sys ⊗ env
// Throws ValidationError when the scenario is malformed.
void validate(const Scenario& sc);

// Same dynamics, initial state replaced by ρ_S ⊗ ρ_E built from the marginals.
Scenario product_counterpart(const Scenario& sc);

// Product state obtained the long way: two copies of ρ_SE, swap S with the
// second copy's S, discard the second copy.
CMatrix swap_trick_product(const CMatrix& rho_se, int d_sys, int d_env);

CMatrix xstate(const XStateParams& p);
CMatrix heisenberg_hamiltonian(double omega);
CMatrix heisenberg_unitary(double omega, double t);
CMatrix swap_unitary();

// SE unitary for interval k of a unitary-type scenario.
CMatrix interval_unitary(const Scenario& sc, int k);

struct SimulationResult {
    CMatrix state;
    bool all_cp = true;  // false when some op has a non-positive Choi matrix
};

// ops in chronological order, one per step; ops[k] acts at t_k.  A
// preparation (d_in = 1) discards the system and reprepares it.
SimulationResult simulate(const Scenario& sc, std::span<const CPMapChoi> ops);
CMatrix run_sequence(const Scenario& sc, std::span<const CPMapChoi> ops);
CMatrix run_sequence(const Scenario& sc, std::initializer_list<CPMapChoi> ops);

// Evaluates a temporally correlated multi-step operation (leg order
// step_{N-1} ⊗ ... ⊗ step_0) by expanding it over products of matrix units
// and summing simulated outputs.
CMatrix run_correlated(const Scenario& sc, const CPMapChoi& multi_step, const std::vector<int>& d_in_per_step,
                       const std::vector<int>& d_out_per_step);

using Oracle = std::function<CMatrix(std::span<const CPMapChoi>)>;
Oracle make_oracle(const Scenario& sc);

// Exact shallow-pocket evolution.  ops[k] acts right before interval k of
// length durations[k]; with ops.size() == durations.size() - 1 the last
// interval runs without a kick.
CMatrix shallow_pocket_evolve(const CMatrix& rho0, std::span<const CPMapChoi> ops,
                              std::span<const double> durations, double g, double gamma);

// Equal intervals dt separated by the interior ops (ops.size() + 1 intervals).
CMatrix shallow_pocket_channel(std::span<const CPMapChoi> ops, double dt, double g, double gamma,
                               const CMatrix& rho0);

// Closed-form solution of the pure-dephasing master equation: coherences decay
// as exp(-|g| γ t).
CMatrix lindblad_dephase(const CMatrix& rho, double t, double g, double gamma);

}  // namespace proctensor
