#include "proctensor/simulator.hpp"

#include "proctensor/errors.hpp"

#include <cmath>

namespace proctensor {

std::string env_variant_name(const EnvModel& env) {
    struct V {
        std::string operator()(const MatrixUnitaryEnv&) const { return "matrix_unitary"; }
        std::string operator()(const HeisenbergEnv&) const { return "heisenberg_qubit"; }
        std::string operator()(const ShallowPocketEnv&) const { return "shallow_pocket"; }
        std::string operator()(const SwapEnv&) const { return "swap_qubit"; }
    };
    return std::visit(V{}, env);
}

int env_dim(const Scenario& sc) {
    if (std::holds_alternative<ShallowPocketEnv>(sc.env)) return 1;
    if (const auto* m = std::get_if<MatrixUnitaryEnv>(&sc.env)) {
        if (m->unitaries.empty() || sc.d_sys <= 0) throw ValidationError("matrix_unitary: no unitaries");
        const long n = m->unitaries.front().rows();
        if (n % sc.d_sys != 0) throw ValidationError("matrix_unitary: unitary dimension not divisible by d_sys");
        return static_cast<int>(n / sc.d_sys);
    }
    return 2;
}

CMatrix xstate(const XStateParams& p) {
    const double diag[4] = {p.a11, p.a22, p.a33, p.a44};
    for (int i = 0; i < 4; ++i) {
        if (diag[i] < 0.0) throw ValidationError("x-state: a" + std::to_string(i + 1) + std::to_string(i + 1) +
                                                 " must be nonnegative");
    }
    if (std::abs(p.a11 + p.a22 + p.a33 + p.a44 - 1.0) > 1e-10) {
        throw ValidationError("x-state: a11 + a22 + a33 + a44 must equal 1");
    }
    if (p.a22 * p.a33 < std::norm(p.a23) - 1e-12) {
        throw ValidationError("x-state: positivity requires a22*a33 >= |a23|^2");
    }
    if (p.a11 * p.a44 < std::norm(p.a14) - 1e-12) {
        throw ValidationError("x-state: positivity requires a11*a44 >= |a14|^2");
    }
    CMatrix r = CMatrix::Zero(4, 4);
    r(0, 0) = p.a11;
    r(1, 1) = p.a22;
    r(2, 2) = p.a33;
    r(3, 3) = p.a44;
    r(0, 3) = p.a14;
    r(3, 0) = std::conj(p.a14);
    r(1, 2) = p.a23;
    r(2, 1) = std::conj(p.a23);
    return r;
}

CMatrix initial_state(const Scenario& sc) {
    struct V {
        CMatrix operator()(const XStateParams& p) const { return xstate(p); }
        CMatrix operator()(const CMatrix& m) const { return m; }
        CMatrix operator()(const ProductInitial& p) const { return kron(p.rho_s, p.rho_e); }
    };
    return std::visit(V{}, sc.initial);
}

void validate(const Scenario& sc) {
    if (sc.d_sys < 1) throw ValidationError("scenario: d_sys must be positive");
    if (sc.times.size() < 2) throw ValidationError("scenario: times needs at least two entries");
    for (std::size_t i = 1; i < sc.times.size(); ++i) {
        if (!(sc.times[i] > sc.times[i - 1])) throw ValidationError("scenario: times must be strictly increasing");
    }
    if (const auto* sp = std::get_if<ShallowPocketEnv>(&sc.env)) {
        if (!(sp->gamma > 0.0)) throw ValidationError("shallow_pocket: gamma must be positive");
        if (sc.d_sys != 2) throw ValidationError("shallow_pocket: d_sys must be 2");
        if (std::holds_alternative<XStateParams>(sc.initial)) {
            throw ValidationError("shallow_pocket: initial state is a system state, not an x-state");
        }
    } else if (const auto* m = std::get_if<MatrixUnitaryEnv>(&sc.env)) {
        if (static_cast<int>(m->unitaries.size()) != sc.n_steps()) {
            throw ValidationError("matrix_unitary: need one unitary per interval");
        }
        const long n = m->unitaries.front().rows();
        for (const auto& u : m->unitaries) {
            if (u.rows() != n || !is_unitary(u, 1e-10)) {
                throw ValidationError("matrix_unitary: interval operators must be unitaries of equal size");
            }
        }
    } else if (sc.d_sys != 2) {
        throw ValidationError(env_variant_name(sc.env) + ": d_sys must be 2");
    }
    if (const auto* p = std::get_if<ProductInitial>(&sc.initial)) {
        if (p->rho_s.rows() != sc.d_sys || !is_density_matrix(p->rho_s, 1e-10)) {
            throw ValidationError("scenario: rho_s must be a d_sys density matrix");
        }
        if (p->rho_e.rows() != env_dim(sc) || !is_density_matrix(p->rho_e, 1e-10)) {
            throw ValidationError("scenario: rho_e must be an environment density matrix");
        }
    }
    const CMatrix rho = initial_state(sc);
    if (rho.rows() != static_cast<long>(sc.d_sys) * env_dim(sc) || rho.cols() != rho.rows()) {
        throw ValidationError("scenario: initial state has the wrong dimension");
    }
    if (!is_density_matrix(rho, 1e-10)) {
        throw ValidationError("scenario: initial state must be positive with unit trace");
    }
    if (sc.default_map) {
        if (sc.default_map->d_in != sc.d_sys || sc.default_map->d_out != sc.d_sys ||
            !is_trace_preserving(*sc.default_map, 1e-10)) {
            throw ValidationError("scenario: default map must be trace preserving on the system");
        }
    }
}

Scenario product_counterpart(const Scenario& sc) {
    Scenario out = sc;
    const int de = env_dim(sc);
    const CMatrix rho = initial_state(sc);
    out.initial = ProductInitial{partial_trace(rho, {sc.d_sys, de}, {0}), partial_trace(rho, {sc.d_sys, de}, {1})};
    out.label = sc.label.empty() ? "product" : sc.label + " (product)";
    return out;
}

CMatrix swap_trick_product(const CMatrix& rho_se, int d_sys, int d_env) {
    const long n = static_cast<long>(d_sys) * d_env;
    if (rho_se.rows() != n) throw ValidationError("swap_trick_product: dimension mismatch");
    const CMatrix two = kron(rho_se, rho_se);  // S E S' E'
    // Permutation |s e s' e'> -> |s' e s e'>.
    const long big = n * n;
    Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, long> perm(big);
    for (int s = 0; s < d_sys; ++s)
        for (int e = 0; e < d_env; ++e)
            for (int s2 = 0; s2 < d_sys; ++s2)
                for (int e2 = 0; e2 < d_env; ++e2) {
                    const long from = ((static_cast<long>(s) * d_env + e) * d_sys + s2) * d_env + e2;
                    const long to = ((static_cast<long>(s2) * d_env + e) * d_sys + s) * d_env + e2;
                    perm.indices()(from) = to;
                }
    const CMatrix swapped = perm * two * perm.transpose();
    return partial_trace(swapped, {d_sys, d_env, d_sys, d_env}, {0, 1});
}

CMatrix heisenberg_hamiltonian(double omega) {
    return omega * (kron(pauli_x(), pauli_x()) + kron(pauli_y(), pauli_y()) + kron(pauli_z(), pauli_z()));
}

CMatrix heisenberg_unitary(double omega, double t) { return unitary_evolution(heisenberg_hamiltonian(omega), t); }

CMatrix swap_unitary() {
    CMatrix s = CMatrix::Zero(4, 4);
    s(0, 0) = s(1, 2) = s(2, 1) = s(3, 3) = 1.0;
    return s;
}

CMatrix interval_unitary(const Scenario& sc, int k) {
    if (k < 0 || k >= sc.n_steps()) throw ValidationError("interval index out of range");
    const double dt = sc.times[k + 1] - sc.times[k];
    if (const auto* m = std::get_if<MatrixUnitaryEnv>(&sc.env)) return m->unitaries.at(k);
    if (const auto* h = std::get_if<HeisenbergEnv>(&sc.env)) return heisenberg_unitary(h->omega, dt);
    if (std::holds_alternative<SwapEnv>(sc.env)) return swap_unitary();
    throw ValidationError("shallow_pocket has no finite SE unitary");
}

SimulationResult simulate(const Scenario& sc, std::span<const CPMapChoi> ops) {
    if (static_cast<int>(ops.size()) != sc.n_steps()) {
        throw ValidationError("run_sequence: expected " + std::to_string(sc.n_steps()) + " operations, got " +
                              std::to_string(ops.size()));
    }
    SimulationResult res;
    for (const auto& op : ops) {
        if (op.d_out != sc.d_sys || (op.d_in != sc.d_sys && op.d_in != 1)) {
            throw ValidationError("run_sequence: operation dimension does not match the system");
        }
        if (min_eigenvalue(op.choi) < -tol::kPositive) res.all_cp = false;
    }
    if (const auto* sp = std::get_if<ShallowPocketEnv>(&sc.env)) {
        std::vector<double> durations;
        for (int k = 0; k < sc.n_steps(); ++k) durations.push_back(sc.times[k + 1] - sc.times[k]);
        res.state = shallow_pocket_evolve(initial_state(sc), ops, durations, sp->g, sp->gamma);
        return res;
    }
    const int de = env_dim(sc);
    CMatrix rho = initial_state(sc);
    for (int k = 0; k < sc.n_steps(); ++k) {
        rho = apply_on_system(ops[k], rho, sc.d_sys, de);
        const CMatrix u = interval_unitary(sc, k);
        rho = u * rho * u.adjoint();
    }
    res.state = partial_trace(rho, {sc.d_sys, de}, {0});
    return res;
}

CMatrix run_sequence(const Scenario& sc, std::span<const CPMapChoi> ops) { return simulate(sc, ops).state; }

CMatrix run_sequence(const Scenario& sc, std::initializer_list<CPMapChoi> ops) {
    return run_sequence(sc, std::span<const CPMapChoi>(ops.begin(), ops.size()));
}

CMatrix run_correlated(const Scenario& sc, const CPMapChoi& multi_step, const std::vector<int>& d_in_per_step,
                       const std::vector<int>& d_out_per_step) {
    const int n = sc.n_steps();
    if (static_cast<int>(d_in_per_step.size()) != n || static_cast<int>(d_out_per_step.size()) != n) {
        throw ValidationError("run_correlated: need per-step dimensions for every step");
    }
    // Leg p holds step n-1-p.
    std::vector<long> leg(n), stride(n);
    long total = 1;
    for (int p = n - 1; p >= 0; --p) {
        const int step = n - 1 - p;
        leg[p] = static_cast<long>(d_in_per_step[step]) * d_out_per_step[step];
        stride[p] = total;
        total *= leg[p];
    }
    if (multi_step.choi.rows() != total) throw ValidationError("run_correlated: Choi dimension mismatch");
    CMatrix out = CMatrix::Zero(sc.d_sys, sc.d_sys);
    std::vector<CPMapChoi> ops(n);
    for (long r = 0; r < total; ++r) {
        for (long c = 0; c < total; ++c) {
            const Complex coef = multi_step.choi(r, c);
            if (coef == Complex(0.0)) continue;
            for (int p = 0; p < n; ++p) {
                const int step = n - 1 - p;
                CMatrix e = CMatrix::Zero(leg[p], leg[p]);
                e((r / stride[p]) % leg[p], (c / stride[p]) % leg[p]) = 1.0;
                ops[step] = CPMapChoi{std::move(e), d_in_per_step[step], d_out_per_step[step],
                                      TraceClass::unrestricted};
            }
            out += coef * run_sequence(sc, ops);
        }
    }
    return out;
}

Oracle make_oracle(const Scenario& sc) {
    validate(sc);
    return [sc](std::span<const CPMapChoi> ops) { return run_sequence(sc, ops); };
}

CMatrix lindblad_dephase(const CMatrix& rho, double t, double g, double gamma) {
    if (rho.rows() != 2 || rho.cols() != 2) throw ValidationError("lindblad_dephase: qubit state required");
    if (t < 0.0) throw ValidationError("lindblad_dephase: t must be nonnegative");
    CMatrix out = rho;
    const double f = std::exp(-std::abs(g) * gamma * t);
    out(0, 1) *= f;
    out(1, 0) *= f;
    return out;
}

}  // namespace proctensor
