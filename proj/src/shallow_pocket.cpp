// Exact shallow-pocket dynamics.
//
// Conditioned on the environment coordinate x, an interval of length dt is
// U(x) = exp(-i g x dt σz / 2), which multiplies ρ_cd by
// exp(-i x g dt (s_c - s_d)/2) with s = (+1, -1).  Local kicks do not touch x,
// so the state stays a finite sum Σ_φ exp(-i φ x) M_φ.  Averaging over the
// Cauchy density uses E[exp(-i φ x)] = exp(-γ|φ|).

#include "proctensor/errors.hpp"
#include "proctensor/simulator.hpp"

#include <cmath>
#include <map>

namespace proctensor {

namespace {

constexpr double kPhaseMerge = 1e-12;

using Components = std::map<double, CMatrix>;

void accumulate(Components& comps, double phi, const CMatrix& m) {
    auto it = comps.lower_bound(phi - kPhaseMerge);
    if (it != comps.end() && std::abs(it->first - phi) <= kPhaseMerge) {
        it->second += m;
    } else {
        comps.emplace(phi, m);
    }
}

Components evolve(const Components& in, double g, double dt) {
    Components out;
    const double shift = g * dt;
    for (const auto& [phi, m] : in) {
        CMatrix diag = CMatrix::Zero(2, 2);
        diag(0, 0) = m(0, 0);
        diag(1, 1) = m(1, 1);
        accumulate(out, phi, diag);
        CMatrix up = CMatrix::Zero(2, 2);
        up(0, 1) = m(0, 1);
        accumulate(out, phi + shift, up);
        CMatrix down = CMatrix::Zero(2, 2);
        down(1, 0) = m(1, 0);
        accumulate(out, phi - shift, down);
    }
    return out;
}

}  // namespace

CMatrix shallow_pocket_evolve(const CMatrix& rho0, std::span<const CPMapChoi> ops,
                              std::span<const double> durations, double g, double gamma) {
    if (rho0.rows() != 2 || rho0.cols() != 2) throw ValidationError("shallow_pocket: qubit state required");
    if (!(gamma > 0.0)) throw ValidationError("shallow_pocket: gamma must be positive");
    if (ops.size() != durations.size() && ops.size() + 1 != durations.size()) {
        throw ValidationError("shallow_pocket: ops must precede each interval (or all but the first)");
    }
    const std::size_t offset = durations.size() - ops.size();
    Components comps;
    comps.emplace(0.0, rho0);
    for (std::size_t k = 0; k < durations.size(); ++k) {
        if (k >= offset) {
            const CPMapChoi& op = ops[k - offset];
            if (op.d_out != 2 || (op.d_in != 2 && op.d_in != 1)) {
                throw ValidationError("shallow_pocket: operations must act on a qubit");
            }
            for (auto& [phi, m] : comps) m = apply_on_system(op, m, 2, 1);
        }
        if (durations[k] < 0.0) throw ValidationError("shallow_pocket: negative interval");
        comps = evolve(comps, g, durations[k]);
    }
    CMatrix out = CMatrix::Zero(2, 2);
    for (const auto& [phi, m] : comps) out += std::exp(-gamma * std::abs(phi)) * m;
    return out;
}

CMatrix shallow_pocket_channel(std::span<const CPMapChoi> ops, double dt, double g, double gamma,
                               const CMatrix& rho0) {
    if (!(dt > 0.0)) throw ValidationError("shallow_pocket: dt must be positive");
    const std::vector<double> durations(ops.size() + 1, dt);
    return shallow_pocket_evolve(rho0, ops, durations, g, gamma);
}

}  // namespace proctensor
