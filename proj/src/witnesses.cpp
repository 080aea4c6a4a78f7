#include "proctensor/witnesses.hpp"

#include "proctensor/errors.hpp"

#include <Eigen/QR>

#include <cmath>

namespace proctensor {

CorrelationWitness correlation_memory(const ProcessTensor& pt_correlated, const ProcessTensor& pt_product,
                                      double relative_tolerance) {
    if (pt_correlated.n_steps != pt_product.n_steps || pt_correlated.d_sys != pt_product.d_sys ||
        pt_correlated.basis_label != pt_product.basis_label ||
        pt_correlated.choi.rows() != pt_product.choi.rows()) {
        throw ValidationError("correlation_memory: basis mismatch");
    }
    for (int k = 0; k < pt_correlated.n_steps; ++k) {
        const auto& a = pt_correlated.step_bases[k];
        const auto& b = pt_product.step_bases[k];
        if (a.size() != b.size()) throw ValidationError("correlation_memory: basis mismatch");
        for (int m = 0; m < a.size(); ++m) {
            if ((a.elements[m].choi - b.elements[m].choi).cwiseAbs().maxCoeff() > 1e-12) {
                throw ValidationError("correlation_memory: basis mismatch");
            }
        }
    }
    CorrelationWitness w;
    w.k_matrix = pt_correlated.choi - pt_product.choi;
    w.norm = w.k_matrix.norm();
    w.detected = w.norm > relative_tolerance * pt_correlated.choi.norm();
    w.basis_label = to_string(pt_correlated.basis_label);
    return w;
}

CMatrix correlation_part(const CMatrix& rho_se, int d_sys, int d_env) {
    const CMatrix rs = partial_trace(rho_se, {d_sys, d_env}, {0});
    const CMatrix re = partial_trace(rho_se, {d_sys, d_env}, {1});
    return rho_se - kron(rs, re);
}

CMatrix k_exact(const CMatrix& chi, const CMatrix& u_se, const CPMapChoi& probe) {
    const int ds = probe.d_in;
    if (ds < 1 || probe.d_out != ds) throw ValidationError("k_exact: probe must map the system to itself");
    if (chi.rows() % ds != 0 || chi.rows() != chi.cols()) throw ValidationError("k_exact: chi dimension mismatch");
    const int de = static_cast<int>(chi.rows() / ds);
    if (u_se.rows() != chi.rows() || !is_unitary(u_se, 1e-10)) throw ValidationError("k_exact: u_se must be unitary");
    if (partial_trace(chi, {ds, de}, {0}).cwiseAbs().maxCoeff() > 1e-10 ||
        partial_trace(chi, {ds, de}, {1}).cwiseAbs().maxCoeff() > 1e-10) {
        throw ValidationError("k_exact: chi must have vanishing marginals");
    }
    const CMatrix kicked = apply_on_system(probe, chi, ds, de);
    return partial_trace(u_se * kicked * u_se.adjoint(), {ds, de}, {0});
}

CausalBreak make_break(const CMatrix& prep, const CMatrix& effect) {
    return CausalBreak{prep, effect, causal_break(prep, effect)};
}

std::vector<CausalBreak> overcomplete_breaks(int d) {
    std::vector<CausalBreak> out;
    for (const auto& p : state_basis(d))
        for (const auto& pi : overcomplete_projectors(d)) out.push_back(make_break(p, pi));
    return out;
}

MarkovReport markov_test(const ProcessTensor& pt, const std::vector<std::vector<CPMapChoi>>& histories,
                         const std::vector<CausalBreak>& breaks, double tolerance) {
    if (pt.n_steps < 1) throw ValidationError("markov_test: tensor needs at least one step");
    const int last = pt.n_steps - 1;
    for (const auto& b : breaks) {
        if (!step_in_span(pt.step_bases[last], b.choi)) throw ValidationError("causal break not admissible");
    }
    std::vector<std::vector<CPMapChoi>> hist = histories;
    if (hist.empty()) hist.emplace_back();
    for (const auto& h : hist) {
        if (static_cast<int>(h.size()) != last) throw ValidationError("markov_test: history must cover steps 0..N-2");
        for (int k = 0; k < last; ++k) {
            if (!step_in_span(pt.step_bases[k], h[k])) throw ValidationError("history not admissible");
        }
    }

    // outputs[h][b]
    std::vector<std::vector<CMatrix>> outputs(hist.size());
    for (std::size_t h = 0; h < hist.size(); ++h) {
        for (const auto& b : breaks) {
            std::vector<CPMapChoi> ops = hist[h];
            ops.push_back(b.choi);
            outputs[h].push_back(apply_sequence(pt, ops));
        }
    }

    MarkovReport rep;
    rep.tolerance = tolerance;
    const int nh = static_cast<int>(hist.size());
    const int nb = static_cast<int>(breaks.size());
    for (int b1 = 0; b1 < nb; ++b1) {
        for (int b2 = b1; b2 < nb; ++b2) {
            if ((breaks[b1].prep - breaks[b2].prep).cwiseAbs().maxCoeff() > 1e-12) continue;
            for (int h1 = 0; h1 < nh; ++h1) {
                for (int h2 = (b1 == b2 ? h1 + 1 : 0); h2 < nh; ++h2) {
                    const CMatrix& y1 = outputs[h1][b1];
                    const CMatrix& y2 = outputs[h2][b2];
                    const double t1 = std::abs(y1.trace()), t2 = std::abs(y2.trace());
                    double disc = 0.0;
                    // A vanishing output is proportional to anything; a traceless
                    // but nonzero one is proportional to no state.
                    const bool z1 = t1 < 1e-12, z2 = t2 < 1e-12;
                    const bool null1 = z1 && y1.norm() <= tolerance, null2 = z2 && y2.norm() <= tolerance;
                    if (null1 || null2 || (z1 && z2)) {
                        continue;
                    } else if (z1 || z2) {
                        disc = 1.0;
                    } else {
                        disc = (y1 / y1.trace() - y2 / y2.trace()).norm();
                    }
                    rep.max_discrepancy = std::max(rep.max_discrepancy, disc);
                    if (disc > tolerance) rep.violations.push_back({h1, h2, b1, b2, disc});
                }
            }
        }
    }
    rep.is_markovian_within_test = rep.violations.empty();
    return rep;
}

CptpConsistency cptp_consistency(const ProcessTensor& pt, const std::optional<CMatrix>& rho_s, double tolerance) {
    if (pt.n_steps != 1) throw ValidationError("cptp_consistency: one-step tensor required");
    const OpBasis& basis = pt.step_bases[0];
    const int d = pt.d_sys;
    const int n = basis.size();
    if (n <= d * d) throw ValidationError("cptp_consistency: underdetermined fit, basis needs more than d^2 elements");
    CMatrix x(d * d, n), y(d * d, n);
    for (int a = 0; a < n; ++a) {
        const CPMapChoi& f = basis.elements[a];
        const CMatrix out = apply(pt, f);
        CMatrix in;
        if (rho_s) {
            in = apply_choi(f, *rho_s);
        } else {
            const CMatrix p = partial_trace(f.choi, {f.d_out, f.d_in}, {0});
            const CMatrix m = partial_trace(f.choi, {f.d_out, f.d_in}, {1});
            const Complex tr = f.choi.trace();
            if (std::abs(tr) < 1e-14 || (f.choi - kron(p, m) / tr).norm() > 1e-10 * f.choi.norm()) {
                throw ValidationError("cptp_consistency: basis is not of measure-and-reprepare form; pass rho_s");
            }
            in = out.trace() * p / p.trace();
        }
        x.col(a) = vec(in);
        y.col(a) = vec(out);
    }
    const CMatrix xp = Eigen::CompleteOrthogonalDecomposition<CMatrix>(x).pseudoInverse();
    const CMatrix l = y * xp;
    CptpConsistency r;
    r.residual = (y - l * x).norm();
    r.detected = r.residual > tolerance;
    return r;
}

DetectionCheck detection_check(const Scenario& sc, double k_threshold, double markov_tolerance) {
    validate(sc);
    if (std::holds_alternative<ShallowPocketEnv>(sc.env)) {
        throw ValidationError("detection check needs a finite environment");
    }
    Scenario one = sc;
    one.times.resize(2);
    if (auto* m = std::get_if<MatrixUnitaryEnv>(&one.env)) m->unitaries.resize(1);
    const int ds = sc.d_sys, de = env_dim(sc);
    const CMatrix chi = correlation_part(initial_state(sc), ds, de);
    const CMatrix u = interval_unitary(one, 0);
    const auto breaks = overcomplete_breaks(ds);

    DetectionCheck out;
    double acc = 0.0;
    for (const auto& b : breaks) acc += k_exact(chi, u, b.choi).squaredNorm();
    out.k_norm = std::sqrt(acc);
    out.detected = out.k_norm > k_threshold;
    if (!out.detected) return out;

    const ProcessTensor pt = reconstruct(make_oracle(one), full_op_basis(ds), 1, ds);
    out.report = markov_test(pt, {}, breaks, markov_tolerance);
    out.violation_found = !out.report.violations.empty();
    out.holds = out.violation_found;
    return out;
}

bool detection_implies_nonmarkov_check(const Scenario& sc) { return detection_check(sc).holds; }

}  // namespace proctensor
