#include "proctensor/decoupling.hpp"

#include "proctensor/errors.hpp"

#include <cmath>
#include <numbers>
#include <random>

namespace proctensor {

namespace {

constexpr double kPi = std::numbers::pi;

struct Candidate {
    std::vector<EulerAngles> params;
    double score = 2.0;
    CMatrix r;
};

// Lower score wins; equal scores fall back to lexicographic parameter order.
bool better(const Candidate& a, const Candidate& b) {
    if (a.score != b.score) return a.score < b.score;
    return a.params < b.params;
}

class Objective {
public:
    Objective(const ProcessTensor& pt, long budget) : pt_(pt), budget_(budget) {}

    bool exhausted() const { return evaluations_ >= budget_; }
    long evaluations() const { return evaluations_; }
    long remaining() const { return budget_ - evaluations_; }

    Candidate operator()(const std::vector<EulerAngles>& params) {
        ++evaluations_;
        std::vector<CPMapChoi> seq;
        for (const auto& p : params) seq.push_back(unitary_map(zyz_unitary(p)));
        const CPMapChoi r = r_map(pt_, seq);
        return Candidate{params, unitarity_distance(r), r.choi};
    }

private:
    const ProcessTensor& pt_;
    long budget_;
    long evaluations_ = 0;
};

void offer(Candidate& best, Candidate c) {
    if (better(c, best)) best = std::move(c);
}

EulerAngles haar_angles(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double a = 2.0 * kPi * u(rng);
    const double b = std::acos(1.0 - 2.0 * u(rng));
    const double c = 2.0 * kPi * u(rng);
    return {a, b, c};
}

void random_phase(Objective& f, Candidate& best, int n, long count, std::mt19937_64& rng) {
    for (long i = 0; i < count && !f.exhausted(); ++i) {
        std::vector<EulerAngles> p(n);
        for (auto& e : p) e = haar_angles(rng);
        offer(best, f(p));
    }
}

void grid_phase(Objective& f, Candidate& best, int n, long budget) {
    const int axes = 3 * n;
    int m = std::max(2, static_cast<int>(std::floor(std::pow(static_cast<double>(budget), 1.0 / axes) + 1e-9)));
    while (m > 2 && std::pow(static_cast<double>(m), axes) > static_cast<double>(budget)) --m;
    std::vector<int> idx(axes, 0);
    for (;;) {
        if (f.exhausted()) return;
        std::vector<EulerAngles> p(n);
        for (int i = 0; i < n; ++i) {
            p[i][0] = 2.0 * kPi * idx[3 * i] / m;
            p[i][1] = kPi * idx[3 * i + 1] / (m - 1);
            p[i][2] = 2.0 * kPi * idx[3 * i + 2] / m;
        }
        offer(best, f(p));
        int ax = axes - 1;
        while (ax >= 0 && ++idx[ax] == m) idx[ax--] = 0;
        if (ax < 0) return;
    }
}

// Golden-section search on one angle within [x − h, x + h]; the candidate is
// only replaced by a strict improvement.
void line_search(Objective& f, Candidate& best, int op, int axis, double h) {
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    const long cap = std::min<long>(40, f.remaining());
    if (cap < 2) return;
    auto at = [&](double x) {
        auto p = best.params;
        p[op][axis] = x;
        return f(p);
    };
    double lo = best.params[op][axis] - h, hi = best.params[op][axis] + h;
    double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    Candidate c1 = at(x1), c2 = at(x2);
    Candidate local = better(c1, c2) ? c1 : c2;
    for (long used = 2; used < cap; ++used) {
        if (c1.score < c2.score) {
            hi = x2;
            x2 = x1;
            c2 = std::move(c1);
            x1 = hi - phi * (hi - lo);
            c1 = at(x1);
            if (better(c1, local)) local = c1;
        } else {
            lo = x1;
            x1 = x2;
            c1 = std::move(c2);
            x2 = lo + phi * (hi - lo);
            c2 = at(x2);
            if (better(c2, local)) local = c2;
        }
    }
    if (local.score < best.score) best = std::move(local);
}

}  // namespace

CMatrix zyz_unitary(const EulerAngles& e) {
    auto rz = [](double t) {
        CMatrix m = CMatrix::Zero(2, 2);
        m(0, 0) = std::exp(Complex(0.0, -t / 2.0));
        m(1, 1) = std::exp(Complex(0.0, t / 2.0));
        return m;
    };
    CMatrix ry(2, 2);
    ry << std::cos(e[1] / 2.0), -std::sin(e[1] / 2.0), std::sin(e[1] / 2.0), std::cos(e[1] / 2.0);
    return rz(e[0]) * ry * rz(e[2]);
}

CPMapChoi r_map(const ProcessTensor& pt, const std::vector<CPMapChoi>& seq) {
    if (pt.n_steps < 1 || pt.step_bases[0].d_in != 1) {
        throw ValidationError("r_map: tensor needs an initial-state leg at step 0");
    }
    if (static_cast<int>(seq.size()) != pt.n_steps - 1) {
        throw ValidationError("r_map: sequence must cover steps 1..N-1");
    }
    ProcessTensor cur = pt;
    for (int s = pt.n_steps - 1; s >= 1; --s) {
        const CPMapChoi& op = seq[s - 1];
        if (!step_in_span(pt.step_bases[s], op)) {
            throw ValidationError("r_map: operation at step " + std::to_string(s) + " is outside the span");
        }
        cur = contract(cur, s, op);
    }
    // The remaining legs are (out, initial state); pairing with ρ is exactly the
    // Choi action, so the matrix is the channel's Choi matrix.
    CPMapChoi r{cur.choi, pt.d_sys, pt.d_sys, TraceClass::unrestricted};
    if (is_trace_preserving(r, 1e-8)) r.trace_class = TraceClass::preserving;
    return r;
}

double unitarity_distance(const CPMapChoi& channel) { return unitarity_score(channel).distance; }

UnitarityScore unitarity_score(const CPMapChoi& channel) {
    if (channel.d_in != channel.d_out) throw ValidationError("unitarity_distance: channel must be square");
    const double d = channel.d_in;
    UnitarityScore s;
    s.distance = std::max(0.0, 1.0 - channel.choi.cwiseAbs2().sum() / (d * d));
    s.trace_preserving = is_trace_preserving(channel, 1e-8);
    return s;
}

std::string to_string(SearchMethod m) {
    switch (m) {
        case SearchMethod::random: return "random";
        case SearchMethod::grid: return "grid";
        case SearchMethod::coordinate_descent: return "coordinate_descent";
    }
    return "random";
}

SearchMethod search_method_from_string(const std::string& s) {
    if (s == "random") return SearchMethod::random;
    if (s == "grid") return SearchMethod::grid;
    if (s == "coordinate_descent") return SearchMethod::coordinate_descent;
    throw ValidationError("unknown search method '" + s + "'");
}

DecoupleResult search(const ProcessTensor& pt, int n_interior_ops, long budget, std::uint64_t seed,
                      SearchMethod method) {
    if (budget <= 0) throw ValidationError("search: budget must be positive");
    if (n_interior_ops != pt.n_steps - 1) {
        throw ValidationError("search: tensor has " + std::to_string(pt.n_steps - 1) + " interior steps");
    }
    if (pt.d_sys != 2) throw ValidationError("search: Euler parametrisation needs a qubit");
    Objective f(pt, budget);
    Candidate best;
    std::mt19937_64 rng(seed);
    const int n = n_interior_ops;

    if (n == 0) {
        offer(best, f({}));
    } else if (method == SearchMethod::random) {
        random_phase(f, best, n, budget, rng);
    } else if (method == SearchMethod::grid) {
        grid_phase(f, best, n, budget);
    } else {
        random_phase(f, best, n, std::max<long>(1, std::min<long>(budget / 5, 500)), rng);
        double h = kPi / 2.0;
        while (!f.exhausted() && best.score > 0.0) {
            const double before = best.score;
            for (int i = 0; i < n && !f.exhausted(); ++i)
                for (int a = 0; a < 3 && !f.exhausted(); ++a) line_search(f, best, i, a, h);
            if (before - best.score < 1e-10) break;
            h = std::max(h * 0.5, 1e-4);
        }
    }

    DecoupleResult out;
    out.best_sequence = best.params;
    out.best_score = best.score;
    out.r_choi = best.r;
    out.evaluations = f.evaluations();
    return out;
}

LindbladContrast lindblad_contrast(double g, double gamma, double dt, const CPMapChoi& seq_op, const CMatrix& rho0) {
    if (dt < 0.0) throw ValidationError("lindblad_contrast: dt must be nonnegative");
    if (seq_op.d_in != 2 || seq_op.d_out != 2) throw ValidationError("lindblad_contrast: qubit operation required");
    LindbladContrast out;
    if (dt == 0.0) {
        out.pt_prediction = apply_choi(seq_op, rho0);
    } else {
        Scenario sc;
        sc.d_sys = 2;
        sc.env = ShallowPocketEnv{g, gamma};
        sc.initial = CMatrix(identity(2) / 2.0);
        sc.times = {0.0, dt, 2.0 * dt};
        sc.label = "shallow pocket";
        const OpBasis ub = unitary_basis_qubit();
        const OpBasis& basis = step_in_span(ub, seq_op) ? ub : full_op_basis(2);
        const ProcessTensor pt = reconstruct_with_preparation(make_oracle(sc), basis, 2, 2);
        out.pt_prediction = apply_choi(r_map(pt, {seq_op}), rho0);
    }
    out.lindblad_prediction = lindblad_dephase(apply_choi(seq_op, lindblad_dephase(rho0, dt, g, gamma)), dt, g, gamma);
    out.trace_distance = trace_distance(out.pt_prediction, out.lindblad_prediction);
    return out;
}

}  // namespace proctensor
