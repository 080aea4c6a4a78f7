#include "proctensor/process_tensor.hpp"

#include "proctensor/errors.hpp"

#include <Eigen/QR>

#include <atomic>
#include <mutex>
#include <cmath>
#include <thread>

namespace proctensor {

namespace {

using RowMajor = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Σ_ᾱ η_ᾱ ⊗ Θᵀ_{α_{N-1}} ⊗ ... ⊗ Θᵀ_{α_0}, with outputs[idx] stored in
// mixed-radix order (α_{N-1} most significant).
//
// The sum is a Tucker product: core C[o, α_{N-1}, ..., α_0] = η_ᾱ(o) is
// multiplied along each α axis by W[α, l] = Θᵀ_α(a, b), l = a·D + b, and the
// result is scattered into the Choi layout.
CMatrix assemble(const std::vector<CMatrix>& outputs, const std::vector<OpBasis>& bases, int d_sys) {
    const int n = static_cast<int>(bases.size());
    if (n == 0) return outputs.front();
    const long o_dim = static_cast<long>(d_sys) * d_sys;

    // axis p (1..n) ↔ step n - p
    std::vector<long> cur_dims{o_dim};
    for (int p = 1; p <= n; ++p) cur_dims.push_back(bases[n - p].size());

    std::vector<Complex> t(o_dim * static_cast<long>(outputs.size()));
    {
        const long n_seq = static_cast<long>(outputs.size());
        for (long s = 0; s < n_seq; ++s)
            for (int r = 0; r < d_sys; ++r)
                for (int c = 0; c < d_sys; ++c) t[(r * d_sys + c) * n_seq + s] = outputs[s](r, c);
    }

    for (int p = 1; p <= n; ++p) {
        const OpBasis& b = bases[n - p];
        const long nb = b.size();
        const long leg = b.leg_dim();
        const long big_l = leg * leg;
        RowMajor w(nb, big_l);
        for (long a = 0; a < nb; ++a)
            for (long r = 0; r < leg; ++r)
                for (long c = 0; c < leg; ++c) w(a, r * leg + c) = b.duals[a](c, r);
        const RowMajor wt = w.transpose();

        long pre = 1, post = 1;
        for (int q = 0; q < p; ++q) pre *= cur_dims[q];
        for (int q = p + 1; q <= n; ++q) post *= cur_dims[q];
        std::vector<Complex> out(pre * big_l * post);
        for (long i = 0; i < pre; ++i) {
            Eigen::Map<const RowMajor> in_blk(t.data() + i * nb * post, nb, post);
            Eigen::Map<RowMajor> out_blk(out.data() + i * big_l * post, big_l, post);
            out_blk.noalias() = wt * in_blk;
        }
        t = std::move(out);
        cur_dims[p] = big_l;
    }

    // Scatter: tensor index (o, l_{n-1}, ..., l_0) → Choi (r, a...), (c, b...).
    std::vector<long> leg(n + 1), lstride(n + 1), cstride(n + 1);
    long in_total = 1, l_total = 1;
    for (int p = n; p >= 1; --p) {
        leg[p] = bases[n - p].leg_dim();
        cstride[p] = in_total;
        lstride[p] = l_total;
        in_total *= leg[p];
        l_total *= leg[p] * leg[p];
    }
    const long dim = d_sys * in_total;
    CMatrix choi(dim, dim);
    for (int r = 0; r < d_sys; ++r)
        for (int c = 0; c < d_sys; ++c) {
            const Complex* src = t.data() + (r * d_sys + c) * l_total;
            for (long li = 0; li < l_total; ++li) {
                long row = r * in_total, col = c * in_total;
                for (int p = 1; p <= n; ++p) {
                    const long l = (li / lstride[p]) % (leg[p] * leg[p]);
                    row += (l / leg[p]) * cstride[p];
                    col += (l % leg[p]) * cstride[p];
                }
                choi(row, col) = src[li];
            }
        }
    return choi;
}

std::vector<int> digits(long idx, const std::vector<OpBasis>& bases) {
    // α_{N-1} most significant; returned as (α_0, ..., α_{N-1}).
    const int n = static_cast<int>(bases.size());
    std::vector<int> a(n);
    for (int k = 0; k < n; ++k) {
        a[k] = static_cast<int>(idx % bases[k].size());
        idx /= bases[k].size();
    }
    return a;
}

BasisLabel tensor_label(const std::vector<OpBasis>& bases) {
    for (auto it = bases.rbegin(); it != bases.rend(); ++it)
        if (it->label != BasisLabel::preparation) return it->label;
    return bases.empty() ? BasisLabel::custom : BasisLabel::preparation;
}

void check_seq_dim(const ProcessTensor& pt, const CMatrix& seq) {
    if (seq.rows() != pt.input_dim() || seq.cols() != pt.input_dim()) {
        throw ValidationError("sequence dimension " + std::to_string(seq.rows()) + " does not match tensor input " +
                              std::to_string(pt.input_dim()));
    }
}

CMatrix trace_output(const ProcessTensor& pt) {
    if (pt.n_steps == 0) return CMatrix::Constant(1, 1, pt.choi.trace());
    std::vector<int> keep;
    for (int i = 1; i <= pt.n_steps; ++i) keep.push_back(i);
    return partial_trace(pt.choi, pt.leg_dims(), keep);
}

}  // namespace

std::vector<int> ProcessTensor::leg_dims() const {
    std::vector<int> dims{d_sys};
    for (int k = n_steps - 1; k >= 0; --k) dims.push_back(step_bases[k].leg_dim());
    return dims;
}

long ProcessTensor::input_dim() const {
    long n = 1;
    for (const auto& b : step_bases) n *= b.leg_dim();
    return n;
}

ProcessTensor reconstruct(const Oracle& oracle, const std::vector<OpBasis>& step_bases, int d_sys,
                          const ReconstructOptions& options, ReconstructStats* stats) {
    for (const auto& b : step_bases) {
        if (b.elements.empty()) throw ValidationError("reconstruct: empty step basis");
        if (b.d_out != d_sys || (b.d_in != d_sys && b.d_in != 1)) {
            throw ValidationError("reconstruct: basis dimension does not match the system");
        }
    }
    long total = 1;
    for (const auto& b : step_bases) total *= b.size();

    std::vector<CMatrix> outputs(total);
    std::vector<char> have(total, 0);
    ReconstructStats local;
    if (options.cache) {
        for (long i = 0; i < total; ++i) {
            auto it = options.cache->find(digits(i, step_bases));
            if (it != options.cache->end()) {
                outputs[i] = it->second;
                have[i] = 1;
                ++local.cache_hits;
            }
        }
    }

    auto evaluate = [&](long i) {
        const auto a = digits(i, step_bases);
        std::vector<CPMapChoi> ops;
        ops.reserve(a.size());
        for (std::size_t k = 0; k < a.size(); ++k) ops.push_back(step_bases[k].elements[a[k]]);
        CMatrix out = oracle(ops);
        if (out.rows() != d_sys || out.cols() != d_sys) {
            throw ValidationError("reconstruct: oracle returned a state of the wrong dimension");
        }
        if (!out.allFinite()) throw NumericalError("reconstruct: oracle returned non-finite entries");
        outputs[i] = std::move(out);
    };

    std::vector<long> todo;
    for (long i = 0; i < total; ++i)
        if (!have[i]) todo.push_back(i);
    local.oracle_calls = static_cast<long>(todo.size());

    const int threads = std::max(1, std::min<int>(options.threads, static_cast<int>(todo.size())));
    if (threads == 1) {
        for (long i : todo) evaluate(i);
    } else {
        std::atomic<long> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::thread> pool;
        for (int w = 0; w < threads; ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    const long j = next.fetch_add(1);
                    if (j >= static_cast<long>(todo.size())) return;
                    try {
                        evaluate(todo[j]);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(failure_mutex);
                        if (!failure) failure = std::current_exception();
                        next = static_cast<long>(todo.size());
                        return;
                    }
                }
            });
        }
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
    }

    for (long i = 0; i < total; ++i) {
        const double tr = std::abs(outputs[i].trace());
        local.max_trace = std::max(local.max_trace, tr);
        if (tr > 1.0 + 1e-8) {
            local.warnings.push_back("basis sequence " + std::to_string(i) + " has output trace " + std::to_string(tr));
        }
    }
    if (options.cache) {
        for (long i : todo) (*options.cache)[digits(i, step_bases)] = outputs[i];
    }

    ProcessTensor pt;
    pt.choi = assemble(outputs, step_bases, d_sys);
    pt.n_steps = static_cast<int>(step_bases.size());
    pt.d_sys = d_sys;
    pt.step_bases = step_bases;
    pt.basis_label = tensor_label(step_bases);
    if (stats) *stats = std::move(local);
    return pt;
}

ProcessTensor reconstruct(const Oracle& oracle, const OpBasis& basis, int n_steps, int d_sys,
                          const ReconstructOptions& options, ReconstructStats* stats) {
    if (n_steps < 1) throw ValidationError("reconstruct: n_steps must be positive");
    return reconstruct(oracle, std::vector<OpBasis>(n_steps, basis), d_sys, options, stats);
}

ProcessTensor reconstruct_with_preparation(const Oracle& oracle, const OpBasis& basis, int n_steps, int d_sys,
                                           const ReconstructOptions& options, ReconstructStats* stats) {
    if (n_steps < 1) throw ValidationError("reconstruct: n_steps must be positive");
    std::vector<OpBasis> bases(n_steps, basis);
    bases[0] = preparation_basis(d_sys);
    return reconstruct(oracle, bases, d_sys, options, stats);
}

CMatrix apply_choi_sequence(const ProcessTensor& pt, const CMatrix& seq_choi) {
    if (pt.n_steps == 0) {
        if (seq_choi.size() > 1 || (seq_choi.size() == 1 && seq_choi(0, 0) != Complex(1.0))) {
            throw ValidationError("apply: a zero-step tensor takes no operations");
        }
        return pt.choi;
    }
    check_seq_dim(pt, seq_choi);
    return pair_leg(pt.choi, {pt.d_sys, static_cast<int>(pt.input_dim())}, 1, seq_choi);
}


CMatrix apply_sequence(const ProcessTensor& pt, std::span<const CPMapChoi> chronological_ops) {
    if (static_cast<int>(chronological_ops.size()) != pt.n_steps) {
        throw ValidationError("apply: expected one operation per step");
    }
    if (pt.n_steps == 0) return pt.choi;
    for (int k = 0; k < pt.n_steps; ++k) {
        const auto& op = chronological_ops[k];
        if (op.d_in != pt.step_bases[k].d_in || op.d_out != pt.step_bases[k].d_out) {
            throw ValidationError("apply: operation dimension does not match step " + std::to_string(k));
        }
    }
    return apply(pt, sequence_choi(chronological_ops));
}

double span_residual(const ProcessTensor& pt, const CMatrix& seq_choi) {
    if (pt.n_steps == 0) return 0.0;
    check_seq_dim(pt, seq_choi);
    const double n = seq_choi.norm();
    if (n == 0.0) return 0.0;
    std::vector<int> dims;
    for (int k = pt.n_steps - 1; k >= 0; --k) dims.push_back(pt.step_bases[k].leg_dim());
    CMatrix proj = seq_choi;
    for (int k = 0; k < pt.n_steps; ++k) {
        proj = apply_leg_superop(proj, dims, pt.n_steps - 1 - k, span_projector(pt.step_bases[k]));
    }
    return (seq_choi - proj).norm() / n;
}

bool step_in_span(const OpBasis& basis, const CPMapChoi& op, double tolerance) {
    if (op.d_in != basis.d_in || op.d_out != basis.d_out) return false;
    return span_decompose(op.choi, basis).relative_residual < tolerance;
}

ProcessTensor contract(const ProcessTensor& pt, int step, const CPMapChoi& op) {
    if (step < 0 || step >= pt.n_steps) throw ValidationError("contract: invalid step index " + std::to_string(step));
    const OpBasis& b = pt.step_bases[step];
    if (op.d_in != b.d_in || op.d_out != b.d_out) {
        throw ValidationError("contract: operation dimension does not match step " + std::to_string(step));
    }
    ProcessTensor out;
    out.choi = pair_leg(pt.choi, pt.leg_dims(), pt.leg_position(step), op.choi);
    out.n_steps = pt.n_steps - 1;
    out.d_sys = pt.d_sys;
    out.step_bases = pt.step_bases;
    out.step_bases.erase(out.step_bases.begin() + step);
    out.basis_label = pt.basis_label;
    return out;
}

CPMapChoi default_fill(const OpBasis& basis) {
    if (basis.d_in != basis.d_out) throw ValidationError("no default fill for a preparation leg");
    const int d = basis.d_in;
    CPMapChoi id = identity_map(d);
    if (step_in_span(basis, id)) return id;
    std::vector<CMatrix> kraus;
    for (int i = 0; i < d; ++i) {
        CMatrix k = CMatrix::Zero(d, d);
        k(i, i) = 1.0;
        kraus.push_back(k);
    }
    CPMapChoi dephase = choi_from_kraus(kraus, d, d);
    if (step_in_span(basis, dephase)) return dephase;
    throw ValidationError("no admissible default fill in the " + to_string(basis.label) + " span");
}

Subprocess containment_probability_map(const ProcessTensor& pt, int j, int k, const std::vector<CPMapChoi>& fill,
                                       const std::optional<CPMapChoi>& past_fill) {
    if (j < 0 || k < j || k > pt.n_steps) throw ValidationError("containment: need 0 <= j <= k <= N");
    if (static_cast<int>(fill.size()) != pt.n_steps - k) {
        throw ValidationError("containment: fill must cover steps k..N-1");
    }
    auto check = [&](const CPMapChoi& op, int step) {
        if (!step_in_span(pt.step_bases[step], op)) throw ValidationError("inadmissible fill");
        if (!is_trace_preserving(op, 1e-8)) throw ValidationError("inadmissible fill: not trace preserving");
    };
    ProcessTensor cur = pt;
    std::string used;
    for (int s = pt.n_steps - 1; s >= k; --s) {
        const CPMapChoi& op = fill[s - k];
        check(op, s);
        cur = contract(cur, s, op);
        used += "step " + std::to_string(s) + ": supplied fill; ";
    }
    for (int s = j - 1; s >= 0; --s) {
        const CPMapChoi op = past_fill ? *past_fill : default_fill(pt.step_bases[s]);
        check(op, s);
        cur = contract(cur, s, op);
        used += "step " + std::to_string(s) + (past_fill ? ": declared default; " : ": do-nothing default; ");
    }
    Subprocess m;
    m.choi = trace_output(cur);
    m.j = j;
    m.k = k;
    m.fill_ops_used = used;
    return m;
}

Complex probability(const Subprocess& m, const CMatrix& seq_choi) {
    if (m.k == m.j) return m.choi(0, 0) * (seq_choi.size() == 1 ? seq_choi(0, 0) : Complex(1.0));
    if (seq_choi.rows() != m.choi.rows() || seq_choi.cols() != m.choi.cols()) {
        throw ValidationError("probability: sequence dimension mismatch");
    }
    return seq_choi.cwiseProduct(m.choi).sum();
}

ProcessTensor intermediate_from_icpovm(const ProcessTensor& pt, int k) {
    if (k < 0 || k >= pt.n_steps) throw ValidationError("intermediate: need 0 <= k < N");
    const OpBasis& basis = pt.step_bases[k];
    if (basis.d_in != pt.d_sys) throw ValidationError("intermediate: step k must take the system as input");
    const int d = pt.d_sys;
    const int nb = basis.size();
    CMatrix frame(nb, d * d);
    for (int m = 0; m < nb; ++m) frame.row(m) = vec(effect(basis.elements[m]).transpose()).transpose();
    if (numerical_rank(frame, 1e-10) < d * d) throw ValidationError("frame not informationally complete");
    const CMatrix pinv = Eigen::CompleteOrthogonalDecomposition<CMatrix>(frame).pseudoInverse();

    ProcessTensor upto = pt;
    for (int s = pt.n_steps - 1; s > k; --s) upto = contract(upto, s, default_fill(pt.step_bases[s]));
    std::vector<CMatrix> marginals;
    for (const auto& a : basis.elements) marginals.push_back(trace_output(contract(upto, k, a)));

    Oracle oracle = [&](std::span<const CPMapChoi> ops) -> CMatrix {
        const CMatrix x = ops.empty() ? CMatrix::Identity(1, 1) : sequence_choi(ops).choi;
        CVector p(nb);
        for (int m = 0; m < nb; ++m) p(m) = x.cwiseProduct(marginals[m]).sum();
        return unvec(pinv * p, d, d);
    };
    std::vector<OpBasis> bases(pt.step_bases.begin(), pt.step_bases.begin() + k);
    return reconstruct(oracle, bases, d);
}

PositivityReport positivity_report(const ProcessTensor& pt, double tolerance) {
    PositivityReport r;
    r.min_eigenvalue = min_eigenvalue(pt.choi);
    r.is_positive = r.min_eigenvalue >= -tolerance;
    return r;
}

CausalityReport causality_report(const ProcessTensor& pt, double tolerance) {
    CausalityReport rep;
    CMatrix cur = trace_output(pt);
    long rest = pt.input_dim();
    for (int s = pt.n_steps - 1; s >= 0; --s) {
        const OpBasis& b = pt.step_bases[s];
        rest /= b.leg_dim();
        const int dout = b.d_out;
        const int after = static_cast<int>(b.d_in * rest);
        const CMatrix r = partial_trace(cur, {dout, after}, {1}) / static_cast<double>(dout);
        rep.max_deviation = std::max(rep.max_deviation, (cur - kron(identity(dout), r)).norm());
        cur = partial_trace(r, {b.d_in, static_cast<int>(rest)}, {1});
    }
    rep.causal = rep.max_deviation <= tolerance;
    return rep;
}

long zeroed_dimension(const ProcessTensor& pt) {
    long full = 1, used = 1;
    for (const auto& b : pt.step_bases) {
        full *= static_cast<long>(b.leg_dim()) * b.leg_dim();
        used *= b.size();
    }
    return full - used;
}

}  // namespace proctensor
