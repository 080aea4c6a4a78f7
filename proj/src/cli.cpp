#include "proctensor/cli.hpp"

#include "proctensor/errors.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iomanip>
#include <ostream>
#include <utility>

namespace proctensor {

namespace {

const std::pair<const char*, const char*> kCommands[] = {
    {"reconstruct", "build a process tensor from a scenario"},
    {"apply", "evaluate a tensor on an operation sequence"},
    {"witness", "correlation-memory witness for the first interval"},
    {"markov", "causal-break Markov test"},
    {"decouple", "search interior unitaries that decouple the environment"},
    {"validate", "check a scenario or config file"},
    {"demo", "two Hadamard gates seen with limited and full control"},
};

double tolerance(const RunConfig& c, const std::string& key, double fallback) {
    auto it = c.tolerances.find(key);
    return it == c.tolerances.end() ? fallback : it->second;
}

const Scenario& need_scenario(const RunConfig& c) {
    if (!c.scenario) throw ValidationError(c.command + ": --scenario is required");
    return *c.scenario;
}

std::string basis_name(const RunConfig& c, const std::string& fallback) {
    return c.basis.empty() ? fallback : c.basis;
}

OpBasis make_step_basis(const RunConfig& c, const std::string& name, int d) {
    if (name == "full") return full_op_basis(d);
    if (name == "unitary") return d == 2 ? unitary_basis_qubit() : random_unitary_basis(d, c.seed);
    if (name == "projective") return projective_basis(d, c.seed);
    if (name == "custom-file") {
        if (c.basis_file.empty()) throw ValidationError("--basis custom-file needs --basis-file");
        return basis_from_json(read_json_file(c.basis_file), "basis");
    }
    throw ValidationError("unknown basis '" + name + "'");
}

Scenario first_interval(const Scenario& sc) {
    Scenario one = sc;
    one.times.resize(2);
    if (auto* m = std::get_if<MatrixUnitaryEnv>(&one.env)) m->unitaries.resize(1);
    return one;
}

CMatrix system_marginal(const Scenario& sc) {
    return partial_trace(initial_state(sc), {sc.d_sys, env_dim(sc)}, {0});
}

void emit(const RunConfig& c, const json& j) {
    if (!c.output_path.empty()) write_file_atomic(c.output_path, dump(j));
}

int cmd_reconstruct(const RunConfig& c, std::ostream& out) {
    const Scenario& sc = need_scenario(c);
    const int steps = c.n_steps.value_or(sc.n_steps());
    if (steps != sc.n_steps()) {
        throw ValidationError("--steps " + std::to_string(steps) + " does not match the scenario's " +
                              std::to_string(sc.n_steps()) + " intervals");
    }
    const OpBasis basis = make_step_basis(c, basis_name(c, "full"), sc.d_sys);
    ReconstructStats stats;
    const ProcessTensor pt = reconstruct(make_oracle(sc), basis, steps, sc.d_sys, {c.threads, nullptr}, &stats);
    emit(c, to_json(pt));
    const auto pos = positivity_report(pt);
    out << "reconstructed " << steps << "-step tensor, basis " << to_string(basis.label) << " ("
        << basis.size() << " elements)\n";
    out << "oracle calls: " << stats.oracle_calls << "\n";
    out << "min eigenvalue: " << std::setprecision(6) << pos.min_eigenvalue << (pos.is_positive ? " (positive)\n" : "\n");
    out << "zeroed basis directions: " << zeroed_dimension(pt) << "\n";
    if (basis.label == BasisLabel::full) {
        const auto cr = causality_report(pt);
        out << "causality deviation: " << cr.max_deviation << (cr.causal ? " (ok)\n" : " (VIOLATED)\n");
    }
    for (const auto& w : stats.warnings) out << "warning: " << w << "\n";
    return exit_code::ok;
}

int cmd_apply(const RunConfig& c, std::ostream& out) {
    if (c.tensor_path.empty() || c.sequence_path.empty()) {
        throw ValidationError("apply: --tensor and --sequence are required");
    }
    const ProcessTensor pt = process_tensor_from_json(read_json_file(c.tensor_path));
    const json sj = read_json_file(c.sequence_path);
    CMatrix seq;
    if (sj.is_object() && sj.contains("ops")) {
        std::vector<CPMapChoi> ops;
        for (std::size_t i = 0; i < sj["ops"].size(); ++i) {
            ops.push_back(map_from_json(sj["ops"][i], "sequence.ops[" + std::to_string(i) + "]"));
        }
        if (static_cast<int>(ops.size()) != pt.n_steps) {
            throw ValidationError("sequence has " + std::to_string(ops.size()) + " operations, tensor has " +
                                  std::to_string(pt.n_steps) + " steps");
        }
        seq = sequence_choi(ops).choi;
    } else {
        seq = map_from_json(sj, "sequence").choi;
    }
    const double residual = span_residual(pt, seq);
    const double tol = tolerance(c, "span", tol::kSpanMembership);
    const bool outside = residual > tol;
    out << "span residual: " << std::setprecision(6) << residual << "\n";
    if (outside && !c.allow_out_of_span) {
        throw ValidationError("sequence lies outside the tensor's span (relative residual " + std::to_string(residual) +
                              "); pass --allow-out-of-span to evaluate anyway");
    }
    const CMatrix state = apply(pt, seq);
    emit(c, json{{"state", to_json(state)},
                 {"trace", state.trace().real()},
                 {"span_residual", residual},
                 {"out_of_span", outside}});
    out << "output trace: " << state.trace().real() << "\n";
    return exit_code::ok;
}

int cmd_witness(const RunConfig& c, std::ostream& out) {
    const Scenario one = first_interval(need_scenario(c));
    const OpBasis basis = make_step_basis(c, basis_name(c, "unitary"), one.d_sys);
    const ReconstructOptions opt{c.threads, nullptr};
    const ProcessTensor t = reconstruct(make_oracle(one), basis, 1, one.d_sys, opt);
    const ProcessTensor l = reconstruct(make_oracle(product_counterpart(one)), basis, 1, one.d_sys, opt);
    const CorrelationWitness w = correlation_memory(t, l, tolerance(c, "detect", 1e-9));
    json j = to_json(w);
    out << "correlation witness (" << w.basis_label << "): norm " << std::setprecision(6) << w.norm
        << (w.detected ? ", detected\n" : ", not detected\n");
    if (basis.size() > one.d_sys * one.d_sys) {
        const auto cp = cptp_consistency(t, system_marginal(one), tolerance(c, "cptp", 1e-8));
        j["cptp"] = to_json(cp, w.basis_label);
        out << "cptp consistency residual " << cp.residual << (cp.detected ? ", detected\n" : ", not detected\n");
    }
    emit(c, j);
    return exit_code::ok;
}

int cmd_markov(const RunConfig& c, std::ostream& out) {
    const Scenario& sc = need_scenario(c);
    const OpBasis basis = make_step_basis(c, basis_name(c, "full"), sc.d_sys);
    const int n = sc.n_steps();
    const ProcessTensor pt = reconstruct(make_oracle(sc), basis, n, sc.d_sys, {c.threads, nullptr});
    std::vector<CausalBreak> breaks;
    for (auto& b : overcomplete_breaks(sc.d_sys))
        if (step_in_span(basis, b.choi)) breaks.push_back(std::move(b));
    if (breaks.empty()) throw ValidationError("causal break not admissible: none lies in the " + to_string(basis.label) + " span");
    std::vector<std::vector<CPMapChoi>> histories;
    long count = 1;
    for (int k = 0; k < n - 1; ++k) count *= basis.size();
    if (n > 1) {
        if (count > 4096) throw ValidationError("markov: too many histories; use fewer steps");
        for (long i = 0; i < count; ++i) {
            std::vector<CPMapChoi> h;
            long r = i;
            for (int k = 0; k < n - 1; ++k) {
                h.push_back(basis.elements[r % basis.size()]);
                r /= basis.size();
            }
            histories.push_back(std::move(h));
        }
    }
    const MarkovReport rep = markov_test(pt, histories, breaks, tolerance(c, "markov", 1e-8));
    emit(c, to_json(rep, to_string(basis.label)));
    out << "markov test: " << rep.violations.size() << " violations, max discrepancy " << std::setprecision(6)
        << rep.max_discrepancy << (rep.is_markovian_within_test ? " (markovian within test)\n" : "\n");
    return exit_code::ok;
}

int cmd_decouple(const RunConfig& c, std::ostream& out) {
    const Scenario& sc = need_scenario(c);
    const int n = sc.n_steps();
    if (n < 2) throw ValidationError("decouple: scenario needs at least two intervals");
    const OpBasis basis = make_step_basis(c, basis_name(c, "unitary"), sc.d_sys);
    const ProcessTensor pt = reconstruct_with_preparation(make_oracle(sc), basis, n, sc.d_sys, {c.threads, nullptr});
    const DecoupleResult r = search(pt, n - 1, c.budget, c.seed, search_method_from_string(c.method));
    emit(c, to_json(r));
    out << "best score: " << std::setprecision(6) << r.best_score << " after " << r.evaluations << " evaluations\n";
    return exit_code::ok;
}

int cmd_validate(const RunConfig& c, std::ostream& out) {
    if (!c.scenario && c.tensor_path.empty()) throw ValidationError("validate: nothing to validate");
    if (c.scenario) out << "scenario ok: " << c.scenario->n_steps() << " steps, env " << env_variant_name(c.scenario->env) << "\n";
    if (!c.tensor_path.empty()) {
        const ProcessTensor pt = process_tensor_from_json(read_json_file(c.tensor_path));
        out << "tensor ok: " << pt.n_steps << " steps, basis " << to_string(pt.basis_label) << "\n";
    }
    return exit_code::ok;
}

// One qubit, two Hadamards, probed only through z-basis preparations and
// measurements.
int cmd_demo(std::ostream& out) {
    const double s = 1.0 / std::sqrt(2.0);
    CMatrix h(2, 2);
    h << s, s, s, -s;
    Scenario sc;
    sc.d_sys = 2;
    sc.env = MatrixUnitaryEnv{{h, h}};
    sc.initial = ProductInitial{identity(2) / 2.0, CMatrix::Identity(1, 1)};
    sc.times = {0.0, 1.0, 2.0};
    validate(sc);
    const CMatrix z[2] = {projector(CVector::Unit(2, 0)), projector(CVector::Unit(2, 1))};

    out << "Two Hadamard gates on one qubit, seen through z-basis preparations and measurements.\n";
    out << std::fixed << std::setprecision(3);
    out << "one gate   p(j|i): ";
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) out << (z[j] * h * z[i] * h.adjoint()).trace().real() << " ";
    out << "\ntwo gates  p(j|i): ";
    for (int i = 0; i < 2; ++i) {
        const CMatrix rho = run_sequence(sc, {preparation(z[i]), identity_map(2)});
        for (int j = 0; j < 2; ++j) out << (z[j] * rho).trace().real() << " ";
    }
    out << "\nComposing the incoherent-looking single step twice predicts 0.5 everywhere; the process\n"
           "returns the identity.  Read naively this looks like memory, yet the process is unitary.\n";

    const ProcessTensor pt = reconstruct(make_oracle(sc), full_op_basis(2), 2, 2);
    std::vector<std::vector<CPMapChoi>> hist;
    for (const auto& e : full_op_basis(2).elements) hist.push_back({e});
    const MarkovReport rep = markov_test(pt, hist, overcomplete_breaks(2));
    out << std::scientific << std::setprecision(2);
    out << "With full control the causal-break test finds " << rep.violations.size()
        << " violations (max discrepancy " << rep.max_discrepancy << "): "
        << (rep.is_markovian_within_test ? "Markovian" : "non-Markovian") << ".\n";
    return exit_code::ok;
}

int dispatch(const RunConfig& c, std::ostream& out) {
    if (c.command == "reconstruct") return cmd_reconstruct(c, out);
    if (c.command == "apply") return cmd_apply(c, out);
    if (c.command == "witness") return cmd_witness(c, out);
    if (c.command == "markov") return cmd_markov(c, out);
    if (c.command == "decouple") return cmd_decouple(c, out);
    if (c.command == "validate") return cmd_validate(c, out);
    if (c.command == "demo") return cmd_demo(out);
    throw ValidationError("unknown command '" + c.command + "'");
}

Scenario load_scenario(const json& j) {
    if (j.is_string()) return scenario_from_json(read_json_file(j.get<std::string>()));
    return scenario_from_json(j);
}

int env_threads() {
    if (const char* v = std::getenv("PROCTENSOR_THREADS")) {
        try {
            const int n = std::stoi(v);
            if (n > 0) return n;
        } catch (const std::exception&) {
        }
    }
    return 1;
}

}  // namespace

RunConfig config_from_json(const json& j, RunConfig c) {
    if (!j.is_object()) throw ValidationError("config: expected an object");
    auto str = [&](const char* key, std::string& dst) {
        if (!j.contains(key)) return;
        if (!j[key].is_string()) throw ValidationError(std::string("config.") + key + ": expected a string");
        dst = j[key].get<std::string>();
    };
    str("command", c.command);
    str("basis", c.basis);
    str("basis_file", c.basis_file);
    str("out", c.output_path);
    str("tensor", c.tensor_path);
    str("sequence", c.sequence_path);
    str("method", c.method);
    if (j.contains("scenario")) c.scenario = load_scenario(j["scenario"]);
    auto integer = [&](const char* key) -> long {
        if (!j[key].is_number_integer()) throw ValidationError(std::string("config.") + key + ": expected an integer");
        return j[key].get<long>();
    };
    if (j.contains("steps")) c.n_steps = static_cast<int>(integer("steps"));
    if (j.contains("seed")) c.seed = static_cast<std::uint64_t>(integer("seed"));
    if (j.contains("threads")) c.threads = static_cast<int>(integer("threads"));
    if (j.contains("budget")) c.budget = integer("budget");
    if (j.contains("allow_out_of_span")) {
        if (!j["allow_out_of_span"].is_boolean()) throw ValidationError("config.allow_out_of_span: expected a boolean");
        c.allow_out_of_span = j["allow_out_of_span"].get<bool>();
    }
    if (j.contains("tolerances")) {
        const json& t = j["tolerances"];
        if (!t.is_object()) throw ValidationError("config.tolerances: expected an object");
        for (auto it = t.begin(); it != t.end(); ++it) {
            if (!it.value().is_number()) throw ValidationError("config.tolerances." + it.key() + ": expected a number");
            c.tolerances[it.key()] = it.value().get<double>();
        }
    }
    return c;
}

std::optional<RunConfig> parse_command_line(int argc, char** argv, std::ostream& out, std::ostream& err,
                                            int& exit_status) {
    CLI::App app{"Process tensor reconstruction, witnesses and decoupling search"};
    app.require_subcommand(1);

    struct Raw {
        std::string config, scenario, basis, basis_file, out, tensor, sequence, method;
        int steps = 0, threads = 0;
        long budget = 0;
        std::uint64_t seed = 0;
        bool allow = false;
        std::vector<std::string> tols;
    } raw;

    for (const auto& [name, help] : kCommands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", raw.config, "JSON config file");
        sub->add_option("--scenario", raw.scenario, "scenario JSON file");
        sub->add_option("--basis", raw.basis, "full | unitary | projective | custom-file");
        sub->add_option("--basis-file", raw.basis_file, "basis JSON for --basis custom-file");
        sub->add_option("--steps", raw.steps, "number of steps");
        sub->add_option("--seed", raw.seed, "random seed");
        sub->add_option("--out", raw.out, "output JSON path");
        sub->add_option("--threads", raw.threads, "worker threads (default PROCTENSOR_THREADS or 1)");
        sub->add_option("--tol", raw.tols, "tolerance override NAME=VALUE (span, detect, markov, cptp)");
        sub->add_option("--tensor", raw.tensor, "process tensor JSON");
        sub->add_option("--sequence", raw.sequence, "operation sequence JSON");
        sub->add_flag("--allow-out-of-span", raw.allow, "evaluate sequences outside the tensor span");
        sub->add_option("--budget", raw.budget, "decoupling search budget");
        sub->add_option("--method", raw.method, "random | grid | coordinate_descent");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        exit_status = app.exit(e, out, err);
        if (exit_status != 0) exit_status = exit_code::validation;
        return std::nullopt;
    }

    CLI::App* sub = app.get_subcommands().front();
    auto given = [&](const char* opt) { return sub->get_option(opt)->count() > 0; };
    try {
        RunConfig c;
        c.threads = env_threads();
        if (given("--config")) c = config_from_json(read_json_file(raw.config), c);
        c.command = sub->get_name();
        if (given("--scenario")) c.scenario = scenario_from_json(read_json_file(raw.scenario));
        if (given("--basis")) c.basis = raw.basis;
        if (given("--basis-file")) c.basis_file = raw.basis_file;
        if (given("--steps")) c.n_steps = raw.steps;
        if (given("--seed")) c.seed = raw.seed;
        if (given("--out")) c.output_path = raw.out;
        if (given("--threads")) c.threads = raw.threads;
        if (given("--tensor")) c.tensor_path = raw.tensor;
        if (given("--sequence")) c.sequence_path = raw.sequence;
        if (given("--allow-out-of-span")) c.allow_out_of_span = raw.allow;
        if (given("--budget")) c.budget = raw.budget;
        if (given("--method")) c.method = raw.method;
        for (const auto& t : raw.tols) {
            const auto eq = t.find('=');
            if (eq == std::string::npos) throw ValidationError("--tol expects NAME=VALUE, got '" + t + "'");
            try {
                c.tolerances[t.substr(0, eq)] = std::stod(t.substr(eq + 1));
            } catch (const std::exception&) {
                throw ValidationError("--tol: bad value in '" + t + "'");
            }
        }
        if (c.threads < 1) throw ValidationError("--threads must be positive");
        if (c.n_steps && *c.n_steps < 1) throw ValidationError("--steps must be positive");
        return c;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        exit_status = exit_code::validation;
        return std::nullopt;
    }
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        return dispatch(config, out);
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << "\n";
        return exit_code::numerical;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return exit_code::validation;
    } catch (const std::exception& e) {
        err << "numerical error: " << e.what() << "\n";
        return exit_code::numerical;
    }
}

}  // namespace proctensor
