#include "proctensor/serialization.hpp"

#include "proctensor/errors.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace proctensor {

namespace {

const json& field(const json& j, const char* key, const std::string& where) {
    if (!j.is_object()) throw ValidationError(where + ": expected an object");
    auto it = j.find(key);
    if (it == j.end()) throw ValidationError(where + ": missing field '" + key + "'");
    return *it;
}

double number(const json& j, const std::string& where) {
    if (!j.is_number()) throw ValidationError(where + ": expected a number");
    return j.get<double>();
}

int integer(const json& j, const std::string& where) {
    if (!j.is_number_integer()) throw ValidationError(where + ": expected an integer");
    return j.get<int>();
}

std::string text(const json& j, const std::string& where) {
    if (!j.is_string()) throw ValidationError(where + ": expected a string");
    return j.get<std::string>();
}

// A complex number is [re, im]; a bare number is accepted as real.
Complex complex_from(const json& j, const std::string& where) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
        return {j[0].get<double>(), j[1].get<double>()};
    }
    throw ValidationError(where + ": expected [re, im]");
}

json complex_to(Complex c) { return json::array({c.real(), c.imag()}); }

std::string trace_class_name(TraceClass t) {
    switch (t) {
        case TraceClass::preserving: return "preserving";
        case TraceClass::non_increasing: return "non_increasing";
        case TraceClass::unrestricted: return "unrestricted";
    }
    return "unrestricted";
}

TraceClass trace_class_from(const std::string& s, const std::string& where) {
    if (s == "preserving") return TraceClass::preserving;
    if (s == "non_increasing") return TraceClass::non_increasing;
    if (s == "unrestricted") return TraceClass::unrestricted;
    throw ValidationError(where + ": unknown trace class '" + s + "'");
}

}  // namespace

json to_json(const CMatrix& m) {
    json data = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(complex_to(m(r, c)));
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

CMatrix matrix_from_json(const json& j, const std::string& where) {
    const int rows = integer(field(j, "rows", where), where + ".rows");
    const int cols = integer(field(j, "cols", where), where + ".cols");
    if (rows <= 0 || cols <= 0) throw ValidationError(where + ": dimensions must be positive");
    const json& data = field(j, "data", where);
    if (!data.is_array() || data.size() != static_cast<std::size_t>(rows) * cols) {
        throw ValidationError(where + ".data: expected " + std::to_string(rows * cols) + " entries");
    }
    CMatrix m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const std::size_t i = static_cast<std::size_t>(r) * cols + c;
            m(r, c) = complex_from(data[i], where + ".data[" + std::to_string(i) + "]");
        }
    return m;
}

json to_json(const CPMapChoi& m) {
    return json{{"choi", to_json(m.choi)},
                {"d_in", m.d_in},
                {"d_out", m.d_out},
                {"trace_class", trace_class_name(m.trace_class)}};
}

CPMapChoi map_from_json(const json& j, const std::string& where) {
    // A unitary may be given directly as {"unitary": CMatrix}.
    if (j.is_object() && j.contains("unitary")) {
        const CMatrix u = matrix_from_json(j["unitary"], where + ".unitary");
        if (u.rows() != u.cols() || !is_unitary(u, 1e-10)) throw ValidationError(where + ".unitary: not unitary");
        return unitary_map(u);
    }
    TraceClass tc = TraceClass::unrestricted;
    if (j.is_object() && j.contains("trace_class")) {
        tc = trace_class_from(text(j["trace_class"], where + ".trace_class"), where);
    }
    return make_map(matrix_from_json(field(j, "choi", where), where + ".choi"),
                    integer(field(j, "d_in", where), where + ".d_in"),
                    integer(field(j, "d_out", where), where + ".d_out"), tc);
}

json to_json(const OpBasis& b) {
    json el = json::array(), du = json::array();
    for (const auto& e : b.elements) el.push_back(to_json(e.choi));
    for (const auto& d : b.duals) du.push_back(to_json(d));
    return json{{"label", to_string(b.label)}, {"d_in", b.d_in}, {"d_out", b.d_out}, {"elements", el}, {"duals", du}};
}

OpBasis basis_from_json(const json& j, const std::string& where) {
    const BasisLabel label = basis_label_from_string(text(field(j, "label", where), where + ".label"));
    const int d_in = integer(field(j, "d_in", where), where + ".d_in");
    const int d_out = integer(field(j, "d_out", where), where + ".d_out");
    const json& el = field(j, "elements", where);
    if (!el.is_array() || el.empty()) throw ValidationError(where + ".elements: expected a nonempty array");
    std::vector<CPMapChoi> elements;
    for (std::size_t i = 0; i < el.size(); ++i) {
        elements.push_back(make_map(matrix_from_json(el[i], where + ".elements[" + std::to_string(i) + "]"), d_in,
                                    d_out));
    }
    // Duals are recomputed rather than trusted; they are stored for readers.
    return make_basis(std::move(elements), label);
}

json to_json(const ProcessTensor& pt) {
    json bases = json::array();
    for (const auto& b : pt.step_bases) bases.push_back(to_json(b));
    return json{{"choi", to_json(pt.choi)},
                {"n_steps", pt.n_steps},
                {"d_sys", pt.d_sys},
                {"basis_label", to_string(pt.basis_label)},
                {"leg_order", kLegOrder},
                {"step_bases", bases}};
}

ProcessTensor process_tensor_from_json(const json& j) {
    const std::string where = "process_tensor";
    ProcessTensor pt;
    pt.choi = matrix_from_json(field(j, "choi", where), where + ".choi");
    pt.n_steps = integer(field(j, "n_steps", where), where + ".n_steps");
    pt.d_sys = integer(field(j, "d_sys", where), where + ".d_sys");
    pt.basis_label = basis_label_from_string(text(field(j, "basis_label", where), where + ".basis_label"));
    const json& bases = field(j, "step_bases", where);
    if (!bases.is_array() || static_cast<int>(bases.size()) != pt.n_steps) {
        throw ValidationError(where + ".step_bases: expected one basis per step");
    }
    for (std::size_t i = 0; i < bases.size(); ++i) {
        pt.step_bases.push_back(basis_from_json(bases[i], where + ".step_bases[" + std::to_string(i) + "]"));
    }
    const long dim = pt.d_sys * pt.input_dim();
    if (pt.choi.rows() != dim || pt.choi.cols() != dim) {
        throw ValidationError(where + ".choi: dimension does not match the step bases");
    }
    return pt;
}

json to_json(const Scenario& sc) {
    json env;
    if (const auto* m = std::get_if<MatrixUnitaryEnv>(&sc.env)) {
        json us = json::array();
        for (const auto& u : m->unitaries) us.push_back(to_json(u));
        env = {{"variant", "matrix_unitary"}, {"unitaries", us}};
    } else if (const auto* h = std::get_if<HeisenbergEnv>(&sc.env)) {
        env = {{"variant", "heisenberg_qubit"}, {"omega", h->omega}};
    } else if (const auto* s = std::get_if<ShallowPocketEnv>(&sc.env)) {
        env = {{"variant", "shallow_pocket"}, {"g", s->g}, {"gamma", s->gamma}};
    } else {
        env = {{"variant", "swap_qubit"}};
    }
    json init;
    if (const auto* x = std::get_if<XStateParams>(&sc.initial)) {
        init = {{"type", "x-state"},
                {"params",
                 {{"a11", x->a11},
                  {"a22", x->a22},
                  {"a33", x->a33},
                  {"a44", x->a44},
                  {"a14", complex_to(x->a14)},
                  {"a23", complex_to(x->a23)}}}};
    } else if (const auto* m = std::get_if<CMatrix>(&sc.initial)) {
        init = {{"type", "matrix"}, {"value", to_json(*m)}};
    } else {
        const auto& p = std::get<ProductInitial>(sc.initial);
        init = {{"type", "product"}, {"rho_s", to_json(p.rho_s)}, {"rho_e", to_json(p.rho_e)}};
    }
    json j{{"d_sys", sc.d_sys}, {"env", env}, {"initial", init}, {"times", sc.times}, {"label", sc.label}};
    if (sc.default_map) j["default_map"] = to_json(*sc.default_map);
    return j;
}

Scenario scenario_from_json(const json& j) {
    const std::string where = "scenario";
    Scenario sc;
    sc.d_sys = integer(field(j, "d_sys", where), where + ".d_sys");
    const json& env = field(j, "env", where);
    const std::string variant = text(field(env, "variant", where + ".env"), where + ".env.variant");
    if (variant == "heisenberg_qubit") {
        sc.env = HeisenbergEnv{number(field(env, "omega", where + ".env"), where + ".env.omega")};
    } else if (variant == "shallow_pocket") {
        sc.env = ShallowPocketEnv{number(field(env, "g", where + ".env"), where + ".env.g"),
                                  number(field(env, "gamma", where + ".env"), where + ".env.gamma")};
    } else if (variant == "swap_qubit") {
        sc.env = SwapEnv{};
    } else if (variant == "matrix_unitary") {
        const json& us = field(env, "unitaries", where + ".env");
        if (!us.is_array() || us.empty()) throw ValidationError(where + ".env.unitaries: expected a nonempty array");
        MatrixUnitaryEnv m;
        for (std::size_t i = 0; i < us.size(); ++i) {
            m.unitaries.push_back(matrix_from_json(us[i], where + ".env.unitaries[" + std::to_string(i) + "]"));
        }
        sc.env = std::move(m);
    } else {
        throw ValidationError(where + ".env.variant: unknown variant '" + variant + "'");
    }

    const json& init = field(j, "initial", where);
    const std::string type = text(field(init, "type", where + ".initial"), where + ".initial.type");
    if (type == "x-state") {
        const json& p = field(init, "params", where + ".initial");
        const std::string pw = where + ".initial.params";
        XStateParams x;
        x.a11 = number(field(p, "a11", pw), pw + ".a11");
        x.a22 = number(field(p, "a22", pw), pw + ".a22");
        x.a33 = number(field(p, "a33", pw), pw + ".a33");
        x.a44 = number(field(p, "a44", pw), pw + ".a44");
        if (p.contains("a14")) x.a14 = complex_from(p["a14"], pw + ".a14");
        if (p.contains("a23")) x.a23 = complex_from(p["a23"], pw + ".a23");
        sc.initial = x;
    } else if (type == "matrix") {
        sc.initial = matrix_from_json(field(init, "value", where + ".initial"), where + ".initial.value");
    } else if (type == "product") {
        sc.initial = ProductInitial{matrix_from_json(field(init, "rho_s", where + ".initial"), where + ".initial.rho_s"),
                                    matrix_from_json(field(init, "rho_e", where + ".initial"), where + ".initial.rho_e")};
    } else {
        throw ValidationError(where + ".initial.type: unknown type '" + type + "'");
    }

    const json& times = field(j, "times", where);
    if (!times.is_array()) throw ValidationError(where + ".times: expected an array");
    for (std::size_t i = 0; i < times.size(); ++i) {
        sc.times.push_back(number(times[i], where + ".times[" + std::to_string(i) + "]"));
    }
    if (j.contains("label")) sc.label = text(j["label"], where + ".label");
    if (j.contains("default_map")) sc.default_map = map_from_json(j["default_map"], where + ".default_map");
    validate(sc);
    return sc;
}

json to_json(const CorrelationWitness& w) {
    return json{{"type", "correlation"},
                {"detected", w.detected},
                {"norm", w.norm},
                {"basis_label", w.basis_label},
                {"k_matrix", to_json(w.k_matrix)}};
}

json to_json(const MarkovReport& r, const std::string& basis_label) {
    json v = json::array();
    for (const auto& x : r.violations) {
        v.push_back({{"history1", x.history1},
                     {"history2", x.history2},
                     {"break1", x.break1},
                     {"break2", x.break2},
                     {"discrepancy", x.discrepancy}});
    }
    return json{{"type", "markov"},
                {"detected", !r.is_markovian_within_test},
                {"is_markovian_within_test", r.is_markovian_within_test},
                {"tolerance", r.tolerance},
                {"max_discrepancy", r.max_discrepancy},
                {"basis_label", basis_label},
                {"violations", v}};
}

json to_json(const CptpConsistency& r, const std::string& basis_label) {
    return json{{"type", "cptp"}, {"detected", r.detected}, {"residual", r.residual}, {"basis_label", basis_label}};
}

json to_json(const DecoupleResult& r) {
    json seq = json::array();
    for (const auto& e : r.best_sequence) seq.push_back({e[0], e[1], e[2]});
    return json{{"best_sequence", seq},
                {"best_score", r.best_score},
                {"evaluations", r.evaluations},
                {"r_choi", to_json(r.r_choi)}};
}

DecoupleResult decouple_result_from_json(const json& j) {
    const std::string where = "decouple_result";
    DecoupleResult r;
    const json& seq = field(j, "best_sequence", where);
    if (!seq.is_array()) throw ValidationError(where + ".best_sequence: expected an array");
    for (std::size_t i = 0; i < seq.size(); ++i) {
        const std::string w = where + ".best_sequence[" + std::to_string(i) + "]";
        if (!seq[i].is_array() || seq[i].size() != 3) throw ValidationError(w + ": expected three angles");
        r.best_sequence.push_back({number(seq[i][0], w), number(seq[i][1], w), number(seq[i][2], w)});
    }
    r.best_score = number(field(j, "best_score", where), where + ".best_score");
    const json& ev = field(j, "evaluations", where);
    if (!ev.is_number_integer()) throw ValidationError(where + ".evaluations: expected an integer");
    r.evaluations = ev.get<long>();
    r.r_choi = matrix_from_json(field(j, "r_choi", where), where + ".r_choi");
    return r;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return json::parse(ss.str());
    } catch (const json::parse_error& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ValidationError("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out) throw ValidationError("write failed for '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw ValidationError("cannot rename onto '" + path + "': " + ec.message());
    }
}

}  // namespace proctensor
