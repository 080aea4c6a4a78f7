#include "oracles.hpp"
#include "proctensor/errors.hpp"
#include "proctensor/serialization.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace proctensor;
namespace fs = std::filesystem;

namespace {

std::string error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const ValidationError& e) {
        return e.what();
    }
    return "";
}

json heisenberg_json() {
    return json::parse(R"({"d_sys": 2, "env": {"variant": "heisenberg_qubit", "omega": 1.0},
        "initial": {"type": "x-state", "params": {"a11": 0.35, "a22": 0.15, "a33": 0.15, "a44": 0.35,
                                                  "a14": 0.3, "a23": [0.0, 0.05]}},
        "times": [0.0, 0.3, 0.7]})");
}

}  // namespace

TEST(MatrixJson, SchemaAndExactRoundTrip) {
    std::mt19937_64 rng(1);
    const CMatrix m = oracle::ginibre(2, 3, rng);
    const json j = to_json(m);
    EXPECT_EQ(j["rows"], 2);
    EXPECT_EQ(j["cols"], 3);
    EXPECT_EQ(j["data"].size(), 6u);
    EXPECT_EQ(j["data"][1][0].get<double>(), m(0, 1).real());
    const CMatrix back = matrix_from_json(json::parse(dump(j)));
    EXPECT_TRUE(back == m);
}

TEST(MatrixJson, Diagnostics) {
    EXPECT_NE(error_of([] { matrix_from_json(json::parse(R"({"rows": 2, "cols": 2, "data": []})"), "x"); })
                  .find("x.data"),
              std::string::npos);
    EXPECT_NE(error_of([] { matrix_from_json(json::parse(R"({"rows": 1})"), "x"); }).find("missing field 'cols'"),
              std::string::npos);
    EXPECT_NE(error_of([] { matrix_from_json(json::parse(R"({"rows": 1, "cols": 1, "data": [[1, "a"]]})"), "x"); })
                  .find("x.data"),
              std::string::npos);
}

TEST(MapJson, RoundTripAndUnitaryShorthand) {
    const CMatrix q = projector(CVector::Unit(2, 0));
    const CPMapChoi c = causal_break(q, q);
    const CPMapChoi back = map_from_json(json::parse(dump(to_json(c))));
    EXPECT_TRUE(back.choi == c.choi);
    EXPECT_EQ(back.trace_class, TraceClass::non_increasing);
    EXPECT_EQ(back.d_in, 2);
    const CPMapChoi u = map_from_json(json{{"unitary", to_json(pauli_y())}});
    EXPECT_LT((u.choi - unitary_map(pauli_y()).choi).norm(), 1e-15);
    EXPECT_THROW(map_from_json(json{{"unitary", to_json(CMatrix(2.0 * identity(2)))}}), ValidationError);
}

TEST(BasisJson, RoundTripRecomputesDuals) {
    const OpBasis b = projective_basis_qubit();
    const json j = to_json(b);
    EXPECT_EQ(j["label"], "projective");
    EXPECT_EQ(j["duals"].size(), 9u);
    const OpBasis back = basis_from_json(json::parse(dump(j)));
    EXPECT_EQ(back.label, BasisLabel::projective);
    EXPECT_EQ(back.size(), 9);
    for (int i = 0; i < 9; ++i) EXPECT_LT((back.duals[i] - b.duals[i]).norm(), 1e-12);
}

TEST(ProcessTensorJson, RoundTripIsByteStable) {
    Scenario sc = scenario_from_json(heisenberg_json());
    const ProcessTensor pt = reconstruct(make_oracle(sc), unitary_basis_qubit(), 2, 2);
    const std::string text = dump(to_json(pt));
    const json j = json::parse(text);
    EXPECT_EQ(j["leg_order"], kLegOrder);
    EXPECT_EQ(j["n_steps"], 2);
    const ProcessTensor back = process_tensor_from_json(j);
    EXPECT_TRUE(back.choi == pt.choi);
    EXPECT_EQ(dump(to_json(back)), text);
}

TEST(ProcessTensorJson, DimensionChecked) {
    Scenario sc = scenario_from_json(heisenberg_json());
    json j = to_json(reconstruct(make_oracle(sc), unitary_basis_qubit(), 2, 2));
    j["n_steps"] = 1;
    EXPECT_THROW(process_tensor_from_json(j), ValidationError);
}

TEST(ScenarioJson, SchemaExampleParses) {
    const Scenario sc = scenario_from_json(heisenberg_json());
    EXPECT_EQ(sc.n_steps(), 2);
    EXPECT_EQ(env_variant_name(sc.env), "heisenberg_qubit");
    const auto& x = std::get<XStateParams>(sc.initial);
    EXPECT_EQ(x.a14, Complex(0.3, 0.0));
    EXPECT_EQ(x.a23, Complex(0.0, 0.05));
}

TEST(ScenarioJson, EveryVariantRoundTrips) {
    std::mt19937_64 rng(2);
    std::vector<Scenario> all;
    all.push_back(scenario_from_json(heisenberg_json()));
    Scenario sp;
    sp.env = ShallowPocketEnv{1.5, 0.25};
    sp.initial = ProductInitial{oracle::random_density(2, rng), CMatrix::Identity(1, 1)};
    sp.times = {0.0, 0.5, 1.0};
    sp.label = "pocket";
    all.push_back(sp);
    Scenario sw;
    sw.env = SwapEnv{};
    sw.initial = oracle::random_density(4, rng);
    sw.times = {0.0, 1.0};
    sw.default_map = unitary_map(pauli_x());
    all.push_back(sw);
    Scenario mu;
    mu.env = MatrixUnitaryEnv{{oracle::haar(4, rng)}};
    mu.initial = ProductInitial{oracle::random_density(2, rng), oracle::random_density(2, rng)};
    mu.times = {0.0, 2.0};
    all.push_back(mu);
    for (const auto& sc : all) {
        const std::string text = dump(to_json(sc));
        const Scenario back = scenario_from_json(json::parse(text));
        EXPECT_EQ(dump(to_json(back)), text);
        EXPECT_TRUE(initial_state(back) == initial_state(sc));
    }
}

TEST(ScenarioJson, FieldPathDiagnostics) {
    json j = heisenberg_json();
    j["env"]["omega"] = "fast";
    EXPECT_NE(error_of([&] { scenario_from_json(j); }).find("scenario.env.omega: expected a number"),
              std::string::npos);
    j = heisenberg_json();
    j["initial"]["params"].erase("a11");
    EXPECT_NE(error_of([&] { scenario_from_json(j); }).find("scenario.initial.params"), std::string::npos);
    j = heisenberg_json();
    j["env"]["variant"] = "lossy";
    EXPECT_NE(error_of([&] { scenario_from_json(j); }).find("unknown variant 'lossy'"), std::string::npos);
    j = heisenberg_json();
    j["times"] = json::array({0.0, "x"});
    EXPECT_NE(error_of([&] { scenario_from_json(j); }).find("scenario.times[1]"), std::string::npos);
    j = heisenberg_json();
    j["initial"]["params"]["a14"] = 0.9;
    EXPECT_NE(error_of([&] { scenario_from_json(j); }).find("a11*a44"), std::string::npos);
}

TEST(ReportJson, Types) {
    CorrelationWitness w;
    w.k_matrix = CMatrix::Zero(4, 4);
    w.basis_label = "unitary";
    EXPECT_EQ(to_json(w)["type"], "correlation");
    MarkovReport r;
    r.violations.push_back({0, 1, 2, 3, 0.5});
    r.is_markovian_within_test = false;
    const json mj = to_json(r, "full");
    EXPECT_EQ(mj["type"], "markov");
    EXPECT_EQ(mj["detected"], true);
    EXPECT_EQ(mj["violations"].size(), 1u);
    EXPECT_EQ(to_json(CptpConsistency{0.1, true}, "projective")["type"], "cptp");
}

TEST(DecoupleJson, RoundTrip) {
    DecoupleResult r;
    r.best_sequence = {{0.1, 0.2, 0.3}, {1.0 / 3.0, 2.0, -1.0}};
    r.best_score = 1e-17 / 3.0;
    r.r_choi = identity_map(2).choi;
    r.evaluations = 42;
    const std::string text = dump(to_json(r));
    const DecoupleResult back = decouple_result_from_json(json::parse(text));
    EXPECT_EQ(back.best_sequence, r.best_sequence);
    EXPECT_EQ(back.best_score, r.best_score);
    EXPECT_EQ(dump(to_json(back)), text);
}

TEST(Files, AtomicWriteAndRead) {
    const fs::path dir = fs::temp_directory_path() / "proctensor_serialization_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string path = (dir / "a.json").string();
    write_file_atomic(path, dump(json{{"k", 1}}));
    EXPECT_EQ(read_json_file(path)["k"], 1);
    int files = 0;
    for (const auto& e : fs::directory_iterator(dir)) files += e.is_regular_file();
    EXPECT_EQ(files, 1);
    EXPECT_THROW(write_file_atomic((dir / "missing" / "b.json").string(), "x"), ValidationError);
    EXPECT_THROW(read_json_file((dir / "nope.json").string()), ValidationError);
    std::ofstream(dir / "bad.json") << "{\n  \"a\": ,\n}";
    const std::string msg = error_of([&] { read_json_file((dir / "bad.json").string()); });
    EXPECT_NE(msg.find("line 2"), std::string::npos) << msg;
    fs::remove_all(dir);
}
