#include "proctensor/cli.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace proctensor;
namespace fs = std::filesystem;

namespace {

struct Result {
    int status = -1;
    std::string out, err;
};

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("proctensor_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    void write(const std::string& name, const std::string& text) const { std::ofstream(dir_ / name) << text; }

    static std::string slurp(const std::string& p) {
        std::ifstream in(p);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    Result run(const std::string& args, const std::string& env = "") const {
        const std::string o = path("stdout.txt"), e = path("stderr.txt");
        const std::string cmd = env + " " + PROCTENSOR_CLI_PATH + " " + args + " >" + o + " 2>" + e;
        const int raw = std::system(cmd.c_str());
        Result r;
        r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
        r.out = slurp(o);
        r.err = slurp(e);
        return r;
    }

    void heisenberg(const std::string& name, const std::string& times = "[0.0, 0.3, 0.7]") const {
        write(name, R"({"d_sys": 2, "env": {"variant": "heisenberg_qubit", "omega": 1.0},
            "initial": {"type": "x-state", "params": {"a11": 0.35, "a22": 0.15, "a33": 0.15, "a44": 0.35, "a14": 0.3}},
            "times": )" + times + "}");
    }

    void pocket(const std::string& name) const {
        write(name, R"({"d_sys": 2, "env": {"variant": "shallow_pocket", "g": 1.0, "gamma": 0.8},
            "initial": {"type": "product",
                        "rho_s": {"rows": 2, "cols": 2, "data": [[0.5,0],[0.5,0],[0.5,0],[0.5,0]]},
                        "rho_e": {"rows": 1, "cols": 1, "data": [[1,0]]}},
            "times": [0.0, 0.6, 1.2]})");
    }

    fs::path dir_;
};

}  // namespace

TEST_F(Cli, DemoRuns) {
    const Result r = run("demo");
    EXPECT_EQ(r.status, 0);
    EXPECT_NE(r.out.find("Hadamard"), std::string::npos);
    EXPECT_NE(r.out.find("0 violations"), std::string::npos);
}

TEST_F(Cli, ReconstructUnitaryTwoSteps) {
    heisenberg("h.json");
    const Result r = run("reconstruct --scenario " + path("h.json") + " --basis unitary --steps 2 --out " +
                         path("pt.json"));
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_NE(r.out.find("oracle calls: 100"), std::string::npos);
    const json j = read_json_file(path("pt.json"));
    EXPECT_EQ(j["n_steps"], 2);
    EXPECT_EQ(j["basis_label"], "unitary");
    EXPECT_EQ(j["step_bases"][0]["elements"].size(), 10u);
    EXPECT_EQ(j["choi"]["rows"], 32);
}

TEST_F(Cli, OutputsAreDeterministicAndRoundTrip) {
    heisenberg("h.json");
    ASSERT_EQ(run("reconstruct --scenario " + path("h.json") + " --basis full --out " + path("a.json")).status, 0);
    ASSERT_EQ(run("reconstruct --scenario " + path("h.json") + " --basis full --threads 3 --out " + path("b.json"))
                  .status,
              0);
    const std::string a = slurp(path("a.json"));
    EXPECT_EQ(a, slurp(path("b.json")));
    EXPECT_EQ(dump(to_json(process_tensor_from_json(json::parse(a)))), a);

    pocket("p.json");
    ASSERT_EQ(run("decouple --scenario " + path("p.json") + " --budget 300 --seed 3 --out " + path("d1.json")).status,
              0);
    ASSERT_EQ(run("decouple --scenario " + path("p.json") + " --budget 300 --seed 3 --out " + path("d2.json")).status,
              0);
    const std::string d = slurp(path("d1.json"));
    EXPECT_EQ(d, slurp(path("d2.json")));
    EXPECT_EQ(dump(to_json(decouple_result_from_json(json::parse(d)))), d);
}

TEST_F(Cli, WitnessDetectsXStateCoherence) {
    heisenberg("x.json", "[0.0, 0.4]");
    const Result r = run("witness --scenario " + path("x.json") + " --basis projective --out " + path("w.json"));
    ASSERT_EQ(r.status, 0) << r.err;
    const json j = read_json_file(path("w.json"));
    EXPECT_EQ(j["type"], "correlation");
    EXPECT_EQ(j["detected"], true);
    EXPECT_EQ(j["cptp"]["type"], "cptp");
    EXPECT_EQ(j["cptp"]["detected"], true);
}

TEST_F(Cli, DecouplePocket) {
    pocket("p.json");
    const Result r = run("decouple --scenario " + path("p.json") + " --budget 5000 --seed 7 --out " + path("d.json"));
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_LT(read_json_file(path("d.json"))["best_score"].get<double>(), 1e-8);
}

TEST_F(Cli, MarkovReport) {
    heisenberg("x.json", "[0.0, 0.4]");
    const Result r = run("markov --scenario " + path("x.json") + " --out " + path("m.json"));
    ASSERT_EQ(r.status, 0) << r.err;
    const json j = read_json_file(path("m.json"));
    EXPECT_EQ(j["type"], "markov");
    EXPECT_EQ(j["detected"], true);
    EXPECT_FALSE(j["violations"].empty());
}

TEST_F(Cli, ApplyChecksSpan) {
    heisenberg("h.json");
    ASSERT_EQ(run("reconstruct --scenario " + path("h.json") + " --basis unitary --out " + path("pt.json")).status, 0);
    write("in.json", R"({"ops": [{"unitary": {"rows": 2, "cols": 2, "data": [[0,0],[1,0],[1,0],[0,0]]}},
                                 {"unitary": {"rows": 2, "cols": 2, "data": [[1,0],[0,0],[0,0],[1,0]]}}]})");
    Result r = run("apply --tensor " + path("pt.json") + " --sequence " + path("in.json") + " --out " + path("o.json"));
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_NEAR(read_json_file(path("o.json"))["trace"].get<double>(), 1.0, 1e-10);

    // measure |0⟩ then reprepare |0⟩ at step 0: not unital
    write("out.json", R"({"ops": [{"choi": {"rows": 4, "cols": 4, "data": [[1,0],[0,0],[0,0],[0,0],
                                   [0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0],[0,0]]},
                                   "d_in": 2, "d_out": 2},
                                  {"unitary": {"rows": 2, "cols": 2, "data": [[1,0],[0,0],[0,0],[1,0]]}}]})");
    r = run("apply --tensor " + path("pt.json") + " --sequence " + path("out.json"));
    EXPECT_EQ(r.status, 2);
    EXPECT_NE(r.err.find("--allow-out-of-span"), std::string::npos);
    r = run("apply --tensor " + path("pt.json") + " --sequence " + path("out.json") + " --allow-out-of-span --out " +
            path("o2.json"));
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_EQ(read_json_file(path("o2.json"))["out_of_span"], true);
    EXPECT_GT(read_json_file(path("o2.json"))["span_residual"].get<double>(), 0.1);
}

TEST_F(Cli, ConfigFileAndTolerances) {
    heisenberg("h.json");
    write("c.json", R"({"scenario": ")" + path("h.json") +
                        R"(", "basis": "unitary", "out": ")" + path("w.json") + R"(", "tolerances": {"detect": 1e-9}})");
    const Result r = run("witness --config " + path("c.json"));
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_EQ(read_json_file(path("w.json"))["basis_label"], "unitary");
    EXPECT_EQ(run("witness --config " + path("c.json") + " --tol detect").status, 2);
}

TEST_F(Cli, ValidateAndDiagnostics) {
    heisenberg("h.json");
    EXPECT_EQ(run("validate --scenario " + path("h.json")).status, 0);

    write("bad_field.json", R"({"d_sys": 2, "env": {"variant": "heisenberg_qubit", "omega": "x"},
        "initial": {"type": "matrix", "value": {"rows": 1, "cols": 1, "data": [[1,0]]}}, "times": [0, 1]})");
    Result r = run("validate --scenario " + path("bad_field.json"));
    EXPECT_EQ(r.status, 2);
    EXPECT_NE(r.err.find("scenario.env.omega"), std::string::npos) << r.err;

    write("bad_syntax.json", "{\n \"d_sys\": 2,\n \"env\": }\n");
    r = run("validate --scenario " + path("bad_syntax.json"));
    EXPECT_EQ(r.status, 2);
    EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;

    EXPECT_EQ(run("validate --scenario " + path("missing.json")).status, 2);
    EXPECT_EQ(run("frobnicate").status, 2);
    EXPECT_EQ(run("reconstruct --scenario " + path("h.json") + " --steps 3").status, 2);
    EXPECT_EQ(run("reconstruct").status, 2);
    EXPECT_EQ(run("decouple --scenario " + path("h.json") + " --budget 0").status, 2);
}

TEST_F(Cli, NumericalFailureExitsThree) {
    heisenberg("huge.json", "[0.0, 1e10]");
    std::string text;
    {
        std::ifstream in(path("huge.json"));
        std::stringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    const auto at = text.find("\"omega\": 1.0");
    text.replace(at, 12, "\"omega\": 1e300");
    write("huge.json", text);
    const Result r = run("reconstruct --scenario " + path("huge.json") + " --basis unitary");
    EXPECT_EQ(r.status, 3) << r.out << r.err;
}

TEST_F(Cli, ThreadsFromEnvironment) {
    heisenberg("h.json");
    EXPECT_EQ(run("reconstruct --scenario " + path("h.json") + " --basis unitary", "PROCTENSOR_THREADS=2").status, 0);
}

TEST(ParseCommandLine, FillsConfig) {
    const char* argv[] = {"proctensor", "decouple", "--budget", "77", "--seed", "5", "--method", "grid",
                          "--tol",      "span=1e-6"};
    std::ostringstream out, err;
    int status = 0;
    const auto c = parse_command_line(10, const_cast<char**>(argv), out, err, status);
    ASSERT_TRUE(c.has_value()) << err.str();
    EXPECT_EQ(c->command, "decouple");
    EXPECT_EQ(c->budget, 77);
    EXPECT_EQ(c->seed, 5u);
    EXPECT_EQ(c->method, "grid");
    EXPECT_DOUBLE_EQ(c->tolerances.at("span"), 1e-6);
}

TEST(ParseCommandLine, HelpExitsZero) {
    const char* argv[] = {"proctensor", "--help"};
    std::ostringstream out, err;
    int status = -1;
    EXPECT_FALSE(parse_command_line(2, const_cast<char**>(argv), out, err, status).has_value());
    EXPECT_EQ(status, 0);
    EXPECT_NE(out.str().find("reconstruct"), std::string::npos);
}

TEST(ConfigFromJson, RejectsWrongTypes) {
    EXPECT_THROW(config_from_json(json{{"seed", "x"}}), std::invalid_argument);
    EXPECT_THROW(config_from_json(json::array()), std::invalid_argument);
    EXPECT_EQ(config_from_json(json{{"budget", 12}}).budget, 12);
}
