#pragma once

#include "proctensor/serialization.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

namespace proctensor {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int validation = 2;
inline constexpr int numerical = 3;
}  // namespace exit_code

struct RunConfig {
    std::string command;  // reconstruct | apply | witness | markov | decouple | validate | demo
    std::optional<Scenario> scenario;
    std::string basis;  // full | unitary | projective | custom-file; empty picks the command default
    std::string basis_file;
    std::optional<int> n_steps;
    std::uint64_t seed = 7;
    std::string output_path;
    std::map<std::string, double> tolerances;  // span, detect, markov, cptp
    int threads = 1;

    std::string tensor_path;    // apply, validate
    std::string sequence_path;  // apply
    bool allow_out_of_span = false;
    long budget = 5000;
    std::string method = "coordinate_descent";
};

// Fills a config from a JSON object with the same keys as the long options
// ("scenario" may be an inline object or a file path).
RunConfig config_from_json(const json& j, RunConfig base = {});

// Parses argv; on failure prints a diagnostic to err and returns nullopt with
// `exit_status` set (0 for --help).
std::optional<RunConfig> parse_command_line(int argc, char** argv, std::ostream& out, std::ostream& err,
                                            int& exit_status);

// Executes one pipeline.  Writes JSON artifacts to config.output_path (when
// set) and a human-readable summary to `out`.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace proctensor
