#pragma once

#include "proctensor/process_tensor.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace proctensor {

using EulerAngles = std::array<double, 3>;  // ZYZ: Rz(a) Ry(b) Rz(c)

CMatrix zyz_unitary(const EulerAngles& angles);

// Channel taking initial states to final states once the interior steps
// 1..N-1 of a tensor with an initial-state leg are filled with `seq`
// (chronological).  Throws when an operation lies outside its step's span.
CPMapChoi r_map(const ProcessTensor& pt, const std::vector<CPMapChoi>& seq);

// 1 − tr[(R/d)²]: zero exactly for unitary channels.
double unitarity_distance(const CPMapChoi& channel);

struct UnitarityScore {
    double distance = 0.0;
    bool trace_preserving = true;  // false flags a distance computed for a non-TP input
};
UnitarityScore unitarity_score(const CPMapChoi& channel);

enum class SearchMethod { random, grid, coordinate_descent };
std::string to_string(SearchMethod m);
SearchMethod search_method_from_string(const std::string& s);

struct DecoupleResult {
    std::vector<EulerAngles> best_sequence;
    double best_score = 1.0;
    CMatrix r_choi;
    long evaluations = 0;
};

DecoupleResult search(const ProcessTensor& pt, int n_interior_ops, long budget, std::uint64_t seed,
                      SearchMethod method);

struct LindbladContrast {
    CMatrix pt_prediction;
    CMatrix lindblad_prediction;
    double trace_distance = 0.0;
};

// Two intervals dt around one interior kick: the reconstructed-tensor
// prediction against the dephasing master-equation composite.
LindbladContrast lindblad_contrast(double g, double gamma, double dt, const CPMapChoi& seq_op, const CMatrix& rho0);

}  // namespace proctensor
