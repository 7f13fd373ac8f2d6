#pragma once

#include <array>
#include <string>
#include <vector>

#include "wied/grid.hpp"
#include "wied/model.hpp"
#include "wied/solver.hpp"

namespace wied {

// parsed [section] key = value file; unknown keys are rejected by name
struct RunConfig {
    ProblemSpec problem;
    std::vector<double> eps_list;  // sweep only
    std::array<std::array<double, 2>, 2> extents{{{0.0, 1.0}, {0.0, 1.0}}};
    std::array<int, 2> nx{2, 2};
    double T = 1.0;
    int nt = 2;
    SolverConfig solver;
    std::vector<double> radii;   // diagnostics: ball/slab radii
    double theta = 0.0;          // positivity threshold, 0 = automatic
    double margin = 10.0;
    double qr_radius = 0.5;      // L2 comparison cylinder
    std::string output_dir;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// canonical form; serialize(parse(serialize(parse(x)))) == serialize(parse(x))
std::string serialize_config(const RunConfig& c);

GridPtr make_run_grid(const RunConfig& c);

} // namespace wied
