#pragma once

#include <string>

#include "wied/config.hpp"

namespace wied {

// exit codes: 0 converged, 1 config/format error, 2 non-convergence
int run_solve(const RunConfig& cfg, const std::string& out_dir, bool quiet);
int run_sweep(const RunConfig& cfg, const std::string& out_dir, bool quiet);
int run_reference(const RunConfig& cfg, const std::string& out_dir, bool quiet);
int run_diagnose(const RunConfig& cfg, const std::string& out_dir, bool quiet,
                 const std::string& field_path);

} // namespace wied
