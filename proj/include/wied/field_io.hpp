#pragma once

#include <string>

#include "wied/grid.hpp"

namespace wied {

// Writes <stem>.json (grid metadata + gamma/epsilon, ordering "t-slowest")
// and <stem>.f64 (raw little-endian float64 nodal values, flat order).
void dump_field(const ScalarField& f, const std::string& stem,
                double gamma, double epsilon);

struct LoadedField {
    ScalarField field;
    double gamma = 0.0;
    double epsilon = 0.0;
};

// stem as in dump_field; throws format_error on malformed/truncated files.
LoadedField load_field(const std::string& stem);

} // namespace wied
