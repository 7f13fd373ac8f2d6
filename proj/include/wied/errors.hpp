#pragma once

#include <stdexcept>
#include <string>

namespace wied {

// Invalid construction parameters (counts, ranges, degenerate extents).
class parameter_error : public std::invalid_argument {
public:
    explicit parameter_error(const std::string& what) : std::invalid_argument(what) {}
};

// Geometric/domain mismatch (point outside grid, incompatible grids).
class domain_error : public std::runtime_error {
public:
    explicit domain_error(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite or otherwise corrupt field data.
class data_error : public std::runtime_error {
public:
    explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed files: config text, field dumps, tabulated data.
class format_error : public std::runtime_error {
public:
    explicit format_error(const std::string& what) : std::runtime_error(what) {}
};

// API misuse (e.g. a gamma=1-only check called with gamma!=1).
class usage_error : public std::logic_error {
public:
    explicit usage_error(const std::string& what) : std::logic_error(what) {}
};

} // namespace wied
