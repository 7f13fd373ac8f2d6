#include "wied/config.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "wied/errors.hpp"

namespace wied {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double parse_double(const std::string& key, const std::string& v) {
    std::size_t idx = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &idx);
    } catch (const std::exception&) {
        throw format_error("config: key '" + key + "': '" + v + "' is not a number");
    }
    if (idx != v.size())
        throw format_error("config: key '" + key + "': '" + v + "' is not a number");
    return x;
}

int parse_int(const std::string& key, const std::string& v) {
    const double x = parse_double(key, v);
    const int i = static_cast<int>(x);
    if (static_cast<double>(i) != x)
        throw format_error("config: key '" + key + "': '" + v + "' is not an integer");
    return i;
}

std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::istringstream in(v);
    std::string tok;
    while (in >> tok) out.push_back(parse_double(key, tok));
    if (out.empty()) throw format_error("config: key '" + key + "': empty list");
    return out;
}

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

const char* const known_keys[] = {
    "problem.gamma",     "problem.epsilon",  "problem.eps_list", "problem.dim",
    "problem.extents",   "problem.bc",       "problem.initial",  "problem.center",
    "problem.radius",    "problem.height",   "problem.offset",   "problem.sigma",
    "grid.nx",           "grid.T",           "grid.nt",          "solver.tol_grad",
    "solver.max_newton", "solver.sigma_schedule", "solver.linear_tol",
    "solver.linear_maxit", "solver.weight_floor", "diagnostics.radii",
    "diagnostics.theta", "diagnostics.margin", "diagnostics.qr_radius",
    "output.dir",
};

} // namespace

RunConfig parse_config(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::string section;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw format_error("config: line " + std::to_string(lineno) +
                                   ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "problem" && section != "grid" && section != "solver" &&
                section != "diagnostics" && section != "output")
                throw parameter_error("config: unknown section '" + section + "'");
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw format_error("config: line " + std::to_string(lineno) +
                               ": expected key = value");
        if (section.empty())
            throw format_error("config: line " + std::to_string(lineno) +
                               ": key outside any section");
        const std::string key = section + "." + trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        bool known = false;
        for (const char* k : known_keys)
            if (key == k) known = true;
        if (!known) throw parameter_error("config: unknown key '" + key + "'");
        if (kv.count(key)) throw parameter_error("config: duplicate key '" + key + "'");
        kv[key] = val;
    }

    RunConfig c;
    auto take = [&](const char* key) -> const std::string* {
        auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };

    if (const auto* v = take("problem.dim")) c.problem.dim = parse_int("problem.dim", *v);
    if (const auto* v = take("problem.gamma"))
        c.problem.gamma = parse_double("problem.gamma", *v);
    if (const auto* v = take("problem.epsilon"))
        c.problem.epsilon = parse_double("problem.epsilon", *v);
    if (const auto* v = take("problem.eps_list")) {
        c.eps_list = parse_list("problem.eps_list", *v);
        c.problem.epsilon = c.eps_list.front();
    }
    if (const auto* v = take("problem.extents")) {
        const std::vector<double> e = parse_list("problem.extents", *v);
        if (static_cast<int>(e.size()) != 2 * c.problem.dim)
            throw parameter_error("config: key 'problem.extents' needs " +
                                  std::to_string(2 * c.problem.dim) + " numbers");
        for (int d = 0; d < c.problem.dim; ++d) c.extents[d] = {e[2 * d], e[2 * d + 1]};
    }
    if (const auto* v = take("problem.bc")) {
        if (*v == "neumann")
            c.problem.bc = BC::Neumann;
        else if (*v == "dirichlet")
            c.problem.bc = BC::Dirichlet;
        else
            throw parameter_error("config: key 'problem.bc': '" + *v +
                                  "' (want neumann or dirichlet)");
    }
    if (const auto* v = take("problem.initial")) {
        if (*v == "zero")
            c.problem.initial.kind = InitialDatum::Kind::Zero;
        else if (*v == "bump")
            c.problem.initial.kind = InitialDatum::Kind::Bump;
        else if (*v == "profile")
            c.problem.initial.kind = InitialDatum::Kind::AltPhillips;
        else
            throw parameter_error("config: key 'problem.initial': '" + *v +
                                  "' (want zero, bump, or profile)");
    }
    if (const auto* v = take("problem.center")) {
        const std::vector<double> e = parse_list("problem.center", *v);
        if (static_cast<int>(e.size()) != c.problem.dim)
            throw parameter_error("config: key 'problem.center' needs " +
                                  std::to_string(c.problem.dim) + " numbers");
        for (int d = 0; d < c.problem.dim; ++d) c.problem.initial.center[d] = e[d];
    }
    if (const auto* v = take("problem.radius"))
        c.problem.initial.radius = parse_double("problem.radius", *v);
    if (const auto* v = take("problem.height"))
        c.problem.initial.height = parse_double("problem.height", *v);
    if (const auto* v = take("problem.offset"))
        c.problem.initial.offset = parse_double("problem.offset", *v);
    if (const auto* v = take("problem.sigma"))
        c.problem.smoothing_sigma = parse_double("problem.sigma", *v);

    if (const auto* v = take("grid.nx")) {
        const std::vector<double> e = parse_list("grid.nx", *v);
        if (static_cast<int>(e.size()) != c.problem.dim)
            throw parameter_error("config: key 'grid.nx' needs " +
                                  std::to_string(c.problem.dim) + " numbers");
        for (int d = 0; d < c.problem.dim; ++d) c.nx[d] = parse_int("grid.nx", num(e[d]));
    }
    if (const auto* v = take("grid.T")) c.T = parse_double("grid.T", *v);
    if (const auto* v = take("grid.nt")) c.nt = parse_int("grid.nt", *v);

    if (const auto* v = take("solver.tol_grad"))
        c.solver.tol_grad = parse_double("solver.tol_grad", *v);
    if (const auto* v = take("solver.max_newton"))
        c.solver.max_newton = parse_int("solver.max_newton", *v);
    if (const auto* v = take("solver.sigma_schedule"))
        c.solver.sigma_schedule = parse_list("solver.sigma_schedule", *v);
    if (const auto* v = take("solver.linear_tol"))
        c.solver.linear_tol = parse_double("solver.linear_tol", *v);
    if (const auto* v = take("solver.linear_maxit"))
        c.solver.linear_maxit = parse_int("solver.linear_maxit", *v);
    if (const auto* v = take("solver.weight_floor"))
        c.solver.weight_floor = parse_double("solver.weight_floor", *v);

    if (const auto* v = take("diagnostics.radii"))
        c.radii = parse_list("diagnostics.radii", *v);
    if (const auto* v = take("diagnostics.theta"))
        c.theta = parse_double("diagnostics.theta", *v);
    if (const auto* v = take("diagnostics.margin"))
        c.margin = parse_double("diagnostics.margin", *v);
    if (const auto* v = take("diagnostics.qr_radius"))
        c.qr_radius = parse_double("diagnostics.qr_radius", *v);

    if (const auto* v = take("output.dir")) c.output_dir = *v;

    validate_spec(c.problem);
    validate_config(c.solver);
    return c;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw data_error("config: cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const RunConfig& c) {
    std::ostringstream out;
    out << "[problem]\n";
    out << "gamma = " << num(c.problem.gamma) << "\n";
    out << "epsilon = " << num(c.problem.epsilon) << "\n";
    if (!c.eps_list.empty()) {
        out << "eps_list =";
        for (double e : c.eps_list) out << " " << num(e);
        out << "\n";
    }
    out << "dim = " << c.problem.dim << "\n";
    out << "extents =";
    for (int d = 0; d < c.problem.dim; ++d)
        out << " " << num(c.extents[d][0]) << " " << num(c.extents[d][1]);
    out << "\n";
    out << "bc = " << (c.problem.bc == BC::Neumann ? "neumann" : "dirichlet") << "\n";
    switch (c.problem.initial.kind) {
        case InitialDatum::Kind::Zero:
            out << "initial = zero\n";
            break;
        case InitialDatum::Kind::Bump:
            out << "initial = bump\n";
            out << "center =";
            for (int d = 0; d < c.problem.dim; ++d)
                out << " " << num(c.problem.initial.center[d]);
            out << "\n";
            out << "radius = " << num(c.problem.initial.radius) << "\n";
            out << "height = " << num(c.problem.initial.height) << "\n";
            break;
        case InitialDatum::Kind::AltPhillips:
            out << "initial = profile\n";
            out << "offset = " << num(c.problem.initial.offset) << "\n";
            break;
        case InitialDatum::Kind::Tabulated:
            throw usage_error("serialize_config: tabulated data has no config form");
    }
    if (c.problem.smoothing_sigma != 0.0)
        out << "sigma = " << num(c.problem.smoothing_sigma) << "\n";

    out << "\n[grid]\n";
    out << "nx =";
    for (int d = 0; d < c.problem.dim; ++d) out << " " << c.nx[d];
    out << "\n";
    out << "T = " << num(c.T) << "\n";
    out << "nt = " << c.nt << "\n";

    out << "\n[solver]\n";
    out << "tol_grad = " << num(c.solver.tol_grad) << "\n";
    out << "max_newton = " << c.solver.max_newton << "\n";
    out << "sigma_schedule =";
    for (double s : c.solver.sigma_schedule) out << " " << num(s);
    out << "\n";
    out << "linear_tol = " << num(c.solver.linear_tol) << "\n";
    out << "linear_maxit = " << c.solver.linear_maxit << "\n";
    out << "weight_floor = " << num(c.solver.weight_floor) << "\n";

    out << "\n[diagnostics]\n";
    if (!c.radii.empty()) {
        out << "radii =";
        for (double r : c.radii) out << " " << num(r);
        out << "\n";
    }
    out << "theta = " << num(c.theta) << "\n";
    out << "margin = " << num(c.margin) << "\n";
    out << "qr_radius = " << num(c.qr_radius) << "\n";

    if (!c.output_dir.empty()) {
        out << "\n[output]\n";
        out << "dir = " << c.output_dir << "\n";
    }
    return out.str();
}

GridPtr make_run_grid(const RunConfig& c) {
    return make_grid(c.problem.dim, c.extents, c.nx, c.T, c.nt);
}

} // namespace wied
