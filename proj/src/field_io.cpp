#include "wied/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <json.hpp>

namespace wied {

static_assert(std::endian::native == std::endian::little,
              "field dumps assume a little-endian host");

void dump_field(const ScalarField& f, const std::string& stem,
                double gamma, double epsilon) {
    const SpaceTimeGrid& g = *f.grid;
    nlohmann::json meta;
    meta["dim"] = g.dim;
    auto ext = nlohmann::json::array();
    auto nx = nlohmann::json::array();
    for (int d = 0; d < g.dim; ++d) {
        ext.push_back({g.a[d], g.b[d]});
        nx.push_back(g.nx[d]);
    }
    meta["extents"] = ext;
    meta["nx"] = nx;
    meta["T"] = g.T;
    meta["nt"] = g.nt;
    meta["gamma"] = gamma;
    meta["epsilon"] = epsilon;
    meta["ordering"] = "t-slowest";

    std::ofstream js(stem + ".json");
    if (!js) throw format_error("dump_field: cannot open " + stem + ".json for writing");
    js << meta.dump(2) << "\n";
    js.close();

    std::ofstream bin(stem + ".f64", std::ios::binary);
    if (!bin) throw format_error("dump_field: cannot open " + stem + ".f64 for writing");
    bin.write(reinterpret_cast<const char*>(f.v.data()),
              static_cast<std::streamsize>(f.v.size() * sizeof(double)));
    if (!bin) throw format_error("dump_field: short write to " + stem + ".f64");
}

LoadedField load_field(const std::string& stem) {
    std::ifstream js(stem + ".json");
    if (!js) throw format_error("load_field: cannot open " + stem + ".json");
    nlohmann::json meta;
    try {
        js >> meta;
    } catch (const nlohmann::json::exception& e) {
        throw format_error("load_field: bad JSON in " + stem + ".json: " + e.what());
    }

    LoadedField out;
    try {
        const int dim = meta.at("dim").get<int>();
        std::array<std::array<double, 2>, 2> ext{{{0.0, 1.0}, {0.0, 1.0}}};
        std::array<int, 2> nx{2, 2};
        const auto& je = meta.at("extents");
        const auto& jn = meta.at("nx");
        if (static_cast<int>(je.size()) != dim || static_cast<int>(jn.size()) != dim)
            throw format_error("load_field: extents/nx length does not match dim");
        for (int d = 0; d < dim; ++d) {
            ext[d][0] = je[d][0].get<double>();
            ext[d][1] = je[d][1].get<double>();
            nx[d] = jn[d].get<int>();
        }
        if (meta.at("ordering").get<std::string>() != "t-slowest")
            throw format_error("load_field: unsupported ordering in " + stem + ".json");
        auto grid = make_grid(dim, ext, nx, meta.at("T").get<double>(), meta.at("nt").get<int>());
        out.field = ScalarField(grid);
        out.gamma = meta.at("gamma").get<double>();
        out.epsilon = meta.at("epsilon").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw format_error("load_field: missing or ill-typed key in " + stem + ".json: " + e.what());
    }

    std::ifstream bin(stem + ".f64", std::ios::binary | std::ios::ate);
    if (!bin) throw format_error("load_field: cannot open " + stem + ".f64");
    const std::uint64_t bytes = static_cast<std::uint64_t>(bin.tellg());
    const std::uint64_t want = out.field.v.size() * sizeof(double);
    if (bytes != want)
        throw format_error("load_field: " + stem + ".f64 holds " + std::to_string(bytes) +
                           " bytes, expected " + std::to_string(want));
    bin.seekg(0);
    bin.read(reinterpret_cast<char*>(out.field.v.data()),
             static_cast<std::streamsize>(want));
    if (!bin) throw format_error("load_field: short read from " + stem + ".f64");
    return out;
}

} // namespace wied
