#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "wied/config.hpp"
#include "wied/errors.hpp"

using namespace wied;
using doctest::Contains;

namespace {

const char* bump_text = R"(# 1d absorption run
[problem]
gamma = 1.5
epsilon = 0.05
dim = 1
extents = -1 1
bc = dirichlet
initial = bump
center = 0.25
radius = 0.3
height = 0.4

[grid]
nx = 64
T = 0.5
nt = 32

[diagnostics]
radii = 0.2 0.1
theta = 1e-8
)";

} // namespace

TEST_CASE("defaults parse and the canonical form is a fixed point") {
    for (const std::string text :
         {std::string(""), std::string(bump_text),
          std::string("[problem]\ndim = 2\nextents = -1 1 -2 2\ninitial = profile\n"
                      "eps_list = 0.2 0.1 0.05\n\n[output]\ndir = out/run1\n")}) {
        const RunConfig c = parse_config(text);
        const std::string s1 = serialize_config(c);
        const std::string s2 = serialize_config(parse_config(s1));
        CHECK(s1 == s2);
    }
}

TEST_CASE("parsed values land in the right fields") {
    const RunConfig c = parse_config(bump_text);
    CHECK(c.problem.gamma == 1.5);
    CHECK(c.problem.epsilon == 0.05);
    CHECK(c.problem.bc == BC::Dirichlet);
    CHECK(c.problem.initial.kind == InitialDatum::Kind::Bump);
    CHECK(c.problem.initial.center[0] == 0.25);
    CHECK(c.problem.initial.radius == 0.3);
    CHECK(c.problem.initial.height == 0.4);
    CHECK(c.extents[0][0] == -1.0);
    CHECK(c.extents[0][1] == 1.0);
    CHECK(c.nx[0] == 64);
    CHECK(c.T == 0.5);
    CHECK(c.nt == 32);
    CHECK(c.radii == std::vector<double>{0.2, 0.1});
    CHECK(c.theta == 1e-8);

    auto g = make_run_grid(c);
    CHECK(g->dim == 1);
    CHECK(g->nx[0] == 64);
    CHECK(g->nt == 32);
    CHECK(g->a[0] == -1.0);
    CHECK(g->b[0] == 1.0);
    CHECK(g->T == 0.5);
}

TEST_CASE("eps_list seeds the leading epsilon") {
    const RunConfig c = parse_config("[problem]\neps_list = 0.2 0.1\n");
    CHECK(c.eps_list == std::vector<double>{0.2, 0.1});
    CHECK(c.problem.epsilon == 0.2);
}

TEST_CASE("unknown keys are rejected by name") {
    CHECK_THROWS_WITH_AS(parse_config("[problem]\nfoo = 1\n"),
                         Contains("unknown key 'problem.foo'"), parameter_error);
    CHECK_THROWS_WITH_AS(parse_config("[grid]\ngamma = 1\n"),
                         Contains("unknown key 'grid.gamma'"), parameter_error);
}

TEST_CASE("structural errors carry the line number") {
    CHECK_THROWS_WITH_AS(parse_config("[problem]\ngamma = 1\nnonsense\n"),
                         Contains("line 3"), format_error);
    CHECK_THROWS_WITH_AS(parse_config("gamma = 1\n"), Contains("outside any section"),
                         format_error);
    CHECK_THROWS_WITH_AS(parse_config("[problem\ngamma = 1\n"),
                         Contains("malformed section header"), format_error);
    CHECK_THROWS_WITH_AS(parse_config("[conjecture]\n"), Contains("unknown section"),
                         parameter_error);
}

TEST_CASE("duplicate keys are rejected") {
    CHECK_THROWS_WITH_AS(parse_config("[problem]\ngamma = 1\ngamma = 1.5\n"),
                         Contains("duplicate key 'problem.gamma'"), parameter_error);
}

TEST_CASE("value syntax errors name the key") {
    CHECK_THROWS_WITH_AS(parse_config("[problem]\ngamma = abc\n"),
                         Contains("'problem.gamma'"), format_error);
    CHECK_THROWS_WITH_AS(parse_config("[grid]\nnt = 2.5\n"), Contains("not an integer"),
                         format_error);
    CHECK_THROWS_WITH_AS(parse_config("[diagnostics]\nradii =\n"),
                         Contains("empty list"), format_error);
}

TEST_CASE("semantic validation runs on the parsed problem") {
    CHECK_THROWS_WITH_AS(parse_config("[problem]\ngamma = 0.5\n"), Contains("[1,2)"),
                         parameter_error);
    CHECK_THROWS_AS(parse_config("[problem]\nepsilon = 0\n"), parameter_error);
    CHECK_THROWS_AS(parse_config("[solver]\nsigma_schedule = 1e-3 1e-2\n"),
                    parameter_error);
}

TEST_CASE("vector lengths must match the dimension") {
    CHECK_THROWS_WITH_AS(parse_config("[problem]\ndim = 2\nextents = -1 1\n"),
                         Contains("needs 4 numbers"), parameter_error);
    CHECK_THROWS_WITH_AS(
        parse_config("[problem]\ndim = 2\nextents = -1 1 -1 1\ninitial = bump\n"
                     "center = 0\nradius = 0.3\nheight = 0.4\n"),
        Contains("needs 2 numbers"), parameter_error);
    CHECK_THROWS_AS(parse_config("[problem]\ndim = 2\nextents = -1 1 -1 1\n\n"
                                 "[grid]\nnx = 16\n"),
                    parameter_error);
}

TEST_CASE("enum values are spelled out") {
    CHECK(parse_config("[problem]\nbc = neumann\n").problem.bc == BC::Neumann);
    CHECK_THROWS_WITH_AS(parse_config("[problem]\nbc = periodic\n"),
                         Contains("want neumann or dirichlet"), parameter_error);
    CHECK(parse_config("[problem]\ninitial = zero\n").problem.initial.kind ==
          InitialDatum::Kind::Zero);
    CHECK_THROWS_WITH_AS(parse_config("[problem]\ninitial = step\n"),
                         Contains("want zero, bump, or profile"), parameter_error);
}

TEST_CASE("comments and blank lines are ignored") {
    const RunConfig c = parse_config(
        "# header comment\n\n[problem]\n  gamma = 1.5   # trailing comment\n\n");
    CHECK(c.problem.gamma == 1.5);
}

TEST_CASE("tabulated data has no config spelling") {
    RunConfig c;
    c.problem.initial.kind = InitialDatum::Kind::Tabulated;
    CHECK_THROWS_AS(serialize_config(c), usage_error);
}

TEST_CASE("missing config file is a data error") {
    CHECK_THROWS_AS(load_config("no_such_file.cfg"), data_error);
}
