#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "srdo/config.hpp"

using namespace srdo;

namespace {

int error_line(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.line();
    }
    return -1;
}

} // namespace

TEST_CASE("defaults") {
    const RunConfig c = parse_config("");
    CHECK(c.shape.rows == 250);
    CHECK(c.shape.cols == 20);
    CHECK(c.shape.partitions == 5);
    CHECK(c.g_scale() == doctest::Approx(1.0 / std::sqrt(250.0)));
    CHECK(c.stragglers == std::vector<std::size_t>(5, 0));
    CHECK(c.groups == std::vector<std::size_t>{1, 2, 3, 4, 5});
    CHECK(c.gamma.size() == 6);
    CHECK(c.gamma[0] == 0.0);
    CHECK(c.gamma[3] == doctest::Approx(0.2));
    CHECK(c.schedule.offset == 300.0);
    CHECK(c.schedule.exponent == 0.55);
    CHECK(c.model.scenario == Scenario::exact);
    CHECK(c.seeds == std::vector<std::uint64_t>{1});
    CHECK(c.mixing.kind == MixingKind::metropolis);
}

TEST_CASE("large grid is accepted") {
    const RunConfig c = parse_config(R"(
# n = 5, s = 2 at full size
[problem]
rows = 2500
cols = 100
partitions = 5
workers_per_partition = 5
g_scale = 1.0

[coding]
stragglers = 2

[topology]
servers = 5
assignment = one_to_one

[schedule]
a = 300      ; offset
theta = 0.55

[control]
seeds = 1..3, 10
)");
    CHECK(c.shape.rows == 2500);
    CHECK(c.shape.cols == 100);
    CHECK(c.schedule.offset == 300.0);
    CHECK(c.schedule.exponent == 0.55);
    CHECK(c.g_scale() == 1.0);
    REQUIRE(c.assignment);
    CHECK(*c.assignment == std::vector<std::size_t>{1, 2, 3, 4, 5});
    CHECK(c.seeds == std::vector<std::uint64_t>{1, 2, 3, 10});
    const std::string echo = describe(c);
    CHECK(echo.find("M=2500") != std::string::npos);
    CHECK(echo.find("N=100") != std::string::npos);
    CHECK(echo.find("a=300") != std::string::npos);
    CHECK(echo.find("theta=0.55") != std::string::npos);
}

TEST_CASE("rejections carry line numbers") {
    CHECK(error_line("[schedule]\ntheta = 1.5\n") == 2);
    CHECK(error_line("[schedule]\ntheta = 0\n") == 2);
    CHECK(error_line("[problem]\nrows = 250\nbogus = 1\n") == 3);
    CHECK(error_line("[nowhere]\n") == 1);
    CHECK(error_line("rows = 3\n") == 1);
    CHECK(error_line("[problem]\nrows = many\n") == 2);
    CHECK(error_line("[control]\nseeds = 1\nseeds = 2\n") == 3);
    CHECK(error_line("[problem]\n\nrows = 251\n") == 3);
    CHECK(error_line("[coding]\nstragglers = 5\n") == 2);
    CHECK(error_line("[topology]\ngamma = 0.5, 0.5\n") == 2);
    CHECK(error_line("[topology]\ngamma = 0, 0.5, 0.5, 0.5, 0.5, 0.5\n") == 2);
    CHECK(error_line("[stragglers]\nstraggle_prob = 1.5\n") == 2);
    CHECK(error_line("[stragglers]\nscenario = 4\n") == 2);
    CHECK(error_line("[topology]\nmu = 1\n") == 2);
    CHECK(error_line("[topology]\ngraph = 0-1, 1-9\n") == 2);
    CHECK(error_line("[topology]\nassignment = 1,2\n") == 2);
    CHECK(error_line("[topology]\nservers = 4\nassignment = one_to_one\n") == 3);
    CHECK(error_line("[topology]\ncommon_init = maybe\n") == 2);
    CHECK(error_line("[schedule]\nalpha_cap = auto\n") == 2);
}

TEST_CASE("options") {
    const RunConfig c = parse_config(R"(
[problem]
rows = 90
cols = 6
partitions = 3
workers_per_partition = 3
seed = 77
noise_std = 0.1
[coding]
stragglers = 0, 1, 2
seed = 5
[topology]
servers = 4
groups = 1, 2, 3, 3
gamma = 0.2, 0.2, 0.2, 0.2, 0.2
graph = 0-1, 1-2, 2-3
mixing = row_stochastic
mu = 0.1
nu = 0.01
source = assigned
common_init = yes
[stragglers]
scenario = 3
window = 10
max_delay = 10
straggle_prob = 0.5
delay_push = false
[schedule]
alpha_cap = auto
[control]
max_iters = 20
tol = 1e-9
output = somewhere
check_bounds = false
sweep = true
divergence_ae = 1e6
)");
    CHECK(c.problem_seed == 77u);
    CHECK(c.coding_seed == 5u);
    CHECK(c.shape.noise_std == 0.1);
    CHECK(c.stragglers == std::vector<std::size_t>{0, 1, 2});
    CHECK(c.group_count() == 4);
    CHECK(c.edges.size() == 3);
    CHECK(c.graph == "edges");
    CHECK(c.mixing.kind == MixingKind::row_stochastic);
    CHECK(c.source == SourceMode::assigned);
    CHECK(c.common_init);
    CHECK(c.model.scenario == Scenario::stale);
    CHECK(c.model.window == 10);
    CHECK(!c.model.delay_push);
    CHECK(c.cap_auto);
    CHECK(c.max_iters == 20);
    CHECK(c.output == "somewhere");
    CHECK(!c.check_bounds);
    CHECK(c.sweep);
    // four groups with gamma_min 0.2: p = 4 < 5, no warning
    CHECK(c.warnings.empty());
}

TEST_CASE("p >= 1/gamma_min warns") {
    // uniform gamma over five groups: gamma_min = 0.2 = 1/p
    const RunConfig c = parse_config("");
    REQUIRE(c.warnings.size() == 1);
    CHECK(c.warnings[0].find("gamma_min") != std::string::npos);
    // gamma_min = 0.1 puts 1/gamma_min = 10 above p = 5
    CHECK(parse_config("[topology]\ngamma = 0, 0.1, 0.3, 0.2, 0.2, 0.2\n").warnings.empty());
    // a fixed assignment does not sample gamma
    CHECK(parse_config("[topology]\nassignment = one_to_one\n").warnings.empty());
}

TEST_CASE("missing file") { CHECK_THROWS_AS(load_config("/nonexistent/srdo.ini"), ConfigError); }
