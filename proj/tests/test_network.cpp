#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "srdo/network.hpp"

using namespace srdo;

namespace {

Topology uniform_topology(std::size_t servers, std::size_t partitions) {
    Topology t;
    t.servers = servers;
    t.partitions = partitions;
    t.gamma.assign(partitions + 1, 1.0 / static_cast<double>(partitions));
    t.gamma[0] = 0.0;
    t.server_graph = Graph::complete(servers);
    return t;
}

} // namespace

TEST_CASE("graph") {
    const Graph c = Graph::complete(4);
    CHECK(c.degree(0) == 3);
    CHECK(c.connected());
    const Graph p = Graph::path(3);
    CHECK(p.has_edge(0, 1));
    CHECK(!p.has_edge(0, 2));
    const Graph split = Graph::from_edges(4, {{0, 1}, {2, 3}});
    CHECK(!split.connected());
    Graph g(2);
    CHECK_THROWS_AS(g.add_edge(0, 5), TopologyError);
}

TEST_CASE("sample_assignment") {
    Topology t = uniform_topology(4, 3);
    t.gamma = {0.0, 1.0, 0.0, 0.0};
    Rng rng(1);
    for (std::size_t k = 0; k < 50; ++k) CHECK(sample_assignment(t, k, rng) == std::vector<std::size_t>(4, 1));

    const Topology fixed = one_to_one_topology(3, Graph::complete(3));
    for (std::size_t k = 0; k < 10; ++k) CHECK(sample_assignment(fixed, k, rng) == std::vector<std::size_t>{1, 2, 3});

    const Topology u = uniform_topology(1, 5);
    std::vector<int> counts(6, 0);
    const int draws = 100000;
    for (int d = 0; d < draws; ++d) ++counts[sample_assignment(u, 0, rng)[0]];
    CHECK(counts[0] == 0);
    const double sigma = std::sqrt(draws * 0.2 * 0.8);
    for (int i = 1; i <= 5; ++i) CHECK(std::abs(counts[i] - draws * 0.2) <= 3.0 * sigma);
}

TEST_CASE("topology validation") {
    Topology t = uniform_topology(3, 2);
    CHECK_NOTHROW(t.validate());
    t.gamma = {0.5, 0.6, 0.1};
    CHECK_THROWS_AS(t.validate(), TopologyError);
    t = uniform_topology(3, 2);
    t.server_graph = Graph::from_edges(3, {{0, 1}});
    CHECK_THROWS_AS(t.validate(), TopologyError);
    t = uniform_topology(3, 4);
    t.gamma = {0.1, 0.3, 0.2, 0.2, 0.2};
    CHECK(t.gamma_min() == doctest::Approx(0.2));
    CHECK(t.gamma_max() == doctest::Approx(0.3));
    CHECK(t.gamma_partitions() == doctest::Approx(0.9));
}

TEST_CASE("sample_stragglers") {
    StragglerModel m;
    m.s_per_partition = {0};
    m.straggle_prob = 0.7;
    Rng rng(2);
    for (std::size_t k = 0; k < 100; ++k) CHECK(sample_stragglers(m, 0, 3, k, rng).straggler_count() == 0);

    m.s_per_partition = {1};
    std::set<std::size_t> seen;
    for (std::size_t k = 0; k < 10000; ++k) {
        const auto set = sample_stragglers(m, 0, 3, k, rng);
        CHECK(set.straggler_count() <= 1);
        seen.insert(set.straggler_count());
    }
    CHECK(seen == std::set<std::size_t>{0, 1});

    m.scenario = Scenario::received_only;
    m.window = 5;
    m.straggle_prob = 0.8;
    std::vector<std::size_t> counts;
    for (std::size_t k = 0; k < 10000; ++k) counts.push_back(sample_stragglers(m, 0, 3, k, rng).straggler_count());
    bool exceeded = false;
    for (std::size_t start = 0; start + 5 <= counts.size(); ++start) {
        bool ok = false;
        for (std::size_t k = start; k < start + 5; ++k) ok = ok || counts[k] <= 1;
        REQUIRE(ok);
    }
    for (auto c : counts) exceeded = exceeded || c > 1;
    CHECK(exceeded);
}

TEST_CASE("sample_delay") {
    StragglerModel m;
    Rng rng(3);
    for (int t = 0; t < 100; ++t) CHECK(sample_delay(m, rng) == 0);
    m.max_delay = 10;
    std::set<std::size_t> support;
    for (int t = 0; t < 100000; ++t) support.insert(sample_delay(m, rng));
    CHECK(support.size() == 11);
    CHECK(*support.begin() == 0);
    CHECK(*support.rbegin() == 10);
    m.delay_push = false;
    CHECK(sample_delay(m, rng) == 0);
}

TEST_CASE("build_w") {
    MixingPolicy metro;
    const Matrix c = build_w(metro, Graph::complete(3), 0);
    CHECK((c - Matrix::Constant(3, 3, 1.0 / 3.0)).cwiseAbs().maxCoeff() <= 1e-15);

    const Matrix p = build_w(metro, Graph::path(3), 0);
    for (Eigen::Index i = 0; i < 3; ++i) {
        CHECK(std::abs(p.row(i).sum() - 1.0) <= 1e-12);
        CHECK(std::abs(p.col(i).sum() - 1.0) <= 1e-12);
    }
    CHECK(p(0, 2) == 0.0);
    CHECK(p(0, 1) == doctest::Approx(1.0 / 3.0));

    MixingPolicy floor = metro;
    floor.nu = 0.4;
    CHECK_THROWS_AS(build_w(floor, Graph::path(3), 0), TopologyError);
    CHECK_THROWS_AS(build_w(metro, Graph::from_edges(3, {{0, 1}}), 0), TopologyError);

    MixingPolicy rs;
    rs.kind = MixingKind::row_stochastic;
    rs.mu = 0.2;
    const Matrix r = build_w(rs, Graph::complete(4), 0);
    for (Eigen::Index i = 0; i < 4; ++i) {
        CHECK(std::abs(r.row(i).sum() - 1.0) <= 1e-12);
        CHECK(r.col(i).sum() - r(i, i) <= 1.0 - rs.mu + 1e-12);
    }
}
