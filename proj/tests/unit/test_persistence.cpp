#include <doctest.h>

#include "support/oracles.hpp"
#include "topospat/error.hpp"
#include "topospat/persistence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

using namespace topospat;

namespace {

SpatialGraph path_graph(std::size_t n) {
    std::vector<Edge> edges;
    for (std::uint32_t i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
    return SpatialGraph(std::vector<Point>(n), edges, GraphKind::Epsilon);
}

} // namespace

TEST_CASE("three vertex path") {
    auto d = superlevel_diagram(path_graph(3), std::vector<double>{3, 1, 2});
    REQUIRE(d.pairs.size() == 2);
    CHECK(d.pairs[0].birth == 3);
    CHECK(d.pairs[0].death == 1);
    CHECK(d.pairs[0].birth_vertex == 0);
    CHECK(d.pairs[0].essential);
    CHECK(d.pairs[1].birth == 2);
    CHECK(d.pairs[1].death == 1);
    CHECK(d.pairs[1].birth_vertex == 2);
    CHECK_FALSE(d.pairs[1].essential);
    CHECK(d.f_min == 1);
    CHECK(d.f_max == 3);
}

TEST_CASE("constant feature on a path gives one zero-lifetime pair") {
    auto d = superlevel_diagram(path_graph(5), std::vector<double>(5, 4.5));
    REQUIRE(d.pairs.size() == 1);
    CHECK(d.pairs[0].birth == 4.5);
    CHECK(d.pairs[0].death == 4.5);
    CHECK(d.pairs[0].lifetime() == 0);
}

TEST_CASE("edgeless graph makes every vertex essential") {
    SpatialGraph g(std::vector<Point>(2), {}, GraphKind::Epsilon);
    auto d = superlevel_diagram(g, std::vector<double>{5, 2});
    REQUIRE(d.pairs.size() == 2);
    CHECK(d.pairs[0].birth == 5);
    CHECK(d.pairs[0].death == 2);
    CHECK(d.pairs[1].birth == 2);
    CHECK(d.pairs[1].death == 2);
    CHECK(d.pairs[0].essential);
    CHECK(d.pairs[1].essential);
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS(superlevel_diagram(path_graph(3), std::vector<double>{1, 2}), DimensionError);
    CHECK_THROWS_AS(superlevel_diagram(path_graph(3), std::vector<double>{1, std::nan(""), 2}), ValidationError);
    auto empty = superlevel_diagram(SpatialGraph{}, std::vector<double>{});
    CHECK(empty.empty());
}

TEST_CASE("diagram stats") {
    PersistenceDiagram d;
    d.pairs = {{3, 1, 0, true}, {2, 1, 2, false}};
    d.f_min = 1;
    d.f_max = 3;
    auto s = diagram_stats(d);
    CHECK(s.count == 2);
    CHECK(s.max_lifetime == 2);
    CHECK(s.essential == 2);
    CHECK(s.unmerged == 1);

    auto e = diagram_stats(PersistenceDiagram{});
    CHECK(e.count == 0);
    CHECK(e.max_lifetime == 0);
    CHECK(e.essential == 0);
}

TEST_CASE("elder rule picks the larger birth and keeps the younger pair") {
    // 5 - 0 - 4 : vertex 1 merges the components born at 5 and 4.
    auto d = superlevel_diagram(path_graph(3), std::vector<double>{5, 0, 4});
    REQUIRE(d.pairs.size() == 2);
    CHECK(d.pairs[0].birth == 5);
    CHECK(d.pairs[0].essential);
    CHECK(d.pairs[1].birth == 4);
    CHECK(d.pairs[1].death == 0);
    CHECK(d.pairs[1].birth_vertex == 2);
}

TEST_CASE("sublevel diagram is the superlevel diagram of the negation") {
    auto d = sublevel_diagram(path_graph(3), std::vector<double>{3, 1, 2});
    REQUIRE(d.pairs.size() == 1);
    CHECK(d.pairs[0].birth == 1);
    CHECK(d.pairs[0].death == 3);
}

TEST_CASE("property: alive pairs match flood-fill component counts") {
    SplitMix64 rng(101);
    for (int trial = 0; trial < 400; ++trial) {
        const std::size_t n = 1 + uniform_below(rng, 30);
        const double density = uniform01(rng) * 0.3;
        auto g = oracle::random_graph(rng, n, density);
        auto values = oracle::random_values(rng, n, 1 + static_cast<int>(uniform_below(rng, 6)));
        auto d = superlevel_diagram(oracle::to_spatial(g), values);

        std::vector<double> thresholds(values);
        std::sort(thresholds.begin(), thresholds.end());
        thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
        for (double t : thresholds) {
            // every distinct value, plus a point strictly between consecutive ones
            for (double probe : {t, t - 0.5}) {
                if (probe < d.f_min) continue;
                const auto expected = oracle::superlevel_components(g, values, probe);
                std::size_t alive = 0;
                for (const auto& p : d.pairs) {
                    if (probe > p.birth) continue;
                    if (p.death < probe || (p.essential && probe >= d.f_min)) ++alive;
                }
                REQUIRE(alive == expected);
            }
        }
    }
}

TEST_CASE("property: one pair per local birth and essentials count components") {
    SplitMix64 rng(202);
    for (int trial = 0; trial < 400; ++trial) {
        const std::size_t n = 1 + uniform_below(rng, 40);
        auto g = oracle::random_graph(rng, n, uniform01(rng) * 0.25);
        auto values = oracle::random_values(rng, n, 5);
        auto d = superlevel_diagram(oracle::to_spatial(g), values);

        // a vertex starts a component iff no neighbour precedes it in the sweep
        std::size_t births = 0;
        for (std::size_t v = 0; v < n; ++v) {
            bool preceded = false;
            for (const auto& [a, b] : g.edges) {
                std::size_t u;
                if (a == v) u = b;
                else if (b == v) u = a;
                else continue;
                if (values[u] > values[v] || (values[u] == values[v] && u < v)) preceded = true;
            }
            births += !preceded;
        }
        CHECK(d.pairs.size() == births);

        std::size_t unmerged = 0;
        for (const auto& p : d.pairs) {
            unmerged += p.essential;
            CHECK(p.death <= p.birth);
            CHECK(p.birth == values[p.birth_vertex]);
        }
        CHECK(unmerged == oracle::superlevel_components(g, values, -std::numeric_limits<double>::infinity()));
    }
}

TEST_CASE("property: diagrams follow positive affine maps of the values") {
    SplitMix64 rng(303);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + uniform_below(rng, 30);
        auto g = oracle::to_spatial(oracle::random_graph(rng, n, 0.2));
        std::vector<double> values(n);
        for (auto& v : values) v = uniform01(rng) * 10 - 5;
        const double a = 0.1 + uniform01(rng) * 5;
        const double b = uniform01(rng) * 20 - 10;
        std::vector<double> mapped(n);
        for (std::size_t i = 0; i < n; ++i) mapped[i] = a * values[i] + b;

        auto d = superlevel_diagram(g, values);
        auto e = superlevel_diagram(g, mapped);
        REQUIRE(d.pairs.size() == e.pairs.size());
        for (std::size_t k = 0; k < d.pairs.size(); ++k) {
            CHECK(e.pairs[k].birth_vertex == d.pairs[k].birth_vertex);
            CHECK(e.pairs[k].essential == d.pairs[k].essential);
            CHECK(e.pairs[k].birth == doctest::Approx(a * d.pairs[k].birth + b).epsilon(1e-12));
            CHECK(e.pairs[k].death == doctest::Approx(a * d.pairs[k].death + b).epsilon(1e-12));
        }
    }
}

TEST_CASE("format lists pairs with a header") {
    auto d = superlevel_diagram(path_graph(3), std::vector<double>{3, 1, 2});
    auto text = format_diagram(d);
    CHECK(text.find("birth\tdeath\tbirth_vertex") != std::string::npos);
    CHECK(text.find("3\t1\t0") != std::string::npos);
    CHECK(text.find("2\t1\t2") != std::string::npos);
}
