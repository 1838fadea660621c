#include <doctest.h>

#include "support/oracles.hpp"
#include "topospat/error.hpp"
#include "topospat/persistence.hpp"
#include "topospat/summaries.hpp"

#include <algorithm>
#include <cmath>

using namespace topospat;

namespace {

PersistenceDiagram make_diagram(std::vector<std::pair<double, double>> pairs) {
    PersistenceDiagram d;
    if (pairs.empty()) return d;
    d.f_min = pairs.front().second;
    d.f_max = pairs.front().first;
    for (const auto& [b, dth] : pairs) {
        d.f_min = std::min(d.f_min, dth);
        d.f_max = std::max(d.f_max, b);
    }
    bool first = true;
    for (const auto& [b, dth] : pairs) {
        d.pairs.push_back({b, dth, 0, first && dth == d.f_min});
        first = false;
    }
    return d;
}

// Step function with `value` on [from, to] inside [lo, hi].
StepCurve box(double lo, double hi, double from, double to, double value) {
    StepCurve c;
    c.lo = lo;
    c.hi = hi;
    c.knots = {lo};
    for (double x : {from, to, hi}) {
        if (x > c.knots.back()) c.knots.push_back(x);
    }
    for (std::size_t k = 0; k + 1 < c.knots.size(); ++k) {
        const double mid = (c.knots[k] + c.knots[k + 1]) / 2;
        c.values.push_back(mid >= from && mid <= to ? value : 0.0);
    }
    c.at_lo = from <= lo ? value : 0.0;
    return c;
}

PersistenceDiagram random_graph_diagram(SplitMix64& rng) {
    const std::size_t n = 1 + uniform_below(rng, 30);
    auto g = oracle::random_graph(rng, n, uniform01(rng) * 0.3);
    std::vector<double> values(n);
    const bool ties = uniform01(rng) < 0.5;
    for (auto& v : values) v = ties ? static_cast<double>(uniform_below(rng, 5)) : uniform01(rng) * 8 - 4;
    return superlevel_diagram(oracle::to_spatial(g), values);
}

std::vector<std::pair<double, double>> raw_pairs(const PersistenceDiagram& d) {
    std::vector<std::pair<double, double>> out;
    for (const auto& p : d.pairs) out.emplace_back(p.birth, p.death);
    return out;
}

constexpr NormOrder kOrders[] = {NormOrder::L1, NormOrder::L2, NormOrder::LInf};

} // namespace

TEST_CASE("total lifetime") {
    CHECK(total_lifetime(make_diagram({{3, 1}, {2, 1}})) == 3.0);
    CHECK(total_lifetime(make_diagram({{2.5, 2.5}})) == 0.0);
    CHECK(total_lifetime(PersistenceDiagram{}) == 0.0);
}

TEST_CASE("betti curve of the running example") {
    auto c = betti_curve(make_diagram({{3, 1}, {2, 1}}));
    CHECK(c.lo == 1);
    CHECK(c.hi == 3);
    CHECK(c(3.0) == 1);
    CHECK(c(2.5) == 1);
    CHECK(c(2.0) == 2);
    CHECK(c(1.5) == 2);
    // at the minimum both components have merged into one
    CHECK(c(1.0) == 1);
    CHECK(c(0.5) == 0);
    CHECK(c(3.5) == 0);
    CHECK(lp_norm(c, NormOrder::L1) == 3.0);
    CHECK(lp_norm(c, NormOrder::LInf) == 2.0);
    CHECK(lp_norm(c, NormOrder::L2) == doctest::Approx(std::sqrt(5.0)));
}

TEST_CASE("betti curve of degenerate and duplicated diagrams") {
    auto point = betti_curve(make_diagram({{1.5, 1.5}}));
    CHECK(point.lo == point.hi);
    CHECK(point(1.5) == 1);
    CHECK(point(1.6) == 0);
    CHECK(lp_norm(point, NormOrder::L1) == 0);

    auto twice = betti_curve(make_diagram({{3, 1}, {3, 1}}));
    for (double x : {1.25, 1.5, 2.0, 3.0}) CHECK(twice(x) == 2);
    CHECK(twice(1.0) == 1);

    auto empty = betti_curve(PersistenceDiagram{});
    for (auto p : kOrders) CHECK(lp_norm(empty, p) == 0);
}

TEST_CASE("norm orders") {
    CHECK(norm_order(1) == NormOrder::L1);
    CHECK(norm_order(2) == NormOrder::L2);
    CHECK(norm_order(INFINITY) == NormOrder::LInf);
    CHECK_THROWS_AS(norm_order(3), ParameterError);
    CHECK_THROWS_AS(norm_order(0.5), ParameterError);
    CHECK(parse_norm_order("inf") == NormOrder::LInf);
    CHECK_THROWS_AS(parse_norm_order("1.5"), ParameterError);
}

TEST_CASE("curve distances") {
    auto c = betti_curve(make_diagram({{3, 1}, {2, 1}}));
    for (auto p : kOrders) CHECK(lp_distance(c, c, p) == 0);

    CHECK(lp_distance(box(0, 1, 0, 1, 2), box(0, 1, 0, 1, 0), NormOrder::L1) == 2.0);
    CHECK(lp_distance(box(0, 3, 0, 2, 1), box(0, 3, 1, 3, 1), NormOrder::L1) == 2.0);
    CHECK(lp_distance(box(0, 3, 0, 2, 1), box(0, 3, 1, 3, 1), NormOrder::L2) == doctest::Approx(std::sqrt(2.0)));
    CHECK_THROWS_AS(lp_distance(box(0, 3, 0, 2, 1), box(0, 2, 0, 2, 1), NormOrder::L1), DomainError);
}

TEST_CASE("mean step curves") {
    auto c = betti_curve(make_diagram({{3, 1}, {2, 1}}));
    std::vector<StepCurve> same{c, c};
    auto m = mean_step_curve(same);
    CHECK(lp_distance(m, c, NormOrder::L1) == 0);

    std::vector<StepCurve> mid{box(0, 1, 0, 1, 2), box(0, 1, 0, 1, 0)};
    auto half = mean_step_curve(mid);
    CHECK(half(0.0) == 1);
    CHECK(half(0.5) == 1);
    CHECK(half(1.0) == 1);

    CHECK_THROWS_AS(mean_step_curve(std::vector<StepCurve>{}), ParameterError);

    // k translated unit steps on [0, k]: the pointwise mean counts covering steps
    for (int k = 1; k <= 6; ++k) {
        std::vector<StepCurve> steps;
        for (int s = 0; s < k; ++s) steps.push_back(box(0, k + 1, s, s + 1.5, 1));
        auto staircase = mean_step_curve(steps);
        for (int i = 1; i < 1000; ++i) {
            const double x = (k + 1) * i / 1000.0;
            double expected = 0;
            for (const auto& s : steps) expected += s(x);
            CHECK(staircase(x) == doctest::Approx(expected / k).epsilon(1e-12));
        }
    }
}

TEST_CASE("single tent landscape") {
    auto l = landscape(make_diagram({{3, 1}}), 5);
    REQUIRE(l.levels.size() == 5);
    CHECK(l.levels[0](2.0) == 1.0);
    CHECK(l.levels[0](1.0) == 0.0);
    CHECK(l.levels[0](3.0) == 0.0);
    CHECK(l.levels[0](1.5) == 0.5);
    for (std::size_t k = 1; k < 5; ++k) CHECK(lp_norm(l.levels[k], NormOrder::LInf) == 0);
    CHECK(lp_norm(l, NormOrder::L1) == doctest::Approx(1.0));
    CHECK(lp_norm(l, NormOrder::LInf) == 1.0);
    CHECK(lp_norm(l, NormOrder::L2) == doctest::Approx(std::sqrt(2.0 / 3.0)));

    CHECK_THROWS_AS(landscape(make_diagram({{3, 1}}), 0), ParameterError);
}

TEST_CASE("duplicated tents fill two levels") {
    auto l = landscape(make_diagram({{3, 1}, {3, 1}}), 3);
    for (double x : {1.0, 1.25, 2.0, 2.7, 3.0}) {
        CHECK(l.levels[0](x) == l.levels[1](x));
        CHECK(l.levels[2](x) == 0);
    }
    CHECK(lp_norm(l, NormOrder::L1) == doctest::Approx(2.0));
}

TEST_CASE("nested tents against dense kmax") {
    std::vector<std::pair<double, double>> pairs{{4, 0}, {3, 1}};
    auto l = landscape(make_diagram(pairs), 3);
    for (int i = 0; i <= 1000; ++i) {
        const double x = 4.0 * i / 1000;
        for (std::size_t k = 0; k < 3; ++k) {
            CHECK(l.levels[k](x) == doctest::Approx(oracle::kmax_tent(pairs, k, x)).epsilon(1e-12));
        }
    }
}

TEST_CASE("landscape distances") {
    auto tent = landscape(make_diagram({{3, 1}}), 5);
    PersistenceDiagram flat = make_diagram({{3, 1}});
    flat.pairs = {{3, 3, 0, false}, {1, 1, 0, true}};
    auto zero = landscape(flat, 5);
    CHECK(lp_norm(zero, NormOrder::L2) == 0);
    for (auto p : kOrders) CHECK(lp_distance(tent, tent, p) == 0);
    CHECK(lp_distance(tent, zero, NormOrder::L1) == doctest::Approx(1.0));
    CHECK_THROWS_AS(lp_distance(tent, landscape(make_diagram({{3, 1}}), 4), NormOrder::L1), ParameterError);
}

TEST_CASE("mean landscapes") {
    auto tent = landscape(make_diagram({{3, 1}}), 2);
    std::vector<LandscapeSet> same{tent, tent};
    CHECK(lp_distance(mean_landscape(same), tent, NormOrder::L1) == doctest::Approx(0.0));

    PersistenceDiagram flat = make_diagram({{3, 1}});
    flat.pairs = {{3, 3, 0, false}, {1, 1, 0, true}};
    std::vector<LandscapeSet> half{tent, landscape(flat, 2)};
    auto m = mean_landscape(half);
    CHECK(m.levels[0](2.0) == 0.5);
    CHECK(m.levels[0](1.5) == 0.25);

    CHECK_THROWS_AS(mean_landscape(std::vector<LandscapeSet>{}), ParameterError);

    SplitMix64 rng(17);
    for (int trial = 0; trial < 30; ++trial) {
        const std::size_t k = 1 + uniform_below(rng, 8);
        std::vector<std::vector<std::pair<double, double>>> raw;
        std::vector<LandscapeSet> ls;
        for (std::size_t i = 0; i < k; ++i) {
            std::vector<std::pair<double, double>> pairs{{10, 0}};
            const std::size_t m = uniform_below(rng, 6);
            for (std::size_t j = 0; j < m; ++j) {
                const double a = uniform01(rng) * 10, b = uniform01(rng) * 10;
                pairs.emplace_back(std::max(a, b), std::min(a, b));
            }
            raw.push_back(pairs);
            ls.push_back(landscape(make_diagram(pairs), 4));
        }
        auto mean = mean_landscape(ls);
        for (int i = 0; i <= 1000; ++i) {
            const double x = 10.0 * i / 1000;
            for (std::size_t level = 0; level < 4; ++level) {
                double expected = 0;
                for (const auto& pairs : raw) expected += oracle::kmax_tent(pairs, level, x);
                CHECK(mean.levels[level](x) == doctest::Approx(expected / static_cast<double>(k)).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("export carries a JSON header") {
    auto c = betti_curve(make_diagram({{3, 1}, {2, 1}}));
    auto text = format_step_curve(c, NormOrder::L1);
    CHECK(text.rfind("# {\"kind\":\"betti_curve\",\"p\":\"1\",\"domain\":[1.0,3.0]", 0) == 0);
    auto l = format_landscape(landscape(make_diagram({{3, 1}}), 2));
    CHECK(l.find("\"kind\":\"landscape\"") != std::string::npos);
    CHECK(l.find("1\t2\t1\n") != std::string::npos);
}

TEST_CASE("property: Betti L1 norm equals total lifetime") {
    SplitMix64 rng(404);
    for (int trial = 0; trial < 1000; ++trial) {
        auto d = random_graph_diagram(rng);
        CHECK(lp_norm(betti_curve(d), NormOrder::L1) == doctest::Approx(total_lifetime(d)).epsilon(1e-12));
    }
}

TEST_CASE("property: random landscapes agree with kmax, are ordered and 1-Lipschitz") {
    SplitMix64 rng(505);
    for (int trial = 0; trial < 200; ++trial) {
        auto d = random_graph_diagram(rng);
        const auto pairs = raw_pairs(d);
        auto l = landscape(d, 6);
        REQUIRE(l.levels.size() == 6);
        for (std::size_t k = 0; k < 6; ++k) {
            const auto& knots = l.levels[k].knots;
            for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
                const double dx = knots[i + 1].x - knots[i].x;
                CHECK(dx >= 0);
                if (dx > 1e-12) {
                    const double slope = (knots[i + 1].y - knots[i].y) / dx;
                    const bool unit = std::abs(slope) < 1e-9 || std::abs(std::abs(slope) - 1) < 1e-9;
                    CHECK(unit);
                }
            }
        }
        if (d.pairs.empty()) continue;
        for (int i = 0; i <= 200; ++i) {
            const double x = d.f_min + (d.f_max - d.f_min) * i / 200.0;
            for (std::size_t k = 0; k < 6; ++k) {
                CHECK(l.levels[k](x) == doctest::Approx(oracle::kmax_tent(pairs, k, x)).epsilon(1e-12));
                if (k + 1 < 6) CHECK(l.levels[k](x) >= l.levels[k + 1](x) - 1e-12);
            }
        }
    }
}

TEST_CASE("property: distances are symmetric and satisfy the triangle inequality") {
    SplitMix64 rng(606);
    for (int trial = 0; trial < 300; ++trial) {
        // three diagrams on a common domain [0, 8]
        std::vector<PersistenceDiagram> ds;
        for (int i = 0; i < 3; ++i) {
            std::vector<std::pair<double, double>> pairs{{8, 0}};
            const std::size_t m = uniform_below(rng, 6);
            for (std::size_t j = 0; j < m; ++j) {
                const double a = uniform01(rng) * 8, b = uniform01(rng) * 8;
                pairs.emplace_back(std::max(a, b), std::min(a, b));
            }
            ds.push_back(make_diagram(pairs));
        }
        for (auto p : kOrders) {
            auto b0 = betti_curve(ds[0]), b1 = betti_curve(ds[1]), b2 = betti_curve(ds[2]);
            CHECK(lp_distance(b0, b1, p) == doctest::Approx(lp_distance(b1, b0, p)));
            CHECK(lp_distance(b0, b2, p) <= lp_distance(b0, b1, p) + lp_distance(b1, b2, p) + 1e-9);

            auto l0 = landscape(ds[0]), l1 = landscape(ds[1]), l2 = landscape(ds[2]);
            CHECK(lp_distance(l0, l1, p) == doctest::Approx(lp_distance(l1, l0, p)));
            CHECK(lp_distance(l0, l2, p) <= lp_distance(l0, l1, p) + lp_distance(l1, l2, p) + 1e-9);
            CHECK(lp_norm(l0, p) >= 0);
        }
    }
}

TEST_CASE("property: summaries are translation invariant") {
    SplitMix64 rng(707);
    for (int trial = 0; trial < 300; ++trial) {
        auto d = random_graph_diagram(rng);
        const double shift = std::ldexp(static_cast<double>(uniform_below(rng, 64)) - 32, -2);
        PersistenceDiagram e = d;
        e.f_min += shift;
        e.f_max += shift;
        for (auto& p : e.pairs) {
            p.birth += shift;
            p.death += shift;
        }
        CHECK(total_lifetime(e) == doctest::Approx(total_lifetime(d)));
        for (auto p : kOrders) {
            CHECK(lp_norm(betti_curve(e), p) == doctest::Approx(lp_norm(betti_curve(d), p)));
            CHECK(lp_norm(landscape(e), p) == doctest::Approx(lp_norm(landscape(d), p)));
        }
    }
}
