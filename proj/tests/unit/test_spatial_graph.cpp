#include <doctest.h>

#include "support/oracles.hpp"
#include "support/temp_dir.hpp"
#include "topospat/error.hpp"
#include "topospat/spatial_graph.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <map>
#include <set>

using namespace topospat;

namespace {

using EdgeSet = std::set<std::pair<std::uint32_t, std::uint32_t>>;

EdgeSet edge_set(const SpatialGraph& g) { return {g.edges().begin(), g.edges().end()}; }

std::vector<Point> random_points(SplitMix64& rng, std::size_t n, double scale = 1.0) {
    std::vector<Point> pts(n);
    for (auto& p : pts) p = {uniform01(rng) * scale, uniform01(rng) * scale};
    return pts;
}

std::vector<Point> hex_patch(int rows, int cols, double pitch = 1.0) {
    std::vector<Point> pts;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            pts.push_back({pitch * (c + 0.5 * (r % 2)), pitch * r * std::numbers::sqrt3 / 2});
        }
    }
    return pts;
}

std::vector<Point> rect_patch(int rows, int cols, double sx = 1.0, double sy = 1.0) {
    std::vector<Point> pts;
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) pts.push_back({sx * c, sy * r});
    }
    return pts;
}

std::vector<std::uint32_t> random_permutation(SplitMix64& rng, std::size_t n) {
    std::vector<std::uint32_t> perm(n);
    for (std::uint32_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[uniform_below(rng, i)]);
    return perm;
}

// Builds the graph on permuted points and maps its edges back to the original labels.
template <typename Build>
EdgeSet permuted_edges(const std::vector<Point>& pts, const std::vector<std::uint32_t>& perm, Build build) {
    std::vector<Point> shuffled(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) shuffled[i] = pts[perm[i]];
    EdgeSet out;
    const SpatialGraph g = build(shuffled);
    for (const auto& [a, b] : g.edges()) {
        out.insert({std::min(perm[a], perm[b]), std::max(perm[a], perm[b])});
    }
    return out;
}

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

// Every triangle is CCW, every edge lies on a triangle, and no point is strictly inside a circumcircle.
void check_delaunay(const std::vector<Point>& pts, double tolerance) {
    auto triangles = delaunay_triangles(pts);
    auto g = delaunay_graph(pts);
    EdgeSet from_triangles;
    double area = 0;
    for (const auto& t : triangles) {
        const auto &a = pts[t[0]], &b = pts[t[1]], &c = pts[t[2]];
        const double o = oracle::orient_det(a, b, c);
        REQUIRE(o > 0);
        area += o / 2;
        const double scale = std::pow(std::max({distance(a, b), distance(b, c), distance(a, c)}), 4);
        for (std::size_t m = 0; m < pts.size(); ++m) {
            if (m == t[0] || m == t[1] || m == t[2]) continue;
            REQUIRE(oracle::incircle_det(a, b, c, pts[m]) <= tolerance * scale);
        }
        for (int e = 0; e < 3; ++e) {
            const auto u = t[e], v = t[(e + 1) % 3];
            from_triangles.insert({std::min(u, v), std::max(u, v)});
        }
    }
    CHECK(from_triangles == edge_set(g));
    // Euler: with h hull vertices, a triangulation has 3n - 3 - h edges and 2n - 2 - h triangles
    CHECK(3 * triangles.size() + (2 * pts.size() - 2 - triangles.size()) == 2 * g.n_edges());
}

} // namespace

TEST_CASE("graph invariants are enforced") {
    CHECK_THROWS_AS(SpatialGraph(std::vector<Point>(2), {{0, 0}}, GraphKind::Epsilon), ValidationError);
    CHECK_THROWS_AS(SpatialGraph(std::vector<Point>(2), {{0, 1}, {1, 0}}, GraphKind::Epsilon), ValidationError);
    CHECK_THROWS_AS(SpatialGraph(std::vector<Point>(2), {{0, 2}}, GraphKind::Epsilon), ValidationError);
    SpatialGraph g(std::vector<Point>(3), {{2, 1}, {0, 2}}, GraphKind::Epsilon);
    CHECK(g.edges() == std::vector<Edge>{{0, 2}, {1, 2}});
    CHECK(g.degree(2) == 2);
    CHECK(g.has_edge(2, 0));
    CHECK_FALSE(g.has_edge(0, 1));
    CHECK(parse_graph_kind("hex") == GraphKind::HexGrid);
    CHECK_THROWS_AS(parse_graph_kind("knn"), ParameterError);
}

TEST_CASE("epsilon graph examples") {
    std::vector<Point> pts{{0, 0}, {1, 0}, {3, 0}};
    CHECK(epsilon_graph(pts, 1.5).edges() == std::vector<Edge>{{0, 1}});
    CHECK(epsilon_graph(pts, 0.5).n_edges() == 0);
    CHECK(epsilon_graph(pts, 3).n_edges() == 3);
    CHECK(epsilon_graph(pts, 1.0).n_edges() == 1);
    CHECK_THROWS_AS(epsilon_graph(pts, 0), ParameterError);
    CHECK_THROWS_AS(epsilon_graph(pts, -1), ParameterError);
}

TEST_CASE("property: epsilon graph matches pairwise enumeration and is monotone") {
    SplitMix64 rng(21);
    for (int trial = 0; trial < 100; ++trial) {
        auto pts = random_points(rng, 1 + uniform_below(rng, 60));
        const double e1 = uniform01(rng) * 0.4, e2 = e1 + uniform01(rng) * 0.3;
        auto g1 = epsilon_graph(pts, e1 + 1e-9);
        auto g2 = epsilon_graph(pts, e2 + 1e-9);
        EdgeSet expected;
        for (std::uint32_t i = 0; i < pts.size(); ++i) {
            for (std::uint32_t j = i + 1; j < pts.size(); ++j) {
                const double dx = pts[i].x - pts[j].x, dy = pts[i].y - pts[j].y;
                if (dx * dx + dy * dy <= (e1 + 1e-9) * (e1 + 1e-9)) expected.insert({i, j});
            }
        }
        CHECK(edge_set(g1) == expected);
        auto s1 = edge_set(g1), s2 = edge_set(g2);
        CHECK(std::includes(s2.begin(), s2.end(), s1.begin(), s1.end()));

        auto perm = random_permutation(rng, pts.size());
        CHECK(permuted_edges(pts, perm, [&](const auto& p) { return epsilon_graph(p, e1 + 1e-9); }) == s1);
    }
}

TEST_CASE("delaunay examples") {
    std::vector<Point> square{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    auto g = delaunay_graph(square);
    CHECK(g.n_edges() == 5);
    check_delaunay(square, 1e-9);

    std::vector<Point> triangle{{0, 0}, {2, 0}, {0.5, 1}};
    CHECK(delaunay_graph(triangle).n_edges() == 3);

    CHECK_THROWS_AS(delaunay_graph(std::vector<Point>{{0, 0}, {1, 1}}), GeometryError);
    CHECK_THROWS_AS(delaunay_graph(std::vector<Point>{{0, 0}, {1, 1}, {2, 2}, {3, 3}}), GeometryError);
    CHECK_THROWS_AS(delaunay_graph(std::vector<Point>{{0, 0}, {1, 0}, {0, 1}, {1, 0}}), GeometryError);
}

TEST_CASE("cocircular points are triangulated validly") {
    for (std::size_t n : {5u, 8u, 12u, 32u}) {
        std::vector<Point> circle;
        for (std::size_t k = 0; k < n; ++k) {
            const double t = 2 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
            circle.push_back({std::cos(t), std::sin(t)});
        }
        auto g = delaunay_graph(circle);
        CHECK(g.n_edges() == 2 * n - 3);
        check_delaunay(circle, 1e-9);
    }
    // a lattice is full of cocircular quadruples
    auto lattice = rect_patch(7, 9);
    check_delaunay(lattice, 1e-9);
    CHECK(delaunay_graph(lattice).n_edges() == 3 * 63 - 3 - 28);
}

TEST_CASE("property: delaunay matches the brute-force empty-circle edge set") {
    SplitMix64 rng(22);
    for (int trial = 0; trial < 200; ++trial) {
        auto pts = random_points(rng, 3 + uniform_below(rng, 48));
        check_delaunay(pts, 1e-9);
        CHECK(edge_set(delaunay_graph(pts)) == oracle::brute_delaunay_edges(pts));
        auto perm = random_permutation(rng, pts.size());
        CHECK(permuted_edges(pts, perm, [](const auto& p) { return delaunay_graph(p); }) == edge_set(delaunay_graph(pts)));
    }
}

TEST_CASE("delaunay on larger and badly scaled inputs") {
    SplitMix64 rng(23);
    for (double scale : {1e-6, 1.0, 1e6}) {
        auto pts = random_points(rng, 3000, scale);
        auto triangles = delaunay_triangles(pts);
        auto g = delaunay_graph(pts);
        // locally Delaunay: each interior edge's opposite vertex is outside the other triangle's circumcircle
        std::map<std::pair<std::uint32_t, std::uint32_t>, std::vector<std::uint32_t>> opposite;
        for (const auto& t : triangles) {
            for (int e = 0; e < 3; ++e) {
                const auto u = t[e], v = t[(e + 1) % 3];
                opposite[{std::min(u, v), std::max(u, v)}].push_back(t[(e + 2) % 3]);
            }
        }
        std::size_t violations = 0;
        for (const auto& t : triangles) {
            for (int e = 0; e < 3; ++e) {
                const auto u = t[e], v = t[(e + 1) % 3];
                for (auto w : opposite[{std::min(u, v), std::max(u, v)}]) {
                    if (w == t[(e + 2) % 3]) continue;
                    const double s = std::pow(scale, 4);
                    if (oracle::incircle_det(pts[t[0]], pts[t[1]], pts[t[2]], pts[w]) > 1e-9 * s) ++violations;
                }
            }
        }
        CHECK(violations == 0);
        CHECK(opposite.size() == g.n_edges());
    }
}

TEST_CASE("hex grid examples") {
    auto patch = hex_patch(3, 3);
    auto g = hex_grid_graph(patch);
    CHECK(g.degree(4) == 6);
    CHECK(g.degree(0) <= 3);
    CHECK(g.degree(8) <= 3);

    auto single = hex_grid_graph(std::vector<Point>{{0, 0}}, 1.0);
    CHECK(single.n_edges() == 0);

    auto big = hex_grid_graph(hex_patch(12, 12, 100.0));
    CHECK(big.warnings.empty());
    CHECK_THROWS_AS(hex_grid_graph(patch, -1.0), ParameterError);
}

TEST_CASE("hex grid flags non-hexagonal geometry") {
    auto square = rect_patch(10, 10);
    auto g = hex_grid_graph(square);
    CHECK_FALSE(g.warnings.empty());
    CHECK_THROWS_AS(hex_grid_graph(square, std::nullopt, true), GeometryError);
}

TEST_CASE("property: lattice graphs never join distant vertices") {
    SplitMix64 rng(24);
    for (int trial = 0; trial < 50; ++trial) {
        const double pitch = 0.5 + uniform01(rng) * 100;
        auto pts = hex_patch(2 + static_cast<int>(uniform_below(rng, 10)), 2 + static_cast<int>(uniform_below(rng, 10)), pitch);
        for (auto& p : pts) {
            p.x += (uniform01(rng) - 0.5) * 0.02 * pitch;
            p.y += (uniform01(rng) - 0.5) * 0.02 * pitch;
        }
        // drop a few spots
        std::vector<Point> kept;
        for (const auto& p : pts) {
            if (uniform01(rng) > 0.1) kept.push_back(p);
        }
        if (kept.size() < 2) continue;
        auto g = hex_grid_graph(kept, pitch);
        for (const auto& [a, b] : g.edges()) CHECK(distance(kept[a], kept[b]) <= 1.1 * pitch);

        auto perm = random_permutation(rng, kept.size());
        CHECK(permuted_edges(kept, perm, [&](const auto& p) { return hex_grid_graph(p, pitch); }) == edge_set(g));

        const double sx = 0.5 + uniform01(rng) * 10, sy = 0.5 + uniform01(rng) * 10;
        auto grid = rect_patch(2 + static_cast<int>(uniform_below(rng, 8)), 2 + static_cast<int>(uniform_below(rng, 8)), sx, sy);
        for (auto& p : grid) {
            p.x += (uniform01(rng) - 0.5) * 0.1 * sx;
            p.y += (uniform01(rng) - 0.5) * 0.1 * sy;
        }
        auto r = rect_grid_graph(grid);
        CHECK(r.n_edges() > 0);
        for (const auto& [a, b] : r.edges()) CHECK(distance(grid[a], grid[b]) <= 1.1 * std::max(sx, sy));
        auto rperm = random_permutation(rng, grid.size());
        CHECK(permuted_edges(grid, rperm, [](const auto& p) { return rect_grid_graph(p); }) == edge_set(r));
    }
}

TEST_CASE("rect grid examples") {
    CHECK(rect_grid_graph(rect_patch(3, 3)).n_edges() == 12);
    CHECK(rect_grid_graph(rect_patch(1, 7)).n_edges() == 6);
    CHECK(rect_grid_graph(rect_patch(7, 1)).n_edges() == 6);

    auto holed = rect_patch(3, 3);
    holed.erase(holed.begin() + 4);
    CHECK(rect_grid_graph(holed).n_edges() == 8);

    auto g = rect_grid_graph(rect_patch(4, 5, 2.0, 3.0));
    CHECK(g.n_edges() == 4 * 4 + 5 * 3);
    CHECK(g.has_edge(0, 1));
    CHECK(g.has_edge(0, 5));
    CHECK_FALSE(g.has_edge(0, 6));

    auto off = rect_patch(3, 3);
    off[4].x += 0.3;
    CHECK_THROWS_AS(rect_grid_graph(off), GeometryError);
}

TEST_CASE("graph export") {
    TempDir dir;
    auto g = epsilon_graph(std::vector<Point>{{0, 0}, {1, 0}, {3, 0}}, 1.5);
    save_graph(g, dir.file("edges.tsv"), dir.file("graph.json"));
    CHECK(slurp(dir.file("edges.tsv")) == "i\tj\n0\t1\n");
    auto meta = slurp(dir.file("graph.json"));
    CHECK(meta.find("\"kind\": \"epsilon\"") != std::string::npos);
    CHECK(meta.find("\"epsilon\": 1.5") != std::string::npos);
}
