#include "topospat/spatial_graph.hpp"

#include "topospat/error.hpp"
#include "topospat/text_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace topospat {

std::string to_string(GraphKind kind) {
    switch (kind) {
    case GraphKind::Epsilon: return "epsilon";
    case GraphKind::Delaunay: return "delaunay";
    case GraphKind::HexGrid: return "hex";
    case GraphKind::RectGrid: return "rect";
    }
    return "unknown";
}

GraphKind parse_graph_kind(const std::string& name) {
    if (name == "epsilon") return GraphKind::Epsilon;
    if (name == "delaunay") return GraphKind::Delaunay;
    if (name == "hex") return GraphKind::HexGrid;
    if (name == "rect") return GraphKind::RectGrid;
    throw ParameterError("unknown graph kind '" + name + "'");
}

SpatialGraph::SpatialGraph(std::vector<Point> coords, std::vector<Edge> edges, GraphKind kind)
    : coords_(std::move(coords)), edges_(std::move(edges)), kind_(kind) {
    const auto n = coords_.size();
    for (auto& e : edges_) {
        if (e.first == e.second) {
            throw ValidationError("self-loop at vertex " + std::to_string(e.first));
        }
        if (e.first > e.second) {
            std::swap(e.first, e.second);
        }
        if (e.second >= n) {
            throw ValidationError("edge endpoint " + std::to_string(e.second) + " out of range");
        }
    }
    std::sort(edges_.begin(), edges_.end());
    if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end()) {
        throw ValidationError("duplicate edge");
    }

    offsets_.assign(n + 1, 0);
    for (const auto& [a, b] : edges_) {
        ++offsets_[a + 1];
        ++offsets_[b + 1];
    }
    std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
    adjacency_.resize(2 * edges_.size());
    std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
    for (const auto& [a, b] : edges_) {
        adjacency_[fill[a]++] = b;
        adjacency_[fill[b]++] = a;
    }
}

bool SpatialGraph::has_edge(std::uint32_t i, std::uint32_t j) const {
    if (i > j) std::swap(i, j);
    return std::binary_search(edges_.begin(), edges_.end(), Edge{i, j});
}

namespace {

double dist2(const Point& a, const Point& b) {
    const double dx = a.x - b.x, dy = a.y - b.y;
    return dx * dx + dy * dy;
}

std::vector<std::uint32_t> order_by_x(std::span<const Point> coords) {
    std::vector<std::uint32_t> order(coords.size());
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) {
        if (coords[a].x != coords[b].x) return coords[a].x < coords[b].x;
        return a < b;
    });
    return order;
}

// All pairs whose distance lies in [lo, hi], found by an x-sorted sweep.
std::vector<Edge> pairs_within(std::span<const Point> coords, double lo, double hi) {
    const auto order = order_by_x(coords);
    const double lo2 = lo * lo, hi2 = hi * hi;
    std::vector<Edge> edges;
    for (std::size_t a = 0; a < order.size(); ++a) {
        const auto& p = coords[order[a]];
        for (std::size_t b = a + 1; b < order.size(); ++b) {
            const auto& q = coords[order[b]];
            if (q.x - p.x > hi) break;
            const double d2 = dist2(p, q);
            if (d2 <= hi2 && d2 >= lo2) {
                edges.emplace_back(std::min(order[a], order[b]), std::max(order[a], order[b]));
            }
        }
    }
    return edges;
}

void check_finite(std::span<const Point> coords) {
    for (const auto& p : coords) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
            throw ValidationError("non-finite coordinate");
        }
    }
}

// Monotone chain hull, counter-clockwise.
std::vector<Point> convex_hull(std::span<const Point> coords) {
    std::vector<Point> pts(coords.begin(), coords.end());
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    if (pts.size() < 3) return pts;
    auto cross = [](const Point& o, const Point& a, const Point& b) {
        return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
    };
    std::vector<Point> hull(2 * pts.size());
    std::size_t k = 0;
    for (const auto& p : pts) {
        while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0) --k;
        hull[k++] = p;
    }
    for (std::size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(hull[k - 2], hull[k - 1], pts[i]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

double distance_to_segment(const Point& p, const Point& a, const Point& b) {
    const double vx = b.x - a.x, vy = b.y - a.y;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Point q{a.x + t * vx, a.y + t * vy};
    return std::sqrt(dist2(p, q));
}

struct AxisLattice {
    double origin;
    double spacing;
};

// Cluster one coordinate axis into lattice lines and fit origin + spacing.
AxisLattice fit_axis(std::vector<double> values, double scale) {
    std::sort(values.begin(), values.end());
    std::vector<double> centres;
    std::size_t start = 0;
    for (std::size_t i = 1; i <= values.size(); ++i) {
        if (i == values.size() || values[i] - values[i - 1] > 0.5 * scale) {
            double sum = 0;
            for (std::size_t j = start; j < i; ++j) sum += values[j];
            centres.push_back(sum / static_cast<double>(i - start));
            start = i;
        }
    }
    if (centres.size() < 2) {
        return {centres.front(), scale};
    }
    std::vector<double> gaps;
    for (std::size_t i = 1; i < centres.size(); ++i) gaps.push_back(centres[i] - centres[i - 1]);
    std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
    double spacing = gaps[gaps.size() / 2];
    double origin = centres.front();

    // least-squares refinement of origin and spacing on the snapped indices
    double sk = 0, sx = 0, skk = 0, skx = 0;
    for (double c : centres) {
        const double k = std::round((c - origin) / spacing);
        sk += k;
        sx += c;
        skk += k * k;
        skx += k * c;
    }
    const double m = static_cast<double>(centres.size());
    const double det = m * skk - sk * sk;
    if (det > 0) {
        spacing = (m * skx - sk * sx) / det;
        origin = (sx - spacing * sk) / m;
    }
    return {origin, spacing};
}

} // namespace

double min_pairwise_distance(std::span<const Point> coords) {
    const auto order = order_by_x(coords);
    double best2 = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < order.size(); ++a) {
        const auto& p = coords[order[a]];
        for (std::size_t b = a + 1; b < order.size(); ++b) {
            const auto& q = coords[order[b]];
            const double dx = q.x - p.x;
            if (dx * dx >= best2) break;
            const double d2 = dist2(p, q);
            if (d2 > 0 && d2 < best2) best2 = d2;
        }
    }
    return std::isfinite(best2) ? std::sqrt(best2) : 0.0;
}

SpatialGraph epsilon_graph(std::span<const Point> coords, double epsilon) {
    if (!(epsilon > 0) || !std::isfinite(epsilon)) {
        throw ParameterError("epsilon must be a positive finite number");
    }
    check_finite(coords);
    SpatialGraph g(std::vector<Point>(coords.begin(), coords.end()), pairs_within(coords, 0.0, epsilon),
                   GraphKind::Epsilon);
    g.parameters.emplace_back("epsilon", epsilon);
    return g;
}

SpatialGraph hex_grid_graph(std::span<const Point> coords, std::optional<double> pitch, bool strict) {
    constexpr double tolerance = 0.05;
    check_finite(coords);
    double step = pitch ? *pitch : min_pairwise_distance(coords);
    if (pitch && !(*pitch > 0)) {
        throw ParameterError("hex pitch must be positive");
    }
    std::vector<Edge> edges;
    if (step > 0) {
        edges = pairs_within(coords, step * (1 - tolerance), step * (1 + tolerance));
    }
    SpatialGraph g(std::vector<Point>(coords.begin(), coords.end()), std::move(edges), GraphKind::HexGrid);
    g.parameters.emplace_back("pitch", step);
    g.parameters.emplace_back("tolerance", tolerance);

    // Degree check on vertices well inside the convex hull.
    const auto hull = convex_hull(coords);
    std::size_t interior = 0, deviating = 0;
    if (hull.size() >= 3 && step > 0) {
        for (std::size_t v = 0; v < coords.size(); ++v) {
            double d = std::numeric_limits<double>::infinity();
            for (std::size_t h = 0; h < hull.size(); ++h) {
                d = std::min(d, distance_to_segment(coords[v], hull[h], hull[(h + 1) % hull.size()]));
            }
            if (d >= 1.5 * step) {
                ++interior;
                deviating += (g.degree(v) != 6);
            }
        }
    }
    if (interior > 0 && static_cast<double>(deviating) > 0.1 * static_cast<double>(interior)) {
        const std::string msg = std::to_string(deviating) + " of " + std::to_string(interior) +
                                " interior vertices do not have 6 neighbours; coordinates may not be a hexagonal grid";
        if (strict) {
            throw GeometryError(msg);
        }
        g.warnings.push_back(msg);
    }
    return g;
}

SpatialGraph rect_grid_graph(std::span<const Point> coords) {
    constexpr double tolerance = 0.1;
    check_finite(coords);
    if (coords.empty()) {
        return SpatialGraph({}, {}, GraphKind::RectGrid);
    }
    const double scale = coords.size() > 1 ? min_pairwise_distance(coords) : 1.0;
    if (!(scale > 0)) {
        throw GeometryError("duplicate coordinates; cannot build a rectangular grid");
    }

    std::vector<double> xs, ys;
    for (const auto& p : coords) {
        xs.push_back(p.x);
        ys.push_back(p.y);
    }
    const auto ax = fit_axis(xs, scale);
    const auto ay = fit_axis(ys, scale);

    std::map<std::pair<long long, long long>, std::uint32_t> cells;
    for (std::uint32_t v = 0; v < coords.size(); ++v) {
        const double fc = (coords[v].x - ax.origin) / ax.spacing;
        const double fr = (coords[v].y - ay.origin) / ay.spacing;
        const double col = std::round(fc), row = std::round(fr);
        if (std::abs(fc - col) > tolerance || std::abs(fr - row) > tolerance) {
            throw GeometryError("point " + std::to_string(v) + " is more than 10% of the spacing off the rectangular lattice");
        }
        if (!cells.emplace(std::make_pair(static_cast<long long>(row), static_cast<long long>(col)), v).second) {
            throw GeometryError("points " + std::to_string(cells[{(long long)row, (long long)col}]) + " and " +
                                std::to_string(v) + " snap to the same lattice cell");
        }
    }

    std::vector<Edge> edges;
    for (const auto& [cell, v] : cells) {
        const auto right = cells.find({cell.first, cell.second + 1});
        if (right != cells.end()) edges.emplace_back(std::min(v, right->second), std::max(v, right->second));
        const auto up = cells.find({cell.first + 1, cell.second});
        if (up != cells.end()) edges.emplace_back(std::min(v, up->second), std::max(v, up->second));
    }
    SpatialGraph g(std::vector<Point>(coords.begin(), coords.end()), std::move(edges), GraphKind::RectGrid);
    g.parameters.emplace_back("spacing_x", ax.spacing);
    g.parameters.emplace_back("spacing_y", ay.spacing);
    return g;
}

void save_graph(const SpatialGraph& graph, const std::string& edges_path, const std::string& json_path) {
    std::string edges = "i\tj\n";
    for (const auto& [a, b] : graph.edges()) {
        edges += std::to_string(a) + '\t' + std::to_string(b) + '\n';
    }
    nlohmann::ordered_json meta;
    meta["kind"] = to_string(graph.kind());
    meta["n_vertices"] = graph.n_vertices();
    meta["n_edges"] = graph.n_edges();
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    for (const auto& [k, v] : graph.parameters) params[k] = v;
    meta["parameters"] = params;
    meta["warnings"] = graph.warnings;
    text::write_file_atomic(edges_path, edges);
    text::write_file_atomic(json_path, meta.dump(2) + "\n");
}

} // namespace topospat
