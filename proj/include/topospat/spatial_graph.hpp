#ifndef TOPOSPAT_SPATIAL_GRAPH_HPP
#define TOPOSPAT_SPATIAL_GRAPH_HPP

#include "topospat/ingest.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

/**
 * @file spatial_graph.hpp
 *
 * @brief Neighbourhood graphs over 2-D locations.
 */

namespace topospat {

enum class GraphKind { Epsilon, Delaunay, HexGrid, RectGrid };

std::string to_string(GraphKind kind);
GraphKind parse_graph_kind(const std::string& name);

using Edge = std::pair<std::uint32_t, std::uint32_t>;

/**
 * @brief Immutable undirected simple graph on located vertices.
 *
 * Edges are stored once as (i, j) with i < j, sorted lexicographically.
 * A compressed adjacency list is built on construction.
 */
class SpatialGraph {
public:
    SpatialGraph() = default;

    /// Validates and canonicalises `edges`: orients each pair, sorts, rejects
    /// self-loops, duplicates and out-of-range endpoints.
    SpatialGraph(std::vector<Point> coords, std::vector<Edge> edges, GraphKind kind);

    std::size_t n_vertices() const { return coords_.size(); }
    std::size_t n_edges() const { return edges_.size(); }
    GraphKind kind() const { return kind_; }

    const std::vector<Point>& coords() const { return coords_; }
    const std::vector<Edge>& edges() const { return edges_; }

    std::span<const std::uint32_t> neighbors(std::size_t v) const {
        return {adjacency_.data() + offsets_[v], adjacency_.data() + offsets_[v + 1]};
    }
    std::size_t degree(std::size_t v) const { return offsets_[v + 1] - offsets_[v]; }

    bool has_edge(std::uint32_t i, std::uint32_t j) const;

    /// Construction parameters (epsilon, pitch, ...), echoed in exports.
    std::vector<std::pair<std::string, double>> parameters;
    /// Non-fatal geometry diagnostics.
    std::vector<std::string> warnings;

private:
    std::vector<Point> coords_;
    std::vector<Edge> edges_;
    std::vector<std::size_t> offsets_{0};
    std::vector<std::uint32_t> adjacency_;
    GraphKind kind_ = GraphKind::Epsilon;
};

/// Edge (i, j) iff the Euclidean distance is at most `epsilon`.
SpatialGraph epsilon_graph(std::span<const Point> coords, double epsilon);

/// Triangles of the Delaunay triangulation as counter-clockwise index triples.
/// Cocircular ties resolve by insertion order (points sorted by x, then y,
/// then index). Throws `GeometryError` for fewer than 3 points, all-collinear
/// input or duplicate coordinates.
std::vector<std::array<std::uint32_t, 3>> delaunay_triangles(std::span<const Point> coords);

/// Edges of the Delaunay triangulation.
SpatialGraph delaunay_graph(std::span<const Point> coords);

/**
 * Hexagonal lattice graph: vertices at distance within 5% of `pitch` are
 * joined. The pitch defaults to the minimum non-zero pairwise distance.
 * If more than 10% of interior vertices do not have degree 6 a warning is
 * recorded, or a `GeometryError` thrown when `strict` is set.
 */
SpatialGraph hex_grid_graph(std::span<const Point> coords, std::optional<double> pitch = std::nullopt,
                            bool strict = false);

/**
 * Axis-aligned rectangular lattice with 4-connectivity. Coordinates are
 * snapped to row/column indices; any point more than 10% of the spacing off
 * the lattice raises `GeometryError`.
 */
SpatialGraph rect_grid_graph(std::span<const Point> coords);

/// Minimum non-zero pairwise Euclidean distance (0 when there is none).
double min_pairwise_distance(std::span<const Point> coords);

/// Edge list `i<TAB>j` and a JSON sidecar with kind and parameters.
void save_graph(const SpatialGraph& graph, const std::string& edges_path, const std::string& json_path);

} // namespace topospat

#endif
