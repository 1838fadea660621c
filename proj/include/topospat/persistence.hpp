#ifndef TOPOSPAT_PERSISTENCE_HPP
#define TOPOSPAT_PERSISTENCE_HPP

#include "topospat/spatial_graph.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

/**
 * @file persistence.hpp
 *
 * @brief Zero-dimensional persistent homology of superlevel-set filtrations.
 *
 * Connected components only depend on vertices and edges, so the same
 * union-find sweep gives the H0 diagram of the clique complex (Delaunay,
 * hexagonal and epsilon graphs) and of the cubical complex (rectangular grids).
 */

namespace topospat {

/**
 * @brief A connected component of the superlevel filtration.
 *
 * The component appears at `birth` (its maximum value) and disappears at
 * `death <= birth`, either by merging into an older component or, for
 * components that never merge, at the minimum value of the feature.
 */
struct PersistencePair {
    double birth = 0;
    double death = 0;
    std::size_t birth_vertex = 0;
    /// Never merged; death is the lower bound of the filtration.
    bool essential = false;

    double lifetime() const { return birth - death; }

    friend bool operator==(const PersistencePair&, const PersistencePair&) = default;
};

struct PersistenceDiagram {
    std::vector<PersistencePair> pairs;
    double f_min = 0;
    double f_max = 0;

    bool empty() const { return pairs.empty(); }
};

/**
 * Sweep vertices from the highest to the lowest value (equal values in
 * increasing index order). A vertex with no active neighbour starts a new
 * component; otherwise it joins the oldest neighbouring component and every
 * other neighbouring component dies at the vertex's value (elder rule: the
 * older component has the larger birth, then the smaller birth vertex).
 * Surviving components die at min(values). Zero-lifetime pairs created on
 * plateaus are kept. Pairs are listed in the order their components appear.
 */
PersistenceDiagram superlevel_diagram(const SpatialGraph& graph, std::span<const double> values);

/// Sublevel filtration via negation; pairs are reported in negated coordinates.
/// Sublevel counterpart in the original units: births are minima and deaths lie above them.
PersistenceDiagram sublevel_diagram(const SpatialGraph& graph, std::span<const double> values);

struct DiagramStats {
    std::size_t count = 0;
    double max_lifetime = 0;
    /// Pairs whose death equals f_min (including merges at the minimum value).
    std::size_t essential = 0;
    /// Components of the whole graph, i.e. pairs that never merged.
    std::size_t unmerged = 0;
};

DiagramStats diagram_stats(const PersistenceDiagram& d);

/// TSV `birth death birth_vertex` preceded by `# f_min`, `# f_max` comments.
std::string format_diagram(const PersistenceDiagram& d);

} // namespace topospat

#endif
