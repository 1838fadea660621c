#ifndef TOPOSPAT_SUMMARIES_HPP
#define TOPOSPAT_SUMMARIES_HPP

#include "topospat/persistence.hpp"

#include <span>
#include <string>
#include <vector>

/**
 * @file summaries.hpp
 *
 * @brief Exact functional summaries of persistence diagrams.
 *
 * Curves are stored as exact piecewise-constant or piecewise-linear functions,
 * so norms, distances and means are closed-form integrals over merged
 * breakpoint sets; no sampling grid is involved.
 */

namespace topospat {

/// Supported L^p orders.
enum class NormOrder { L1, L2, LInf };

/// 1, 2 or infinity; anything else is a `ParameterError`.
NormOrder norm_order(double p);
/// Accepts "1", "2", "inf".
NormOrder parse_norm_order(const std::string& p);
std::string to_string(NormOrder p);

/**
 * @brief Piecewise-constant function on [lo, hi].
 *
 * `values[k]` holds on the half-open segment (knots[k], knots[k+1]]; the value
 * at `lo` itself is `at_lo`. Zero outside the domain. A degenerate domain
 * (lo == hi) has a single knot and no segments.
 */
struct StepCurve {
    double lo = 0;
    double hi = 0;
    std::vector<double> knots{0.0};
    std::vector<double> values;
    double at_lo = 0;

    double operator()(double x) const;
};

struct Knot {
    double x = 0;
    double y = 0;
};

/// Continuous piecewise-linear function through `knots` (sorted by x), zero
/// outside [knots.front().x, knots.back().x]. No knots means the zero function.
struct PiecewiseLinear {
    std::vector<Knot> knots;

    double operator()(double x) const;
};

/// Persistence landscape levels 1..max_levels on [lo, hi].
struct LandscapeSet {
    double lo = 0;
    double hi = 0;
    std::vector<PiecewiseLinear> levels;
};

double total_lifetime(const PersistenceDiagram& d);

/**
 * Count of alive components at each filtration value. On the open segments
 * between consecutive births/deaths a pair counts when death < x < birth.
 * At breakpoints the curve is left-continuous, which makes the value at any
 * threshold equal the number of components of the superlevel set there;
 * at lo only unmerged components count.
 */
StepCurve betti_curve(const PersistenceDiagram& d);

double lp_norm(const StepCurve& c, NormOrder p);
double lp_distance(const StepCurve& a, const StepCurve& b, NormOrder p);
StepCurve mean_step_curve(std::span<const StepCurve> curves);

/**
 * Levels of the pointwise k-th maximum of the tents
 * max(0, min(birth - x, x - death)), built with the Bubenik-Dlotko sweep.
 * Levels beyond the number of pairs are zero functions.
 */
LandscapeSet landscape(const PersistenceDiagram& d, std::size_t max_levels = 5);

/// L^p norm of one level.
double lp_norm(const PiecewiseLinear& f, NormOrder p);
double lp_distance(const PiecewiseLinear& f, const PiecewiseLinear& g, NormOrder p);

/// Sum over levels of the per-level L^p norm.
double lp_norm(const LandscapeSet& l, NormOrder p);
/// Sum over levels of the per-level L^p distance.
double lp_distance(const LandscapeSet& a, const LandscapeSet& b, NormOrder p);
LandscapeSet mean_landscape(std::span<const LandscapeSet> landscapes);

/// TSV segment table preceded by a `# {json}` line with kind, p and domain.
std::string format_step_curve(const StepCurve& c, NormOrder p = NormOrder::L2);
std::string format_landscape(const LandscapeSet& l, NormOrder p = NormOrder::L2);

} // namespace topospat

#endif
