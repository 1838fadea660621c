#ifndef TOPOSPAT_SIMULATE_HPP
#define TOPOSPAT_SIMULATE_HPP

#include "topospat/ingest.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

/**
 * @file simulate.hpp
 *
 * @brief Synthetic spatial count data with labelled spatial domains.
 *
 * Locations are uniform on the unit square. A pattern assigns each location
 * to a domain; domain i multiplies the baseline mean by its effect size.
 * Counts are zero-inflated Poisson or negative binomial draws.
 */

namespace topospat {

enum class Pattern { Gradient, Cellring, Clusters, Streaks, None };
enum class CountDistribution { Poisson, NegBinomial };

std::string to_string(Pattern pattern);
Pattern parse_pattern(const std::string& name);
std::string to_string(CountDistribution distribution);
CountDistribution parse_distribution(const std::string& name);

/// Default per-domain effect sizes (domain 1..N) for a pattern.
std::vector<double> default_effect_sizes(Pattern pattern);

struct SimConfig {
    std::size_t n_locations = 400;
    Pattern pattern = Pattern::Clusters;
    double mu = 1.0;
    double dispersion = 0.3;
    double zero_prop = 0.0;
    /// Effect sizes for domains 1..N; empty means `default_effect_sizes(pattern)`.
    std::vector<double> effect_sizes;
    /// Effects become max(e / effect_scale, 1).
    double effect_scale = 1.0;
    CountDistribution distribution = CountDistribution::NegBinomial;
    /// Gradient only: effect ramps linearly in x instead of in four bands.
    bool continuous_gradient = false;
    std::size_t n_signal = 50;
    std::size_t n_null = 50;
    std::uint64_t seed = 0;
    int threads = 1;

    void validate() const;
    /// Effective multiplier for every domain 0..N (domain 0 is 1).
    std::vector<double> effective_effects() const;
};

/// Per-location domain index, 0 = background.
struct DomainMask {
    std::vector<std::uint32_t> domain;
    std::size_t n_domains = 0;
};

std::vector<Point> sample_locations(std::size_t n, std::uint64_t seed);

/**
 * Gradient: four vertical bands [k/4, (k+1)/4) as domains 1..4.
 * Cellring: annulus around (0.5, 0.5) with radii in [0.25, 0.4].
 * Clusters: discs of radius 0.12 at (0.25, 0.25), (0.75, 0.3), (0.5, 0.75).
 * Streaks: a vertical strip around x = 0.3 and a horizontal one around
 * y = 0.7, each 0.08 wide. None: all background.
 */
DomainMask domain_mask(std::span<const Point> points, Pattern pattern);

/// Draw one feature over `mask`; `points` is only consulted by the continuous gradient.
FeatureRecord sample_feature(const DomainMask& mask, std::span<const Point> points, const SimConfig& cfg,
                             std::uint64_t feature_seed, const std::string& name, bool label);

/// `n_signal` features with the pattern (label true) followed by `n_null` features without (label false).
Dataset simulate_dataset(const SimConfig& cfg);

} // namespace topospat

#endif
