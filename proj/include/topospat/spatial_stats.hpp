#ifndef TOPOSPAT_SPATIAL_STATS_HPP
#define TOPOSPAT_SPATIAL_STATS_HPP

#include "topospat/ingest.hpp"
#include "topospat/spatial_graph.hpp"
#include "topospat/summaries.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

/**
 * @file spatial_stats.hpp
 *
 * @brief Randomised permutation tests for spatial dependence.
 */

namespace topospat {

enum class TestMethod { BettiCurve, Landscape, TotalLifetime, MoransI };

std::string to_string(TestMethod method);
/// "betti", "landscape", "total", "moran".
TestMethod parse_test_method(const std::string& name);

struct TestConfig {
    TestMethod method = TestMethod::BettiCurve;
    std::size_t n_perm = 1000;
    NormOrder p = NormOrder::L2;
    std::size_t max_levels = 5;
    std::uint64_t seed = 0;
    double alpha = 0.05;
    int threads = 1;

    void validate() const;
};

struct TestReport {
    std::string feature_name;
    /// Distance of the observed summary from the null mean; observed I for Moran's I.
    double statistic = 0;
    double p_value = 1;
    std::optional<double> q_value;
    std::optional<std::size_t> rank;
    /// "ok", or the error that made the feature untestable.
    std::string status = "ok";

    TestMethod method = TestMethod::BettiCurve;
    NormOrder p = NormOrder::L2;
    std::size_t n_perm = 0;
    std::uint64_t seed = 0;

    bool ok() const { return status == "ok"; }
};

/// Moran's I with binary adjacency weights (sum of weights = 2|E|).
double morans_i(const SpatialGraph& graph, std::span<const double> values);

/**
 * Permutation `index` of the stream `seed`: a uniformly random arrangement of
 * n positions. Depends only on (seed, index, n), so every feature tested with
 * the same seed sees the same sequence of relabellings.
 */
std::vector<std::uint32_t> permutation(std::uint64_t seed, std::size_t index, std::size_t n);

/**
 * One-sample permutation test of a single feature. The null reference is the
 * mean summary over the observed assignment and all `n_perm` permutations;
 * statistics are distances from that mean (absolute deviations for scalar
 * methods) and p = (#{perm : s_perm >= s_obs} + 1) / (n_perm + 1).
 * `q_value` and `rank` are left unset.
 */
TestReport permutation_test(const SpatialGraph& graph, std::span<const double> values, const TestConfig& cfg,
                            const std::string& feature_name = "");

/// Benjamini-Hochberg step-up adjusted p-values, in input order.
std::vector<double> benjamini_hochberg(std::span<const double> p_values);

/**
 * Test every feature of `ds`, adjust with Benjamini-Hochberg across the
 * features that could be tested and rank by ascending p-value (ties: larger
 * statistic first, then name). Failed features keep p = q = 1 and a status
 * message. Requires transformed data unless `allow_raw`.
 */
std::vector<TestReport> run_battery(const Dataset& ds, const SpatialGraph& graph, const TestConfig& cfg,
                                    bool allow_raw = false);

/// Report TSV: feature method statistic p_value q_value rank status.
std::string format_reports(std::span<const TestReport> reports);

} // namespace topospat

#endif
