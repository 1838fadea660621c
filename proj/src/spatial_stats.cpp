#include "topospat/spatial_stats.hpp"

#include "topospat/error.hpp"
#include "topospat/parallel.hpp"
#include "topospat/persistence.hpp"
#include "topospat/random.hpp"
#include "topospat/text_io.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace topospat {

namespace {

// Statistics closer than this (relative) to the observed one count as ties.
constexpr double kTieTolerance = 1e-10;

bool at_least_as_extreme(double s, double observed) {
    return s >= observed || (observed - s) <= kTieTolerance * std::abs(observed);
}

template <class Summary, class Compute, class Mean, class Distance>
std::pair<double, std::size_t> curve_test(std::span<const double> values, const TestConfig& cfg, Compute&& compute,
                                          Mean&& mean, Distance&& distance) {
    const std::size_t n = values.size();
    std::vector<Summary> summaries(cfg.n_perm + 1);
    summaries[0] = compute(values);
    parallel_for(cfg.n_perm, cfg.threads, [&](std::size_t i) {
        const auto perm = permutation(cfg.seed, i, n);
        std::vector<double> shuffled(n);
        for (std::size_t v = 0; v < n; ++v) shuffled[v] = values[perm[v]];
        try {
            summaries[i + 1] = compute(shuffled);
        } catch (const Error& e) {
            throw Error("permutation " + std::to_string(i) + ": " + e.what());
        }
    });

    const Summary reference = mean(std::span<const Summary>(summaries));
    std::vector<double> stats(summaries.size());
    parallel_for(summaries.size(), cfg.threads, [&](std::size_t i) { stats[i] = distance(summaries[i], reference); });

    std::size_t extreme = 0;
    for (std::size_t i = 1; i < stats.size(); ++i) extreme += at_least_as_extreme(stats[i], stats[0]);
    return {stats[0], extreme};
}

} // namespace

std::string to_string(TestMethod method) {
    switch (method) {
    case TestMethod::BettiCurve: return "betti";
    case TestMethod::Landscape: return "landscape";
    case TestMethod::TotalLifetime: return "total";
    case TestMethod::MoransI: return "moran";
    }
    return "unknown";
}

TestMethod parse_test_method(const std::string& name) {
    if (name == "betti") return TestMethod::BettiCurve;
    if (name == "landscape") return TestMethod::Landscape;
    if (name == "total") return TestMethod::TotalLifetime;
    if (name == "moran") return TestMethod::MoransI;
    throw ParameterError("unknown test method '" + name + "'");
}

void TestConfig::validate() const {
    if (n_perm < 1) throw ParameterError("n_perm must be at least 1");
    if (!(alpha > 0 && alpha < 1)) throw ParameterError("alpha must lie in (0, 1)");
    if (max_levels < 1) throw ParameterError("max_levels must be at least 1");
}

double morans_i(const SpatialGraph& graph, std::span<const double> values) {
    const std::size_t n = graph.n_vertices();
    if (values.size() != n) {
        throw DimensionError("feature has " + std::to_string(values.size()) + " values but the graph has " +
                             std::to_string(n) + " vertices");
    }
    if (graph.n_edges() == 0) {
        throw DegenerateError("Moran's I is undefined on a graph without edges");
    }
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
    double variance = 0;
    for (double v : values) variance += (v - mean) * (v - mean);
    if (!(variance > 0)) {
        throw DegenerateError("Moran's I is undefined for a constant feature");
    }
    double cross = 0;
    for (const auto& [a, b] : graph.edges()) cross += (values[a] - mean) * (values[b] - mean);
    // each undirected edge contributes w_ij and w_ji
    const double weight_sum = 2.0 * static_cast<double>(graph.n_edges());
    return static_cast<double>(n) / weight_sum * (2.0 * cross) / variance;
}

std::vector<std::uint32_t> permutation(std::uint64_t seed, std::size_t index, std::size_t n) {
    std::vector<std::uint32_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0u);
    SplitMix64 rng(derive_seed(seed, index));
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_below(rng, i));
        std::swap(perm[i - 1], perm[j]);
    }
    return perm;
}

TestReport permutation_test(const SpatialGraph& graph, std::span<const double> values, const TestConfig& cfg,
                            const std::string& feature_name) {
    cfg.validate();
    if (values.size() != graph.n_vertices()) {
        throw DimensionError("feature '" + feature_name + "' has " + std::to_string(values.size()) +
                             " values but the graph has " + std::to_string(graph.n_vertices()) + " vertices");
    }
    for (double v : values) {
        if (!std::isfinite(v)) throw ValidationError("feature '" + feature_name + "' has non-finite values");
    }

    TestReport report;
    report.feature_name = feature_name;
    report.method = cfg.method;
    report.p = cfg.p;
    report.n_perm = cfg.n_perm;
    report.seed = cfg.seed;

    std::pair<double, std::size_t> result;
    switch (cfg.method) {
    case TestMethod::BettiCurve:
        result = curve_test<StepCurve>(
            values, cfg, [&](std::span<const double> v) { return betti_curve(superlevel_diagram(graph, v)); },
            [](std::span<const StepCurve> all) { return mean_step_curve(all); },
            [&](const StepCurve& a, const StepCurve& b) { return lp_distance(a, b, cfg.p); });
        report.statistic = result.first;
        break;
    case TestMethod::Landscape:
        result = curve_test<LandscapeSet>(
            values, cfg,
            [&](std::span<const double> v) { return landscape(superlevel_diagram(graph, v), cfg.max_levels); },
            [](std::span<const LandscapeSet> all) { return mean_landscape(all); },
            [&](const LandscapeSet& a, const LandscapeSet& b) { return lp_distance(a, b, cfg.p); });
        report.statistic = result.first;
        break;
    case TestMethod::TotalLifetime:
        result = curve_test<double>(
            values, cfg, [&](std::span<const double> v) { return total_lifetime(superlevel_diagram(graph, v)); },
            [](std::span<const double> all) {
                return std::accumulate(all.begin(), all.end(), 0.0) / static_cast<double>(all.size());
            },
            [](double a, double b) { return std::abs(a - b); });
        report.statistic = result.first;
        break;
    case TestMethod::MoransI: {
        const double observed = morans_i(graph, values);
        result = curve_test<double>(
            values, cfg, [&](std::span<const double> v) { return morans_i(graph, v); },
            [](std::span<const double> all) {
                return std::accumulate(all.begin(), all.end(), 0.0) / static_cast<double>(all.size());
            },
            [](double a, double b) { return std::abs(a - b); });
        report.statistic = observed;
        break;
    }
    }
    report.p_value = static_cast<double>(result.second + 1) / static_cast<double>(cfg.n_perm + 1);
    return report;
}

std::vector<double> benjamini_hochberg(std::span<const double> p_values) {
    const std::size_t m = p_values.size();
    for (double p : p_values) {
        if (!(p > 0 && p <= 1)) {
            throw ValidationError("p-value " + text::format_double(p) + " outside (0, 1]");
        }
    }
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return p_values[a] < p_values[b]; });

    std::vector<double> q(m);
    double running = 1.0;
    for (std::size_t k = m; k-- > 0;) {
        const double candidate = static_cast<double>(m) * p_values[order[k]] / static_cast<double>(k + 1);
        running = std::min(running, candidate);
        q[order[k]] = running;
    }
    return q;
}

std::vector<TestReport> run_battery(const Dataset& ds, const SpatialGraph& graph, const TestConfig& cfg, bool allow_raw) {
    cfg.validate();
    if (!ds.transformed() && !allow_raw) {
        throw StateError("dataset is not log-transformed; transform it or allow raw values explicitly");
    }
    if (ds.n_locations() != graph.n_vertices()) {
        throw DimensionError("dataset has " + std::to_string(ds.n_locations()) + " locations but the graph has " +
                             std::to_string(graph.n_vertices()) + " vertices");
    }

    const std::size_t k = ds.features.size();
    std::vector<TestReport> reports(k);
    const bool outer = k >= static_cast<std::size_t>(std::max(cfg.threads, 1));
    TestConfig inner = cfg;
    inner.threads = outer ? 1 : cfg.threads;

    parallel_for(k, outer ? cfg.threads : 1, [&](std::size_t i) {
        const auto& feature = ds.features[i];
        try {
            reports[i] = permutation_test(graph, feature.values, inner, feature.name);
        } catch (const Error& e) {
            TestReport failed;
            failed.feature_name = feature.name;
            failed.method = cfg.method;
            failed.p = cfg.p;
            failed.n_perm = cfg.n_perm;
            failed.seed = cfg.seed;
            failed.status = std::string("error: ") + e.what();
            reports[i] = std::move(failed);
        }
    });

    std::vector<double> tested_p;
    std::vector<std::size_t> tested;
    for (std::size_t i = 0; i < k; ++i) {
        if (reports[i].ok()) {
            tested.push_back(i);
            tested_p.push_back(reports[i].p_value);
        } else {
            reports[i].q_value = 1.0;
        }
    }
    const auto q = benjamini_hochberg(tested_p);
    for (std::size_t j = 0; j < tested.size(); ++j) reports[tested[j]].q_value = q[j];

    std::vector<std::size_t> order(k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](auto a, auto b) {
        const auto& ra = reports[a];
        const auto& rb = reports[b];
        if (ra.p_value != rb.p_value) return ra.p_value < rb.p_value;
        if (ra.ok() != rb.ok()) return ra.ok();
        if (ra.statistic != rb.statistic) return ra.statistic > rb.statistic;
        return ra.feature_name < rb.feature_name;
    });
    for (std::size_t r = 0; r < k; ++r) reports[order[r]].rank = r + 1;
    return reports;
}

std::string format_reports(std::span<const TestReport> reports) {
    std::string out = "feature\tmethod\tstatistic\tp_value\tq_value\trank\tstatus\n";
    for (const auto& r : reports) {
        out += r.feature_name + '\t' + to_string(r.method) + '\t' + text::format_double(r.statistic) + '\t' +
               text::format_double(r.p_value) + '\t' + (r.q_value ? text::format_double(*r.q_value) : "NA") + '\t' +
               (r.rank ? std::to_string(*r.rank) : "NA") + '\t' + r.status + '\n';
    }
    return out;
}

} // namespace topospat
