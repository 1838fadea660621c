#include "topospat/cli.hpp"

#include "manifest.hpp"
#include "topospat/error.hpp"
#include "topospat/evaluate.hpp"
#include "topospat/ingest.hpp"
#include "topospat/persistence.hpp"
#include "topospat/simulate.hpp"
#include "topospat/spatial_graph.hpp"
#include "topospat/spatial_stats.hpp"
#include "topospat/summaries.hpp"
#include "topospat/text_io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <thread>

namespace topospat::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

/// Flag combinations that cannot be expressed as CLI11 constraints.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string path_in(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

int resolve_threads(std::optional<int> flag) {
    if (flag) {
        if (*flag < 1) throw UsageError("--threads must be at least 1");
        return *flag;
    }
    if (const char* env = std::getenv("TOPOSPAT_THREADS")) {
        double v = 0;
        if (!text::parse_double(env, v) || v < 1 || v != std::floor(v)) {
            throw UsageError("TOPOSPAT_THREADS must be a positive integer, got '" + std::string(env) + "'");
        }
        return static_cast<int>(v);
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::string join(const std::vector<std::string>& items, const std::string& sep = ",") {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

std::string fmt(double v) { return text::format_double(v); }

// ---------------------------------------------------------------------------
// Shared option groups

struct GraphOptions {
    std::string kind = "delaunay";
    std::optional<double> epsilon;
    std::optional<double> pitch;
    bool strict = false;

    void add(CLI::App* app) {
        app->add_option("--graph", kind, "Neighbourhood graph")
            ->check(CLI::IsMember({"epsilon", "delaunay", "hex", "rect"}))
            ->capture_default_str();
        app->add_option("--epsilon", epsilon, "Distance threshold for --graph epsilon");
        app->add_option("--pitch", pitch, "Lattice pitch for --graph hex (default: minimum distance)");
        app->add_flag("--strict", strict, "Fail instead of warning when a hex grid looks irregular");
    }

    void check() const {
        if (kind == "epsilon" && !epsilon) throw UsageError("--graph epsilon requires --epsilon");
        if (kind != "epsilon" && epsilon) throw UsageError("--epsilon only applies to --graph epsilon");
        if (kind != "hex" && (pitch || strict)) throw UsageError("--pitch and --strict only apply to --graph hex");
    }

    SpatialGraph build(std::span<const Point> coords) const {
        switch (parse_graph_kind(kind)) {
        case GraphKind::Epsilon: return epsilon_graph(coords, *epsilon);
        case GraphKind::Delaunay: return delaunay_graph(coords);
        case GraphKind::HexGrid: return hex_grid_graph(coords, pitch, strict);
        case GraphKind::RectGrid: return rect_grid_graph(coords);
        }
        throw UsageError("unknown graph kind");
    }

    void record(ordered_json& params) const {
        params["graph"] = kind;
        params["epsilon"] = epsilon ? ordered_json(*epsilon) : ordered_json(nullptr);
        params["pitch"] = pitch ? ordered_json(*pitch) : ordered_json(nullptr);
        params["strict"] = strict;
    }
};

ordered_json describe_graph(const SpatialGraph& g) {
    ordered_json j;
    j["kind"] = to_string(g.kind());
    j["n_vertices"] = g.n_vertices();
    j["n_edges"] = g.n_edges();
    j["parameters"] = ordered_json::object();
    for (const auto& [k, v] : g.parameters) j["parameters"][k] = v;
    j["warnings"] = g.warnings;
    return j;
}

struct TestOptions {
    std::string method = "betti";
    std::string p = "2";
    std::size_t max_levels = 5;
    std::size_t n_perm = 1000;
    double alpha = 0.05;
    std::uint64_t seed = 0;

    void add(CLI::App* app, bool single_method) {
        if (single_method) {
            app->add_option("--method", method, "Summary used by the permutation test")
                ->check(CLI::IsMember({"betti", "landscape", "total", "moran"}))
                ->capture_default_str();
        }
        app->add_option("--p", p, "L^p order of curve distances")
            ->check(CLI::IsMember({"1", "2", "inf"}))
            ->capture_default_str();
        app->add_option("--max-levels", max_levels, "Landscape levels")->capture_default_str();
        app->add_option("--n-perm", n_perm, "Permutations per feature")->capture_default_str();
        app->add_option("--alpha", alpha, "Significance level for q-values")->capture_default_str();
        app->add_option("--seed", seed, "Random seed")->capture_default_str();
    }

    TestConfig config(const std::string& m, int threads) const {
        TestConfig cfg;
        cfg.method = parse_test_method(m);
        cfg.p = parse_norm_order(p);
        cfg.max_levels = max_levels;
        cfg.n_perm = n_perm;
        cfg.alpha = alpha;
        cfg.seed = seed;
        cfg.threads = threads;
        cfg.validate();
        return cfg;
    }

    void record(ordered_json& params) const {
        params["p"] = p;
        params["max_levels"] = max_levels;
        params["n_perm"] = n_perm;
        params["alpha"] = alpha;
    }
};

struct SimOptions {
    std::string pattern = "clusters";
    std::string distribution = "negbinomial";
    SimConfig cfg;

    void add(CLI::App* app, bool single_pattern) {
        if (single_pattern) {
            app->add_option("--pattern", pattern, "Spatial pattern of the signal features")
                ->check(CLI::IsMember({"gradient", "cellring", "clusters", "streaks", "none"}))
                ->capture_default_str();
        }
        app->add_option("--mu", cfg.mu, "Baseline mean count")->capture_default_str();
        app->add_option("--dispersion", cfg.dispersion, "Negative-binomial dispersion r")->capture_default_str();
        app->add_option("--zero-prop", cfg.zero_prop, "Excess zero probability z in [0, 1)")->capture_default_str();
        app->add_option("--effect-scale", cfg.effect_scale, "Effect divisor c >= 1")->capture_default_str();
        app->add_option("--effect-sizes", cfg.effect_sizes, "Per-domain fold changes (default depends on pattern)")
            ->delimiter(',');
        app->add_option("--distribution", distribution, "Count distribution")
            ->check(CLI::IsMember({"poisson", "negbinomial"}))
            ->capture_default_str();
        app->add_flag("--continuous-gradient", cfg.continuous_gradient, "Linear ramp instead of gradient bands");
        app->add_option("--n-signal", cfg.n_signal, "Features with spatial signal")->capture_default_str();
        app->add_option("--n-null", cfg.n_null, "Features without signal")->capture_default_str();
        app->add_option("--n-locations", cfg.n_locations, "Locations on the unit square")->capture_default_str();
    }

    SimConfig resolve(const std::string& pat, std::uint64_t seed, int threads) const {
        SimConfig out = cfg;
        out.pattern = parse_pattern(pat);
        out.distribution = parse_distribution(distribution);
        out.seed = seed;
        out.threads = threads;
        out.validate();
        return out;
    }

    void record(ordered_json& params) const {
        params["distribution"] = distribution;
        params["mu"] = cfg.mu;
        params["dispersion"] = cfg.dispersion;
        params["zero_prop"] = cfg.zero_prop;
        params["effect_scale"] = cfg.effect_scale;
        params["effect_sizes"] = cfg.effect_sizes;
        params["continuous_gradient"] = cfg.continuous_gradient;
        params["n_signal"] = cfg.n_signal;
        params["n_null"] = cfg.n_null;
        params["n_locations"] = cfg.n_locations;
    }
};

// ---------------------------------------------------------------------------
// Metrics shared by eval and sweep

struct MetricOptions {
    double alpha = 0.05;
    std::optional<std::size_t> k;
    std::size_t n_boot = 1000;
    std::uint64_t seed = 0;
    int threads = 1;
};

/// Per-feature results of one method, aligned with `labels`.
struct Scored {
    std::string method;
    std::vector<std::string> names;
    std::vector<double> p;
    std::vector<double> q;
    std::vector<double> rank;
    Labels labels;
};

struct MetricRow {
    std::string metric;
    std::string method;
    double value = 0;
    std::optional<double> sd;
    std::string params;
};

std::vector<double> negated(const std::vector<double>& v) {
    std::vector<double> out(v.size());
    std::transform(v.begin(), v.end(), out.begin(), [](double x) { return -x; });
    return out;
}

std::vector<MetricRow> score_metric(const std::string& metric, const Scored& s, const MetricOptions& o) {
    const std::string boot = "n_boot=" + std::to_string(o.n_boot) + ";seed=" + std::to_string(o.seed);
    auto sd = [&](const Metric& m, std::span<const double> scores) -> std::optional<double> {
        if (o.n_boot == 0) return std::nullopt;
        return bootstrap_sd(m, scores, s.labels, o.n_boot, o.seed, o.threads);
    };
    std::vector<MetricRow> rows;
    if (metric == "auprc") {
        const auto scores = negated(s.p);
        const Metric m = [](std::span<const double> x, std::span<const char> l) { return auprc(x, l); };
        rows.push_back({"auprc", s.method, auprc(scores, s.labels), sd(m, scores), boot});
    } else if (metric == "sens-spec") {
        const double alpha = o.alpha;
        const auto both = sensitivity_specificity(s.q, s.labels, alpha);
        const Metric sens = [alpha](std::span<const double> q, std::span<const char> l) {
            return sensitivity_specificity(q, l, alpha).sensitivity;
        };
        const Metric spec = [alpha](std::span<const double> q, std::span<const char> l) {
            return sensitivity_specificity(q, l, alpha).specificity;
        };
        const std::string params = "alpha=" + fmt(alpha) + ";" + boot;
        rows.push_back({"sensitivity", s.method, both.sensitivity, sd(sens, s.q), params});
        rows.push_back({"specificity", s.method, both.specificity, sd(spec, s.q), params});
    } else if (metric == "topk") {
        const std::size_t k = *o.k;
        const auto scores = negated(s.rank);
        // ranks are distinct, so resampled duplicates only tie with themselves and names are irrelevant
        const Metric m = [k](std::span<const double> x, std::span<const char> l) {
            std::vector<std::string> names(x.size());
            for (std::size_t i = 0; i < names.size(); ++i) names[i] = std::to_string(i);
            return top_k_true_proportion(x, l, names, k);
        };
        rows.push_back({"topk", s.method, top_k_true_proportion(scores, s.labels, s.names, k), sd(m, scores),
                        "k=" + std::to_string(k) + ";" + boot});
    } else {
        throw UsageError("unknown metric '" + metric + "'");
    }
    return rows;
}

void check_metric_options(const std::vector<std::string>& metrics, const MetricOptions& o) {
    const bool topk = std::find(metrics.begin(), metrics.end(), "topk") != metrics.end();
    if (topk && !o.k) throw UsageError("--metric topk requires --k");
    if (o.k && *o.k == 0) throw UsageError("--k must be at least 1");
    if (!(o.alpha > 0 && o.alpha < 1)) throw UsageError("--alpha must lie in (0, 1)");
}

std::string format_optional(const std::optional<double>& v) { return v ? fmt(*v) : "NA"; }

// ---------------------------------------------------------------------------
// simulate

struct SimulateCommand {
    SimOptions sim;
    std::uint64_t seed = 0;
    std::optional<int> threads;
    std::string out;

    void add(CLI::App* app) {
        sim.add(app, true);
        app->add_option("--seed", seed, "Random seed")->capture_default_str();
        app->add_option("--threads", threads, "Worker threads (default: $TOPOSPAT_THREADS or all cores)");
        app->add_option("--out", out, "Output directory")->required();
    }

    void run(Manifest& manifest, std::ostream& log) {
        const int nthreads = resolve_threads(threads);
        const auto cfg = sim.resolve(sim.pattern, seed, nthreads);
        auto& params = manifest.parameters();
        params["pattern"] = sim.pattern;
        sim.record(params);
        manifest.set_seed(seed);

        const auto ds = manifest.stage("simulate", [&] { return simulate_dataset(cfg); });
        manifest.stage("write", [&] {
            save_dataset(ds, path_in(out, "counts.tsv"), path_in(out, "coords.tsv"));
            save_labels(ds, path_in(out, "labels.tsv"));
        });
        for (const char* f : {"counts.tsv", "coords.tsv", "labels.tsv"}) manifest.add_output(f);
        manifest.write(out);
        log << "wrote " << ds.features.size() << " features x " << ds.n_locations() << " locations to " << out << "\n";
    }
};

// ---------------------------------------------------------------------------
// test

struct TestCommand {
    std::string counts, coords, out;
    GraphOptions graph;
    TestOptions test;
    std::vector<std::string> exclude;
    bool no_qc = false;
    bool allow_raw = false;
    bool save_graph = false;
    QcOptions qc;
    double pseudo_count = 2;
    std::optional<int> threads;

    void add(CLI::App* app) {
        app->add_option("--counts", counts, "Counts matrix (features x locations)")->required();
        app->add_option("--coords", coords, "Coordinates table with columns id, x, y")->required();
        app->add_option("--out", out, "Output directory")->required();
        graph.add(app);
        test.add(app, true);
        app->add_option("--exclude-prefix", exclude, "Drop features whose name starts with this prefix (repeatable)");
        app->add_flag("--no-qc", no_qc, "Skip quality-control filters");
        app->add_option("--min-feature-total", qc.min_feature_total, "QC: minimum total count per feature")
            ->capture_default_str();
        app->add_option("--min-presence", qc.min_presence_fraction, "QC: minimum fraction of locations with a count")
            ->capture_default_str();
        app->add_option("--min-location-total", qc.min_location_total, "QC: minimum total count per location")
            ->capture_default_str();
        app->add_option("--pseudo-count", pseudo_count, "Shift of the log transform")->capture_default_str();
        app->add_flag("--allow-raw", allow_raw, "Skip the log transform and test raw values");
        app->add_flag("--save-graph", save_graph, "Also write graph_edges.tsv and graph.json");
        app->add_option("--threads", threads, "Worker threads (default: $TOPOSPAT_THREADS or all cores)");
    }

    void run(Manifest& manifest, std::ostream& log, std::ostream& err) {
        graph.check();
        const int nthreads = resolve_threads(threads);
        const auto cfg = test.config(test.method, nthreads);

        auto& params = manifest.parameters();
        params["method"] = test.method;
        test.record(params);
        graph.record(params);
        params["exclude_prefix"] = exclude;
        params["qc"] = no_qc ? ordered_json(nullptr)
                             : ordered_json{{"min_feature_total", qc.min_feature_total},
                                            {"min_presence", qc.min_presence_fraction},
                                            {"min_location_total", qc.min_location_total}};
        params["transform"] = allow_raw ? ordered_json(nullptr) : ordered_json{{"pseudo_count", pseudo_count}};
        manifest.set_seed(test.seed);

        auto ds = manifest.stage("ingest", [&] {
            manifest.add_input("counts", counts);
            manifest.add_input("coords", coords);
            auto d = load_dataset(counts, coords);
            if (!exclude.empty()) d = exclude_prefixes(d, exclude);
            return d;
        });
        if (!no_qc) ds = manifest.stage("qc", [&] { return qc_filter(ds, qc); });
        if (!allow_raw) ds = manifest.stage("transform", [&] { return shifted_log_transform(ds, pseudo_count); });
        const auto g = manifest.stage("graph", [&] { return graph.build(ds.locations); });
        for (const auto& w : g.warnings) err << "warning: " << w << "\n";
        const auto reports = manifest.stage("test", [&] { return run_battery(ds, g, cfg, allow_raw); });

        manifest.stage("write", [&] {
            text::write_file_atomic(path_in(out, "report.tsv"), format_reports(reports));
            ordered_json side;
            side["method"] = test.method;
            side["statistic"] = cfg.method == TestMethod::MoransI ? "observed Moran's I" : "distance from null mean";
            side["p"] = test.p;
            side["n_perm"] = test.n_perm;
            side["max_levels"] = test.max_levels;
            side["seed"] = test.seed;
            side["alpha"] = test.alpha;
            side["n_features"] = ds.features.size();
            side["n_locations"] = ds.n_locations();
            side["graph"] = describe_graph(g);
            side["metadata"] = ds.metadata;
            std::size_t failed = 0, significant = 0;
            for (const auto& r : reports) {
                failed += !r.ok();
                significant += r.ok() && r.q_value && *r.q_value <= test.alpha;
            }
            side["failed_features"] = failed;
            side["significant_features"] = significant;
            text::write_file_atomic(path_in(out, "report.json"), side.dump(2) + "\n");
            if (save_graph) save_graph_files(g);
        });
        manifest.add_output("report.tsv");
        manifest.add_output("report.json");
        if (save_graph) {
            manifest.add_output("graph_edges.tsv");
            manifest.add_output("graph.json");
        }
        manifest.write(out);
        log << "tested " << reports.size() << " features; report in " << path_in(out, "report.tsv") << "\n";
    }

    void save_graph_files(const SpatialGraph& g) const {
        topospat::save_graph(g, path_in(out, "graph_edges.tsv"), path_in(out, "graph.json"));
    }
};

// ---------------------------------------------------------------------------
// eval

/// A report TSV read back from disk.
struct ReportFile {
    std::string path;
    std::string method;
    std::vector<std::string> names;
    std::vector<double> p, q, rank;
};

ReportFile read_report(const std::string& path) {
    const auto contents = text::read_file(path);
    const auto lines = text::lines(contents);
    if (lines.empty()) throw ParseError("empty report '" + path + "'", 1, 1);
    const auto header = text::split(lines[0], '\t');
    auto column = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw ParseError("report '" + path + "' has no '" + name + "' column", 1, 1);
        return static_cast<std::size_t>(it - header.begin());
    };
    const auto c_feature = column("feature"), c_method = column("method"), c_p = column("p_value"),
               c_q = column("q_value"), c_rank = column("rank");
    ReportFile r;
    r.path = path;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cells = text::split(lines[i], '\t');
        if (cells.size() != header.size()) {
            throw ParseError("expected " + std::to_string(header.size()) + " fields in '" + path + "'", i + 1,
                             cells.size());
        }
        auto number = [&](std::size_t c, double fallback) {
            if (cells[c] == "NA") return fallback;
            double v = 0;
            if (!text::parse_double(cells[c], v)) {
                throw ParseError("non-numeric value '" + std::string(cells[c]) + "'", i + 1, c + 1);
            }
            return v;
        };
        const std::string method(cells[c_method]);
        if (r.method.empty()) r.method = method;
        if (method != r.method) throw ValidationError("report '" + path + "' mixes methods");
        r.names.emplace_back(cells[c_feature]);
        r.p.push_back(number(c_p, 1.0));
        r.q.push_back(number(c_q, 1.0));
        r.rank.push_back(number(c_rank, static_cast<double>(lines.size())));
    }
    return r;
}

/// Align a report with the labels; every feature must appear in both.
Scored join(const ReportFile& r, const std::map<std::string, bool>& labels, const std::string& labels_path) {
    std::vector<std::string> unlabelled, untested;
    std::set<std::string> seen;
    Scored s;
    s.method = r.method;
    for (std::size_t i = 0; i < r.names.size(); ++i) {
        seen.insert(r.names[i]);
        const auto it = labels.find(r.names[i]);
        if (it == labels.end()) {
            unlabelled.push_back(r.names[i]);
            continue;
        }
        s.names.push_back(r.names[i]);
        s.p.push_back(r.p[i]);
        s.q.push_back(r.q[i]);
        s.rank.push_back(r.rank[i]);
        s.labels.push_back(it->second ? 1 : 0);
    }
    for (const auto& [name, label] : labels) {
        if (!seen.count(name)) untested.push_back(name);
    }
    if (!unlabelled.empty() || !untested.empty()) {
        auto head = [](std::vector<std::string> v) {
            if (v.size() > 10) {
                const auto more = v.size() - 10;
                v.resize(10);
                v.push_back("... (" + std::to_string(more) + " more)");
            }
            return join(v, ", ");
        };
        std::string msg = "join error between '" + r.path + "' and '" + labels_path + "':";
        if (!unlabelled.empty()) msg += " features without labels: " + head(unlabelled) + ".";
        if (!untested.empty()) msg += " labelled features missing from the report: " + head(untested) + ".";
        throw ValidationError(msg);
    }
    return s;
}

std::map<std::string, double> feature_totals(const std::string& path) {
    const auto contents = text::read_file(path);
    const auto lines = text::lines(contents);
    if (lines.empty()) throw ParseError("empty counts file '" + path + "'", 1, 1);
    const char delim = text::detect_delimiter(lines[0]);
    std::map<std::string, double> totals;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cells = text::split(lines[i], delim);
        double total = 0;
        for (std::size_t c = 1; c < cells.size(); ++c) {
            double v = 0;
            if (!text::parse_double(cells[c], v)) {
                throw ParseError("non-numeric value '" + std::string(cells[c]) + "'", i + 1, c + 1);
            }
            total += v;
        }
        totals[std::string(cells[0])] = total;
    }
    return totals;
}

struct EvalCommand {
    std::vector<std::string> reports;
    std::string labels;
    std::vector<std::string> metrics{"auprc"};
    std::optional<std::string> counts;
    std::optional<std::string> out;
    MetricOptions metric;
    std::optional<int> threads;

    void add(CLI::App* app) {
        app->add_option("--report", reports, "Report TSV from `topospat test` (repeatable)")->required();
        app->add_option("--labels", labels, "Ground-truth labels TSV (feature, label)")->required();
        app->add_option("--metric", metrics, "Metric (repeatable)")
            ->check(CLI::IsMember({"auprc", "sens-spec", "topk", "spearman"}))
            ->capture_default_str();
        app->add_option("--alpha", metric.alpha, "q-value cut-off for sens-spec")->capture_default_str();
        app->add_option("--k", metric.k, "Number of top-ranked features for topk");
        app->add_option("--n-boot", metric.n_boot, "Bootstrap resamples for SDs (0 disables)")->capture_default_str();
        app->add_option("--seed", metric.seed, "Bootstrap seed")->capture_default_str();
        app->add_option("--counts", counts, "Counts matrix; adds Spearman correlation with total counts");
        app->add_option("--out", out, "Output directory (default: print the table)");
        app->add_option("--threads", threads, "Worker threads (default: $TOPOSPAT_THREADS or all cores)");
    }

    void run(Manifest& manifest, std::ostream& log) {
        check_metric_options(metrics, metric);
        const bool spearman_requested = std::find(metrics.begin(), metrics.end(), "spearman") != metrics.end();
        if (spearman_requested && reports.size() < 2 && !counts) {
            throw UsageError("--metric spearman needs two or more --report files or --counts");
        }
        metric.threads = resolve_threads(threads);

        auto& params = manifest.parameters();
        params["metrics"] = metrics;
        params["alpha"] = metric.alpha;
        params["k"] = metric.k ? ordered_json(*metric.k) : ordered_json(nullptr);
        params["n_boot"] = metric.n_boot;
        manifest.set_seed(metric.seed);

        std::vector<Scored> scored;
        manifest.stage("load", [&] {
            manifest.add_input("labels", labels);
            const auto truth = load_labels(labels);
            std::set<std::string> methods;
            for (const auto& path : reports) {
                manifest.add_input("report", path);
                auto s = join(read_report(path), truth, labels);
                if (!methods.insert(s.method).second) s.method = path;
                scored.push_back(std::move(s));
            }
            if (counts) manifest.add_input("counts", *counts);
        });

        std::vector<MetricRow> rows;
        manifest.stage("evaluate", [&] {
            for (const auto& m : metrics) {
                if (m == "spearman") continue;
                for (const auto& s : scored) {
                    for (auto& row : score_metric(m, s, metric)) rows.push_back(std::move(row));
                }
            }
            if (spearman_requested) add_spearman(scored, rows);
        });

        std::string table = "metric\tmethod\tvalue\tsd\tparams\n";
        for (const auto& r : rows) {
            table += r.metric + '\t' + r.method + '\t' + fmt(r.value) + '\t' + format_optional(r.sd) + '\t' +
                     (r.params.empty() ? "NA" : r.params) + '\n';
        }
        if (out) {
            text::write_file_atomic(path_in(*out, "eval.tsv"), table);
            manifest.add_output("eval.tsv");
            manifest.write(*out);
            log << "wrote " << rows.size() << " metric rows to " << path_in(*out, "eval.tsv") << "\n";
        } else {
            log << table;
        }
    }

    // Rank agreement between every pair of reports, and with total counts when given.
    void add_spearman(const std::vector<Scored>& scored, std::vector<MetricRow>& rows) const {
        auto rank_of = [](const Scored& s) {
            std::map<std::string, double> m;
            for (std::size_t i = 0; i < s.names.size(); ++i) m[s.names[i]] = -s.rank[i];
            return m;
        };
        for (std::size_t a = 0; a < scored.size(); ++a) {
            for (std::size_t b = a + 1; b < scored.size(); ++b) {
                const auto ra = rank_of(scored[a]), rb = rank_of(scored[b]);
                std::vector<double> x, y;
                for (const auto& [name, v] : ra) {
                    x.push_back(v);
                    y.push_back(rb.at(name));
                }
                rows.push_back({"spearman", scored[a].method + "~" + scored[b].method, spearman(x, y), std::nullopt, ""});
            }
        }
        if (!counts) return;
        const auto totals = feature_totals(*counts);
        for (const auto& s : scored) {
            std::vector<double> x, y;
            for (const auto& [name, v] : rank_of(s)) {
                const auto it = totals.find(name);
                if (it == totals.end()) throw ValidationError("feature '" + name + "' missing from '" + *counts + "'");
                x.push_back(v);
                y.push_back(it->second);
            }
            rows.push_back({"spearman", s.method + "~total_counts", spearman(x, y), std::nullopt, ""});
        }
    }
};

// ---------------------------------------------------------------------------
// sweep

struct SweepCommand {
    std::string axis;
    std::vector<double> values;
    std::vector<std::string> patterns{"clusters"};
    std::vector<std::string> methods{"betti"};
    std::vector<std::string> metrics{"auprc"};
    SimOptions sim;
    GraphOptions graph;
    TestOptions test;
    MetricOptions metric;
    std::optional<int> threads;
    std::string out;

    void add(CLI::App* app) {
        app->add_option("--axis", axis, "Parameter to vary")
            ->check(CLI::IsMember({"zero-prop", "effect-scale"}))
            ->required();
        app->add_option("--values", values, "Grid of axis values, comma separated")->delimiter(',')->required();
        app->add_option("--patterns", patterns, "Patterns, comma separated")
            ->delimiter(',')
            ->check(CLI::IsMember({"gradient", "cellring", "clusters", "streaks"}))
            ->capture_default_str();
        app->add_option("--methods", methods, "Test methods, comma separated")
            ->delimiter(',')
            ->check(CLI::IsMember({"betti", "landscape", "total", "moran"}))
            ->capture_default_str();
        app->add_option("--metrics", metrics, "Metrics, comma separated")
            ->delimiter(',')
            ->check(CLI::IsMember({"auprc", "sens-spec", "topk"}))
            ->capture_default_str();
        sim.add(app, false);
        graph.add(app);
        test.add(app, false);
        app->add_option("--k", metric.k, "Number of top-ranked features for topk");
        app->add_option("--n-boot", metric.n_boot, "Bootstrap resamples for SDs (0 disables)")->capture_default_str();
        app->add_option("--threads", threads, "Worker threads (default: $TOPOSPAT_THREADS or all cores)");
        app->add_option("--out", out, "Output directory")->required();
    }

    void run(Manifest& manifest, std::ostream& log) {
        graph.check();
        metric.alpha = test.alpha;
        metric.seed = test.seed;
        check_metric_options(metrics, metric);
        const int nthreads = resolve_threads(threads);
        metric.threads = nthreads;
        // validate every cell's configuration before spending time on any of them
        for (const auto& pat : patterns) {
            for (double v : values) config_for(pat, v, nthreads);
        }
        for (const auto& m : methods) test.config(m, nthreads);

        auto& params = manifest.parameters();
        params["axis"] = axis;
        params["values"] = values;
        params["patterns"] = patterns;
        params["methods"] = methods;
        params["metrics"] = metrics;
        sim.record(params);
        graph.record(params);
        test.record(params);
        params["k"] = metric.k ? ordered_json(*metric.k) : ordered_json(nullptr);
        params["n_boot"] = metric.n_boot;
        params["qc"] = nullptr;
        manifest.set_seed(test.seed);

        std::string table = "pattern\taxis\taxis_value\tmethod\tmetric\tvalue\tsd\tstatus\n";
        std::size_t rows = 0;
        auto emit = [&](const std::string& pat, double v, const std::string& method, const std::string& m,
                        std::optional<double> value, std::optional<double> sd, const std::string& status) {
            table += pat + '\t' + axis + '\t' + fmt(v) + '\t' + method + '\t' + m + '\t' + format_optional(value) + '\t' +
                     format_optional(sd) + '\t' + status + '\n';
            ++rows;
        };
        auto metric_names = [&](const std::string& m) {
            return m == "sens-spec" ? std::vector<std::string>{"sensitivity", "specificity"} : std::vector<std::string>{m};
        };

        manifest.stage("sweep", [&] {
            for (const auto& pat : patterns) {
                for (double v : values) {
                    // simulated data skips QC; the same seed for every cell isolates the effect of the axis
                    std::optional<Dataset> ds;
                    std::optional<SpatialGraph> g;
                    std::string cell_error;
                    try {
                        ds = shifted_log_transform(simulate_dataset(config_for(pat, v, nthreads)));
                        g = graph.build(ds->locations);
                    } catch (const std::exception& e) {
                        cell_error = std::string("error: ") + e.what();
                    }
                    for (const auto& method : methods) {
                        std::vector<MetricRow> cell;
                        std::string status = cell_error;
                        if (status.empty()) {
                            try {
                                const auto reports = run_battery(*ds, *g, test.config(method, nthreads));
                                const auto s = to_scored(method, *ds, reports);
                                for (const auto& m : metrics) {
                                    for (auto& row : score_metric(m, s, metric)) cell.push_back(std::move(row));
                                }
                            } catch (const std::exception& e) {
                                status = std::string("error: ") + e.what();
                                cell.clear();
                            }
                        }
                        if (status.empty()) {
                            for (const auto& r : cell) emit(pat, v, method, r.metric, r.value, r.sd, "ok");
                        } else {
                            for (const auto& m : metrics) {
                                for (const auto& name : metric_names(m)) emit(pat, v, method, name, std::nullopt, std::nullopt, status);
                            }
                        }
                        log << pat << " " << axis << "=" << fmt(v) << " " << method << ": " << (status.empty() ? "ok" : status)
                            << "\n";
                    }
                }
            }
        });
        text::write_file_atomic(path_in(out, "sweep.tsv"), table);
        manifest.add_output("sweep.tsv");
        manifest.write(out);
        log << "wrote " << rows << " rows to " << path_in(out, "sweep.tsv") << "\n";
    }

    SimConfig config_for(const std::string& pat, double v, int nthreads) const {
        SimOptions cell = sim;
        if (axis == "zero-prop") cell.cfg.zero_prop = v;
        else cell.cfg.effect_scale = v;
        return cell.resolve(pat, test.seed, nthreads);
    }

    static Scored to_scored(const std::string& method, const Dataset& ds, const std::vector<TestReport>& reports) {
        Scored s;
        s.method = method;
        for (std::size_t i = 0; i < reports.size(); ++i) {
            s.names.push_back(reports[i].feature_name);
            s.p.push_back(reports[i].p_value);
            s.q.push_back(reports[i].q_value.value_or(1.0));
            s.rank.push_back(static_cast<double>(reports[i].rank.value_or(reports.size())));
            s.labels.push_back(ds.features[i].label.value_or(false) ? 1 : 0);
        }
        return s;
    }
};

// ---------------------------------------------------------------------------
// diagram

struct DiagramCommand {
    std::string counts, coords, feature, out;
    GraphOptions graph;
    std::string p = "2";
    std::size_t max_levels = 5;
    bool allow_raw = false;
    double pseudo_count = 2;

    void add(CLI::App* app) {
        app->add_option("--counts", counts, "Counts matrix (features x locations)")->required();
        app->add_option("--coords", coords, "Coordinates table with columns id, x, y")->required();
        app->add_option("--feature", feature, "Feature to summarise")->required();
        app->add_option("--out", out, "Output directory")->required();
        graph.add(app);
        app->add_option("--p", p, "L^p order recorded with the curves")
            ->check(CLI::IsMember({"1", "2", "inf"}))
            ->capture_default_str();
        app->add_option("--max-levels", max_levels, "Landscape levels")->capture_default_str();
        app->add_option("--pseudo-count", pseudo_count, "Shift of the log transform")->capture_default_str();
        app->add_flag("--allow-raw", allow_raw, "Use raw values instead of log(value + pseudo count)");
    }

    void run(Manifest& manifest, std::ostream& log, std::ostream& err) {
        graph.check();
        if (max_levels < 1) throw UsageError("--max-levels must be at least 1");
        const auto order = parse_norm_order(p);
        auto& params = manifest.parameters();
        params["feature"] = feature;
        graph.record(params);
        params["p"] = p;
        params["max_levels"] = max_levels;
        params["transform"] = allow_raw ? ordered_json(nullptr) : ordered_json{{"pseudo_count", pseudo_count}};

        auto one = manifest.stage("ingest", [&] {
            manifest.add_input("counts", counts);
            manifest.add_input("coords", coords);
            auto ds = load_dataset(counts, coords);
            const auto it =
                std::find_if(ds.features.begin(), ds.features.end(), [&](const auto& f) { return f.name == feature; });
            if (it == ds.features.end()) throw ValidationError("feature '" + feature + "' not found in '" + counts + "'");
            auto picked = std::move(*it);
            ds.features = {std::move(picked)};
            return ds;
        });
        if (!allow_raw) one = shifted_log_transform(one, pseudo_count);
        const auto g = manifest.stage("graph", [&] { return graph.build(one.locations); });
        for (const auto& w : g.warnings) err << "warning: " << w << "\n";
        const auto d = manifest.stage("persistence", [&] { return superlevel_diagram(g, one.features[0].values); });
        manifest.stage("write", [&] {
            text::write_file_atomic(path_in(out, "diagram.tsv"), format_diagram(d));
            text::write_file_atomic(path_in(out, "betti.tsv"), format_step_curve(betti_curve(d), order));
            text::write_file_atomic(path_in(out, "landscape.tsv"), format_landscape(landscape(d, max_levels), order));
        });
        for (const char* f : {"diagram.tsv", "betti.tsv", "landscape.tsv"}) manifest.add_output(f);
        manifest.write(out);
        log << d.pairs.size() << " persistence pairs; total lifetime " << fmt(total_lifetime(d)) << "\n";
    }
};

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Spatially variable feature detection with persistent homology"};
    app.name("topospat");
    app.require_subcommand(1);
    app.set_version_flag("--version", TOPOSPAT_VERSION);

    SimulateCommand simulate;
    TestCommand test;
    EvalCommand eval;
    SweepCommand sweep;
    DiagramCommand diagram;
    auto* c_simulate = app.add_subcommand("simulate", "Simulate labelled spatial count data");
    auto* c_test = app.add_subcommand("test", "Permutation-test every feature of a dataset");
    auto* c_eval = app.add_subcommand("eval", "Score test reports against ground-truth labels");
    auto* c_sweep = app.add_subcommand("sweep", "Simulate, test and evaluate over a parameter grid");
    auto* c_diagram = app.add_subcommand("diagram", "Export the persistence diagram and curves of one feature");
    simulate.add(c_simulate);
    test.add(c_test);
    eval.add(c_eval);
    sweep.add(c_sweep);
    diagram.add(c_diagram);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    Manifest manifest(name);
    try {
        if (name == "simulate") simulate.run(manifest, out);
        else if (name == "test") test.run(manifest, out, err);
        else if (name == "eval") eval.run(manifest, out);
        else if (name == "sweep") sweep.run(manifest, out);
        else diagram.run(manifest, out, err);
    } catch (const UsageError& e) {
        err << "topospat " << name << ": " << e.what() << "\n";
        return kExitUsage;
    } catch (const ParameterError& e) {
        err << "topospat " << name << ": " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "topospat " << name << ": ";
        if (!manifest.current_stage().empty()) err << manifest.current_stage() << " stage failed: ";
        err << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}

} // namespace topospat::cli
