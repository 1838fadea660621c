#include "topospat/evaluate.hpp"

#include "topospat/error.hpp"
#include "topospat/parallel.hpp"
#include "topospat/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace topospat {

namespace {

void check_lengths(std::size_t a, std::size_t b) {
    if (a != b) {
        throw DimensionError("score and label vectors differ in length (" + std::to_string(a) + " vs " +
                             std::to_string(b) + ")");
    }
}

std::pair<std::size_t, std::size_t> class_counts(std::span<const char> labels) {
    std::size_t pos = 0;
    for (char l : labels) pos += (l != 0);
    return {pos, labels.size() - pos};
}

void require_both_classes(std::span<const char> labels) {
    const auto [pos, neg] = class_counts(labels);
    if (pos == 0 || neg == 0) {
        throw DegenerateError("metric needs at least one positive and one negative label");
    }
}

} // namespace

double auprc(std::span<const double> scores, std::span<const char> labels) {
    check_lengths(scores.size(), labels.size());
    require_both_classes(labels);
    const auto positives = class_counts(labels).first;

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });

    double area = 0;
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i, block_pos = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            block_pos += (labels[order[j]] != 0);
            ++j;
        }
        tp += block_pos;
        fp += (j - i) - block_pos;
        if (block_pos > 0) {
            const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
            area += precision * static_cast<double>(block_pos) / static_cast<double>(positives);
        }
        i = j;
    }
    return area;
}

SensSpec sensitivity_specificity(std::span<const double> q_values, std::span<const char> labels, double alpha) {
    check_lengths(q_values.size(), labels.size());
    require_both_classes(labels);
    std::size_t tp = 0, fn = 0, tn = 0, fp = 0;
    for (std::size_t i = 0; i < q_values.size(); ++i) {
        const bool called = q_values[i] <= alpha;
        if (labels[i]) {
            (called ? tp : fn)++;
        } else {
            (called ? fp : tn)++;
        }
    }
    return {static_cast<double>(tp) / static_cast<double>(tp + fn), static_cast<double>(tn) / static_cast<double>(tn + fp)};
}

double top_k_true_proportion(std::span<const double> scores, std::span<const char> labels,
                             std::span<const std::string> names, std::size_t k) {
    check_lengths(scores.size(), labels.size());
    check_lengths(scores.size(), names.size());
    if (k == 0) throw ParameterError("k must be at least 1");
    if (k > scores.size()) {
        throw ParameterError("k = " + std::to_string(k) + " exceeds the number of features (" +
                             std::to_string(scores.size()) + ")");
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](auto a, auto b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return names[a] < names[b];
    });
    std::size_t hits = 0;
    for (std::size_t i = 0; i < k; ++i) hits += (labels[order[i]] != 0);
    return static_cast<double>(hits) / static_cast<double>(k);
}

std::vector<double> average_ranks(std::span<const double> x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
    std::vector<double> ranks(x.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j < order.size() && x[order[j]] == x[order[i]]) ++j;
        const double mean_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t t = i; t < j; ++t) ranks[order[t]] = mean_rank;
        i = j;
    }
    return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
    check_lengths(x.size(), y.size());
    if (x.size() < 3) throw ParameterError("Spearman correlation needs at least 3 observations");
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0 || syy == 0) {
        throw DegenerateError("Spearman correlation is undefined for a constant vector");
    }
    return sxy / std::sqrt(sxx * syy);
}

double bootstrap_sd(const Metric& metric, std::span<const double> scores, std::span<const char> labels,
                    std::size_t n_boot, std::uint64_t seed, int threads) {
    check_lengths(scores.size(), labels.size());
    if (n_boot < 2) throw ParameterError("bootstrap needs at least 2 resamples");
    constexpr int kRetryCap = 100;
    const std::size_t n = scores.size();
    std::vector<double> values(n_boot);

    parallel_for(n_boot, threads, [&](std::size_t b) {
        std::vector<double> s(n);
        Labels l(n);
        for (int attempt = 0; attempt < kRetryCap; ++attempt) {
            SplitMix64 rng(derive_seed(seed, b, static_cast<std::uint64_t>(attempt)));
            for (std::size_t i = 0; i < n; ++i) {
                const auto j = uniform_below(rng, n);
                s[i] = scores[j];
                l[i] = labels[j];
            }
            try {
                values[b] = metric(s, l);
                return;
            } catch (const DegenerateError&) {
            }
        }
        throw DegenerateError("bootstrap resample " + std::to_string(b) + " failed " + std::to_string(kRetryCap) +
                              " consecutive times");
    });

    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n_boot);
    double ss = 0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(n_boot - 1));
}

} // namespace topospat
