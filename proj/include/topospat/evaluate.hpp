#ifndef TOPOSPAT_EVALUATE_HPP
#define TOPOSPAT_EVALUATE_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

/**
 * @file evaluate.hpp
 *
 * @brief Detection metrics against ground-truth labels.
 *
 * Scores follow the convention "larger = more spatially variable"; callers
 * holding p-values pass their negation. Labels are stored as `char` so that
 * resampled copies are cheap.
 */

namespace topospat {

using Labels = std::vector<char>;

/**
 * Average precision: sweep the threshold over distinct scores from high to
 * low; tied scores enter as one block. Throws `DegenerateError` unless both
 * classes are present.
 */
double auprc(std::span<const double> scores, std::span<const char> labels);

struct SensSpec {
    double sensitivity = 0;
    double specificity = 0;
};

/// Positive calls are q <= alpha.
SensSpec sensitivity_specificity(std::span<const double> q_values, std::span<const char> labels, double alpha = 0.05);

/// Fraction of true labels among the k highest scores (ties: name ascending).
double top_k_true_proportion(std::span<const double> scores, std::span<const char> labels,
                             std::span<const std::string> names, std::size_t k);

/// Average ranks (1-based), ties share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> x);

/// Pearson correlation of the average-rank vectors.
double spearman(std::span<const double> x, std::span<const double> y);

/// A metric of (scores, labels) evaluated on bootstrap resamples.
using Metric = std::function<double(std::span<const double>, std::span<const char>)>;

/**
 * Standard deviation of `metric` over `n_boot` resamples of the features with
 * replacement. A resample on which the metric throws `DegenerateError` is
 * redrawn; 100 consecutive failures raise `DegenerateError`.
 */
double bootstrap_sd(const Metric& metric, std::span<const double> scores, std::span<const char> labels,
                    std::size_t n_boot = 1000, std::uint64_t seed = 0, int threads = 1);

} // namespace topospat

#endif
