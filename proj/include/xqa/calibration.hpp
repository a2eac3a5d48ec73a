#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "xqa/metrics.hpp"

namespace xqa::calibration {

using metrics::ScoreVector;
using metrics::WeightVector;

// One regression sample: the four metric values of an answer and the human
// label. Labels are usually 0/1 verdicts; the fit itself accepts any real
// target, and accuracy treats label >= 0.5 as "correct".
struct Sample {
  ScoreVector scores;
  double label = 0.0;
  std::string group;  // optional grouping key (document id) for cross-validation
};

inline constexpr std::size_t kMinSamples = 5;
inline constexpr double kDefaultThreshold = 0.5;

struct FitReport {
  WeightVector weights;
  double r_squared = 0.0;
  double accuracy = 0.0;  // in-sample, threshold 0.5
  std::size_t sample_count = 0;
  std::string dataset_id;
  std::string model_id;
  // Largest |X^T r| over the design columns, r = y - X w.
  double max_residual_dot = 0.0;
  // Out-of-sample accuracy from k-fold cross-validation, when requested.
  std::optional<double> cv_accuracy;
  std::size_t cv_folds = 0;
};

// Ordinary least squares with intercept over [1, em, lev, f1, rge], solved by
// column-pivoted Householder QR. Throws UsageError("too few samples") below
// kMinSamples and DataError naming the collinear columns when the design
// matrix is rank deficient.
FitReport fit_weights(std::span<const Sample> samples, std::string dataset_id = {},
                      std::string model_id = {});

// intercept + sum(w_l * L_l), unclamped.
double predict_helpfulness(const ScoreVector& scores, const WeightVector& weights);

// Fraction of i with (predicted[i] >= threshold) == (verdicts[i] == 1).
double accuracy(std::span<const double> predicted, std::span<const int> verdicts,
                double threshold = kDefaultThreshold);

// Pooled held-out accuracy over k folds. Samples sharing a non-empty `group`
// stay in the same fold. Folds whose training part cannot be fitted are
// skipped; throws DataError when none can be fitted.
double cross_validated_accuracy(std::span<const Sample> samples, std::size_t k, std::uint64_t seed);

struct WeightRow {
  std::string dataset_id;
  std::string model_id;
  WeightVector weights;
  double r_squared = 0.0;
  double accuracy = 0.0;
};

struct PairDeviation {
  std::size_t first = 0;
  std::size_t second = 0;
  double max_abs_difference = 0.0;  // over the four metric weights
};

struct WeightComparison {
  std::vector<WeightRow> rows;
  std::vector<PairDeviation> deviations;
  double max_deviation = 0.0;
};

// Throws UsageError with fewer than two reports.
WeightComparison compare_weights(std::span<const FitReport> reports);

// CSV with columns dataset_id,model_id,w_em,w_lev,w_f1,w_rge,intercept,r_squared,accuracy.
std::string comparison_to_csv(const WeightComparison& cmp);

// Horizontal bar chart of the metric weights per row; negative weights extend
// to the left of the axis.
std::string render_weight_bars(const WeightComparison& cmp, int half_width = 20);

std::string fit_report_to_json(const FitReport& report);
std::string fit_reports_to_json(std::span<const FitReport> reports);

}  // namespace xqa::calibration
