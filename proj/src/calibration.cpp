#include "xqa/calibration.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "json_util.hpp"
#include "xqa/datamodel.hpp"
#include "xqa/error.hpp"
#include "xqa/format.hpp"

namespace xqa::calibration {
namespace {

constexpr std::size_t kColumns = 5;
constexpr const char* kColumnNames[kColumns] = {"intercept", "em", "lev", "f1", "rouge_l"};
// Pivots below this fraction of the largest one count as zero.
constexpr double kRankThreshold = 1e-10;

Eigen::MatrixXd design_matrix(std::span<const Sample> samples) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(kColumns));
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto v = samples[i].scores.values();
    const auto row = static_cast<Eigen::Index>(i);
    x(row, 0) = 1.0;
    for (std::size_t j = 0; j < metrics::kMetricCount; ++j) x(row, static_cast<Eigen::Index>(j + 1)) = v[j];
  }
  return x;
}

// Columns that lie in the span of the remaining ones.
std::vector<std::string> collinear_columns(const Eigen::MatrixXd& x) {
  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    Eigen::MatrixXd others(x.rows(), x.cols() - 1);
    for (Eigen::Index c = 0, k = 0; c < x.cols(); ++c) {
      if (c != j) others.col(k++) = x.col(c);
    }
    const Eigen::VectorXd target = x.col(j);
    const Eigen::VectorXd coef = others.colPivHouseholderQr().solve(target);
    const double residual = (target - others * coef).norm();
    if (residual <= 1e-8 * std::max(1.0, target.norm())) names.emplace_back(kColumnNames[j]);
  }
  return names;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : ", ") + p;
  return out;
}

bool is_positive(double label) { return label >= kDefaultThreshold; }

}  // namespace

FitReport fit_weights(std::span<const Sample> samples, std::string dataset_id, std::string model_id) {
  if (samples.size() < kMinSamples) {
    throw UsageError("too few samples: " + std::to_string(samples.size()) + " (need at least " +
                     std::to_string(kMinSamples) + ")");
  }
  const Eigen::MatrixXd x = design_matrix(samples);
  Eigen::VectorXd y(x.rows());
  for (std::size_t i = 0; i < samples.size(); ++i) y(static_cast<Eigen::Index>(i)) = samples[i].label;

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(kRankThreshold);
  if (qr.rank() < static_cast<Eigen::Index>(kColumns)) {
    auto names = collinear_columns(x);
    if (names.empty()) names.assign(std::begin(kColumnNames), std::end(kColumnNames));
    throw DataError("rank-deficient design matrix; collinear columns: " + join(names));
  }
  const Eigen::VectorXd w = qr.solve(y);
  const Eigen::VectorXd fitted = x * w;
  const Eigen::VectorXd residual = y - fitted;

  FitReport report;
  report.weights = WeightVector{w(1), w(2), w(3), w(4), w(0)};
  report.sample_count = samples.size();
  report.dataset_id = std::move(dataset_id);
  report.model_id = std::move(model_id);
  report.max_residual_dot = (x.transpose() * residual).cwiseAbs().maxCoeff();

  const double ss_res = residual.squaredNorm();
  const double ss_tot = (y.array() - y.mean()).matrix().squaredNorm();
  if (ss_tot > 0.0) {
    report.r_squared = 1.0 - ss_res / ss_tot;
  } else {
    // Constant target: a perfect fit explains everything there is.
    report.r_squared = ss_res <= 1e-20 * static_cast<double>(samples.size()) ? 1.0 : 0.0;
  }

  std::vector<double> predicted(fitted.data(), fitted.data() + fitted.size());
  std::vector<int> verdicts;
  verdicts.reserve(samples.size());
  for (const auto& s : samples) verdicts.push_back(is_positive(s.label) ? 1 : 0);
  report.accuracy = accuracy(predicted, verdicts);
  return report;
}

double predict_helpfulness(const ScoreVector& scores, const WeightVector& weights) {
  const auto w = weights.metric_weights();
  const auto v = scores.values();
  double out = weights.intercept;
  for (std::size_t i = 0; i < metrics::kMetricCount; ++i) out += w[i] * v[i];
  return out;
}

double accuracy(std::span<const double> predicted, std::span<const int> verdicts, double threshold) {
  if (predicted.size() != verdicts.size()) {
    throw UsageError("accuracy: " + std::to_string(predicted.size()) + " predictions vs " +
                     std::to_string(verdicts.size()) + " verdicts");
  }
  if (predicted.empty()) throw UsageError("accuracy: empty input");
  std::size_t agree = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if ((predicted[i] >= threshold) == (verdicts[i] == 1)) ++agree;
  }
  return static_cast<double>(agree) / static_cast<double>(predicted.size());
}

double cross_validated_accuracy(std::span<const Sample> samples, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw UsageError("cross-validation needs k >= 2");
  std::vector<std::string> groups;
  groups.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    groups.push_back(samples[i].group.empty() ? "#" + std::to_string(i) : samples[i].group);
  }
  // test_fraction only matters for k == 1.
  const auto plan = data::make_splits(groups, k, 0.2, seed);

  std::size_t tested = 0;
  std::size_t correct = 0;
  for (std::size_t fold = 0; fold < plan.fold_count(); ++fold) {
    std::vector<Sample> train;
    std::vector<double> predicted;
    std::vector<int> verdicts;
    std::vector<const Sample*> test;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (plan.fold_of.at(groups[i]) == fold) {
        test.push_back(&samples[i]);
      } else {
        train.push_back(samples[i]);
      }
    }
    FitReport fit;
    try {
      fit = fit_weights(train);
    } catch (const std::exception&) {
      continue;
    }
    for (const Sample* s : test) {
      const bool said_correct = predict_helpfulness(s->scores, fit.weights) >= kDefaultThreshold;
      if (said_correct == is_positive(s->label)) ++correct;
      ++tested;
    }
  }
  if (tested == 0) throw DataError("cross-validation: no fold could be fitted");
  return static_cast<double>(correct) / static_cast<double>(tested);
}

WeightComparison compare_weights(std::span<const FitReport> reports) {
  if (reports.size() < 2) throw UsageError("weight comparison needs at least two fit reports");
  WeightComparison cmp;
  for (const auto& r : reports) {
    cmp.rows.push_back({r.dataset_id, r.model_id, r.weights, r.r_squared, r.accuracy});
  }
  for (std::size_t i = 0; i < reports.size(); ++i) {
    for (std::size_t j = i + 1; j < reports.size(); ++j) {
      const auto a = reports[i].weights.metric_weights();
      const auto b = reports[j].weights.metric_weights();
      double dev = 0.0;
      for (std::size_t m = 0; m < metrics::kMetricCount; ++m) dev = std::max(dev, std::abs(a[m] - b[m]));
      cmp.deviations.push_back({i, j, dev});
      cmp.max_deviation = std::max(cmp.max_deviation, dev);
    }
  }
  return cmp;
}

std::string comparison_to_csv(const WeightComparison& cmp) {
  std::ostringstream out;
  out << "dataset_id,model_id,w_em,w_lev,w_f1,w_rge,intercept,r_squared,accuracy\n";
  for (const auto& row : cmp.rows) {
    out << csv_escape(row.dataset_id) << ',' << csv_escape(row.model_id) << ','
        << full_precision(row.weights.w_em) << ',' << full_precision(row.weights.w_lev) << ','
        << full_precision(row.weights.w_f1) << ',' << full_precision(row.weights.w_rge) << ','
        << full_precision(row.weights.intercept) << ',' << full_precision(row.r_squared) << ','
        << full_precision(row.accuracy) << '\n';
  }
  return out.str();
}

std::string render_weight_bars(const WeightComparison& cmp, int half_width) {
  double scale = 0.0;
  for (const auto& row : cmp.rows) {
    for (double w : row.weights.metric_weights()) scale = std::max(scale, std::abs(w));
  }
  constexpr const char* kLabels[metrics::kMetricCount] = {"em ", "lev", "f1 ", "rge"};
  std::ostringstream out;
  for (const auto& row : cmp.rows) {
    out << row.dataset_id << " / " << row.model_id << '\n';
    const auto w = row.weights.metric_weights();
    for (std::size_t m = 0; m < metrics::kMetricCount; ++m) {
      const int len = scale > 0.0 ? static_cast<int>(std::lround(std::abs(w[m]) / scale * half_width)) : 0;
      const std::string left = w[m] < 0 ? std::string(half_width - len, ' ') + std::string(len, '#')
                                        : std::string(half_width, ' ');
      const std::string right = w[m] > 0 ? std::string(len, '#') + std::string(half_width - len, ' ')
                                         : std::string(half_width, ' ');
      out << "  " << kLabels[m] << ' ' << left << '|' << right << ' ' << fixed(w[m], 3) << '\n';
    }
  }
  if (!cmp.deviations.empty()) out << "max weight deviation: " << fixed(cmp.max_deviation, 3) << '\n';
  return out.str();
}

namespace {

detail::Json report_json(const FitReport& r) {
  detail::Json j{
      {"dataset_id", r.dataset_id},
      {"model_id", r.model_id},
      {"weights",
       {{"w_em", r.weights.w_em},
        {"w_lev", r.weights.w_lev},
        {"w_f1", r.weights.w_f1},
        {"w_rge", r.weights.w_rge},
        {"intercept", r.weights.intercept}}},
      {"r_squared", r.r_squared},
      {"accuracy", r.accuracy},
      {"sample_count", r.sample_count},
      {"max_residual_dot", r.max_residual_dot},
  };
  if (r.cv_accuracy) {
    j["cv_accuracy"] = *r.cv_accuracy;
    j["cv_folds"] = r.cv_folds;
  }
  return j;
}

}  // namespace

std::string fit_report_to_json(const FitReport& report) { return report_json(report).dump(2) + "\n"; }

std::string fit_reports_to_json(std::span<const FitReport> reports) {
  detail::Json arr = detail::Json::array();
  for (const auto& r : reports) arr.push_back(report_json(r));
  return arr.dump(2) + "\n";
}

}  // namespace xqa::calibration
