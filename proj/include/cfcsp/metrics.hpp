#pragma once

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "cfcsp/error.hpp"

namespace cfcsp {

/// Rows are ground truth, columns are predictions. Truth entries of -1 mark
/// unannotated frames and are skipped; predictions must always be valid.
/// Matrices over the same class count merge by entrywise addition, so
/// per-video tallies can be evaluated in parallel and combined in any order.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes)
      : classes_(classes), counts_(classes * classes, 0) {
    if (classes == 0) {
      raise(errc::invalid_input, "confusion matrix needs at least one class");
    }
  }

  void add(int truth, int pred) {
    if (truth == -1) {
      check_pred(pred);
      return;  // unannotated frame: prediction exists but is not scored
    }
    if (truth < 0 || static_cast<std::size_t>(truth) >= classes_) {
      raise(errc::invalid_label,
            "truth label " + std::to_string(truth) + " out of range [-1, " +
                std::to_string(classes_) + ")");
    }
    check_pred(pred);
    ++counts_[static_cast<std::size_t>(truth) * classes_ +
              static_cast<std::size_t>(pred)];
    ++total_;
  }

  ConfusionMatrix& merge(const ConfusionMatrix& other) {
    if (other.classes_ != classes_) {
      raise(errc::alignment, "cannot merge confusion matrices of " +
                                 std::to_string(classes_) + " and " +
                                 std::to_string(other.classes_) + " classes");
    }
    for (std::size_t i = 0; i < counts_.size(); ++i) {
      counts_[i] += other.counts_[i];
    }
    total_ += other.total_;
    return *this;
  }

  std::uint64_t at(std::size_t truth, std::size_t pred) const {
    return counts_[truth * classes_ + pred];
  }
  std::size_t classes() const { return classes_; }
  std::uint64_t total() const { return total_; }

 private:
  void check_pred(int pred) const {
    if (pred < 0 || static_cast<std::size_t>(pred) >= classes_) {
      raise(errc::invalid_prediction,
            "prediction label " + std::to_string(pred) + " out of range [0, " +
                std::to_string(classes_) + ")");
    }
  }

  std::size_t classes_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
};

inline ConfusionMatrix confusion(std::span<const int> preds,
                                 std::span<const int> truths,
                                 std::size_t classes) {
  if (preds.size() != truths.size()) {
    raise(errc::alignment, "confusion: " + std::to_string(preds.size()) +
                               " predictions vs " +
                               std::to_string(truths.size()) + " truths");
  }
  ConfusionMatrix matrix(classes);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    matrix.add(truths[i], preds[i]);
  }
  return matrix;
}

/// Per-class precision/recall/F1 plus their unweighted macro means. A class
/// with no true and no predicted samples scores 0 and still counts in the
/// macro average (the class count stays fixed).
struct F1Report {
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> f1;
  std::vector<std::uint64_t> support;  // truth count per class
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
};

inline F1Report f1_report(const ConfusionMatrix& matrix) {
  const std::size_t k = matrix.classes();
  F1Report report;
  report.precision.resize(k);
  report.recall.resize(k);
  report.f1.resize(k);
  report.support.resize(k);
  for (std::size_t c = 0; c < k; ++c) {
    std::uint64_t tp = matrix.at(c, c);
    std::uint64_t row = 0, col = 0;
    for (std::size_t j = 0; j < k; ++j) {
      row += matrix.at(c, j);
      col += matrix.at(j, c);
    }
    const std::uint64_t fn = row - tp;
    const std::uint64_t fp = col - tp;
    report.support[c] = row;
    report.precision[c] =
        (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp)
                      : 0.0;
    report.recall[c] =
        (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn)
                      : 0.0;
    const std::uint64_t denom = 2 * tp + fp + fn;
    report.f1[c] = denom > 0
                       ? static_cast<double>(2 * tp) / static_cast<double>(denom)
                       : 0.0;
    report.macro_precision += report.precision[c];
    report.macro_recall += report.recall[c];
    report.macro_f1 += report.f1[c];
  }
  report.macro_precision /= static_cast<double>(k);
  report.macro_recall /= static_cast<double>(k);
  report.macro_f1 /= static_cast<double>(k);
  return report;
}

/// Fraction of adjacent frame pairs whose labels differ; 0 for a single
/// frame. A proxy for temporal stability of the prediction track.
inline double flip_rate(std::span<const int> labels) {
  if (labels.empty()) raise(errc::empty_input, "flip_rate: empty sequence");
  if (labels.size() == 1) return 0.0;
  std::size_t flips = 0;
  for (std::size_t i = 1; i < labels.size(); ++i) {
    if (labels[i] != labels[i - 1]) ++flips;
  }
  return static_cast<double>(flips) / static_cast<double>(labels.size() - 1);
}

namespace detail {
inline std::string fixed4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}
}  // namespace detail

/// CSV report: one row per class (name, precision, recall, f1, support) and
/// a final macro row whose support column is the total scored frame count.
inline void write_report_csv(std::ostream& os, const F1Report& report,
                             std::span<const std::string> class_names,
                             std::uint64_t total) {
  if (class_names.size() != report.f1.size()) {
    raise(errc::alignment, "report has " + std::to_string(report.f1.size()) +
                               " classes but " +
                               std::to_string(class_names.size()) + " names");
  }
  os << "class,precision,recall,f1,support\n";
  for (std::size_t c = 0; c < class_names.size(); ++c) {
    os << class_names[c] << ',' << detail::fixed4(report.precision[c]) << ','
       << detail::fixed4(report.recall[c]) << ',' << detail::fixed4(report.f1[c])
       << ',' << report.support[c] << '\n';
  }
  os << "macro," << detail::fixed4(report.macro_precision) << ','
     << detail::fixed4(report.macro_recall) << ','
     << detail::fixed4(report.macro_f1) << ',' << total << '\n';
}

}  // namespace cfcsp
