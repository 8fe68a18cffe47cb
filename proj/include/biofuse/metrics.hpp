#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace biofuse {

/// Confusion matrix rows are true classes, columns predicted classes.
using ConfusionMatrix = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;

ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> predicted,
                                 int class_count);

struct ClassificationReport {
  double accuracy = 0.0;
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> f1;
  std::vector<long long> support;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double micro_f1 = 0.0;
  ConfusionMatrix confusion;
  std::vector<std::string> warnings;
};

/// Precision, recall and F1 per class plus macro and micro averages.
/// Undefined ratios (no support, no predictions) are reported as 0 with a
/// warning.
ClassificationReport report_metrics(const ConfusionMatrix& confusion);

/// Summary statistics over cross-validation folds.
struct ScoreStats {
  double accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  double micro_precision = 0.0;
  double micro_recall = 0.0;
  double micro_f1 = 0.0;
};

struct CrossValidationReport {
  std::string classifier;
  std::vector<ClassificationReport> folds;
  ScoreStats mean;
  ScoreStats stddev;  // population std over folds
  ClassificationReport pooled;
  std::vector<std::string> warnings;
};

CrossValidationReport summarize_folds(std::string classifier,
                                      std::vector<ClassificationReport> folds);

/// `metric,mean,std` rows, then per-fold rows and the pooled confusion matrix.
void write_report_csv(const std::filesystem::path& path, const CrossValidationReport& report);
/// Reads back the summary rows written by write_report_csv.
CrossValidationReport read_report_csv(const std::filesystem::path& path);

/// One row per report: classifier, accuracy, precision, recall, F1 (macro)
/// and micro F1, each as mean over folds.
void write_summary_table_csv(const std::filesystem::path& path,
                             std::span<const CrossValidationReport> reports);

}  // namespace biofuse
