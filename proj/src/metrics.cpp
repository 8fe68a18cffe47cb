#include "biofuse/metrics.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "biofuse/errors.hpp"

namespace biofuse {

ConfusionMatrix confusion_matrix(std::span<const int> truth, std::span<const int> predicted,
                                 int class_count) {
  if (truth.size() != predicted.size()) throw std::invalid_argument("confusion: size mismatch");
  ConfusionMatrix m = ConfusionMatrix::Zero(class_count, class_count);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= class_count || predicted[i] < 0 || predicted[i] >= class_count) {
      throw std::invalid_argument("confusion: label outside class range");
    }
    ++m(truth[i], predicted[i]);
  }
  return m;
}

namespace {

double ratio(long long num, long long den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

double harmonic(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

}  // namespace

ClassificationReport report_metrics(const ConfusionMatrix& confusion) {
  if (confusion.size() == 0) throw std::invalid_argument("report_metrics: empty confusion matrix");
  if (confusion.rows() != confusion.cols()) {
    throw std::invalid_argument("report_metrics: confusion matrix must be square");
  }
  if ((confusion.array() < 0).any()) {
    throw std::invalid_argument("report_metrics: negative counts");
  }
  ClassificationReport r;
  r.confusion = confusion;
  const Eigen::Index c = confusion.rows();
  const long long total = confusion.sum();
  long long tp_sum = 0;
  for (Eigen::Index k = 0; k < c; ++k) {
    const long long tp = confusion(k, k);
    const long long support = confusion.row(k).sum();
    const long long predicted = confusion.col(k).sum();
    tp_sum += tp;
    if (support == 0) r.warnings.push_back("class " + std::to_string(k) + " has no support; recall set to 0");
    if (predicted == 0) r.warnings.push_back("class " + std::to_string(k) + " never predicted; precision set to 0");
    r.precision.push_back(ratio(tp, predicted));
    r.recall.push_back(ratio(tp, support));
    r.f1.push_back(harmonic(r.precision.back(), r.recall.back()));
    r.support.push_back(support);
  }
  const auto cd = static_cast<double>(c);
  for (Eigen::Index k = 0; k < c; ++k) {
    r.macro_precision += r.precision[static_cast<std::size_t>(k)] / cd;
    r.macro_recall += r.recall[static_cast<std::size_t>(k)] / cd;
    r.macro_f1 += r.f1[static_cast<std::size_t>(k)] / cd;
  }
  // Pooled over classes, false positives and false negatives both equal the
  // off-diagonal total, so micro precision = micro recall = accuracy.
  r.accuracy = ratio(tp_sum, total);
  r.micro_precision = ratio(tp_sum, total);
  r.micro_recall = ratio(tp_sum, total);
  r.micro_f1 = harmonic(r.micro_precision, r.micro_recall);
  if (total == 0) r.warnings.push_back("empty confusion matrix: all metrics set to 0");
  return r;
}

CrossValidationReport summarize_folds(std::string classifier, std::vector<ClassificationReport> folds) {
  if (folds.empty()) throw std::invalid_argument("no folds to summarize");
  CrossValidationReport out;
  out.classifier = std::move(classifier);
  ConfusionMatrix pooled = ConfusionMatrix::Zero(folds.front().confusion.rows(), folds.front().confusion.cols());
  const auto n = static_cast<double>(folds.size());
  auto fields = [](ScoreStats& s) {
    return std::array<double*, 7>{&s.accuracy, &s.macro_precision, &s.macro_recall, &s.macro_f1,
                                  &s.micro_precision, &s.micro_recall, &s.micro_f1};
  };
  auto values = [](const ClassificationReport& r) {
    return std::array<double, 7>{r.accuracy, r.macro_precision, r.macro_recall, r.macro_f1,
                                 r.micro_precision, r.micro_recall, r.micro_f1};
  };
  auto mean = fields(out.mean);
  auto sd = fields(out.stddev);
  for (std::size_t f = 0; f < folds.size(); ++f) {
    pooled += folds[f].confusion;
    const auto v = values(folds[f]);
    for (std::size_t k = 0; k < v.size(); ++k) *mean[k] += v[k];
    for (const auto& w : folds[f].warnings) out.warnings.push_back("fold " + std::to_string(f) + ": " + w);
  }
  for (double* p : mean) *p /= n;
  for (const auto& fold : folds) {
    const auto v = values(fold);
    for (std::size_t k = 0; k < v.size(); ++k) *sd[k] += (v[k] - *mean[k]) * (v[k] - *mean[k]);
  }
  for (double* p : sd) *p = std::sqrt(*p / n);
  out.pooled = report_metrics(pooled);
  out.folds = std::move(folds);
  return out;
}

namespace {

std::string num(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

const std::array<const char*, 7> kMetricNames = {"accuracy",        "macro_precision", "macro_recall",
                                                 "macro_f1",        "micro_precision", "micro_recall",
                                                 "micro_f1"};

std::array<double, 7> stats_values(const ScoreStats& s) {
  return {s.accuracy, s.macro_precision, s.macro_recall, s.macro_f1, s.micro_precision, s.micro_recall, s.micro_f1};
}

}  // namespace

void write_report_csv(const std::filesystem::path& path, const CrossValidationReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "section,name,fold,value,std\n";
  out << "meta,classifier,," << report.classifier << ",\n";
  out << "meta,folds,," << report.folds.size() << ",\n";
  const auto mean = stats_values(report.mean);
  const auto sd = stats_values(report.stddev);
  for (std::size_t k = 0; k < kMetricNames.size(); ++k) {
    out << "summary," << kMetricNames[k] << ",," << num(mean[k]) << ',' << num(sd[k]) << '\n';
  }
  const auto& pooled = report.pooled;
  for (std::size_t c = 0; c < pooled.precision.size(); ++c) {
    out << "class,precision_" << c << ",," << num(pooled.precision[c]) << ",\n";
    out << "class,recall_" << c << ",," << num(pooled.recall[c]) << ",\n";
    out << "class,f1_" << c << ",," << num(pooled.f1[c]) << ",\n";
    out << "class,support_" << c << ",," << pooled.support[c] << ",\n";
  }
  for (std::size_t f = 0; f < report.folds.size(); ++f) {
    out << "fold,accuracy," << f << ',' << num(report.folds[f].accuracy) << ",\n";
    out << "fold,macro_f1," << f << ',' << num(report.folds[f].macro_f1) << ",\n";
  }
  for (Eigen::Index r = 0; r < pooled.confusion.rows(); ++r) {
    for (Eigen::Index c = 0; c < pooled.confusion.cols(); ++c) {
      out << "confusion," << r << "_" << c << ",," << pooled.confusion(r, c) << ",\n";
    }
  }
}

CrossValidationReport read_report_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "section,name,fold,value,std") throw DataError(path.string() + ": not a report file");
  CrossValidationReport report;
  auto mean = std::array<double*, 7>{&report.mean.accuracy, &report.mean.macro_precision,
                                     &report.mean.macro_recall, &report.mean.macro_f1,
                                     &report.mean.micro_precision, &report.mean.micro_recall,
                                     &report.mean.micro_f1};
  auto sd = std::array<double*, 7>{&report.stddev.accuracy, &report.stddev.macro_precision,
                                   &report.stddev.macro_recall, &report.stddev.macro_f1,
                                   &report.stddev.micro_precision, &report.stddev.micro_recall,
                                   &report.stddev.micro_f1};
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    while (cells.size() < 5) cells.emplace_back();
    if (cells[0] == "meta" && cells[1] == "classifier") report.classifier = cells[3];
    if (cells[0] != "summary") continue;
    for (std::size_t k = 0; k < kMetricNames.size(); ++k) {
      if (cells[1] == kMetricNames[k]) {
        *mean[k] = std::stod(cells[3]);
        *sd[k] = cells[4].empty() ? 0.0 : std::stod(cells[4]);
      }
    }
  }
  return report;
}

void write_summary_table_csv(const std::filesystem::path& path,
                             std::span<const CrossValidationReport> reports) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "classifier,accuracy,precision,recall,f1_score,micro_f1,accuracy_std\n";
  for (const auto& r : reports) {
    out << r.classifier << ',' << num(r.mean.accuracy) << ',' << num(r.mean.macro_precision) << ','
        << num(r.mean.macro_recall) << ',' << num(r.mean.macro_f1) << ',' << num(r.mean.micro_f1) << ','
        << num(r.stddev.accuracy) << '\n';
  }
}

}  // namespace biofuse
