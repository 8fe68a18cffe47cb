#include "biofuse/cross_validation.hpp"

#include <algorithm>
#include <set>

#include "biofuse/errors.hpp"
#include "biofuse/random.hpp"

namespace biofuse {

namespace {

std::vector<Eigen::Index> rows_of(const FeatureMatrix& data, const std::set<int>& trials, bool inside) {
  std::vector<Eigen::Index> rows;
  for (Eigen::Index r = 0; r < data.row_count(); ++r) {
    const bool member = trials.count(data.trial_ids[static_cast<std::size_t>(r)]) > 0;
    if (member == inside) rows.push_back(r);
  }
  return rows;
}

}  // namespace

CrossValidationReport cross_validate(const ClassifierFactory& make, std::string classifier_name,
                                     const FeatureMatrix& data, const CvOptions& options,
                                     std::vector<FoldPredictions>* predictions) {
  data.validate();
  const auto folds = split_trials(data.distinct_trials(), options.folds, options.seed);
  if (predictions) predictions->clear();
  std::vector<ClassificationReport> reports;
  std::vector<std::string> warnings;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const std::set<int> test_trials(folds[f].begin(), folds[f].end());
    const auto train_rows = rows_of(data, test_trials, false);
    const auto test_rows = rows_of(data, test_trials, true);
    const FeatureMatrix train = data.select_rows(train_rows);
    const FeatureMatrix test = data.select_rows(test_rows);

    const std::set<int> train_classes(train.labels.begin(), train.labels.end());
    if (static_cast<int>(train_classes.size()) < options.class_count) {
      warnings.push_back("fold " + std::to_string(f) + ": training rows miss " +
                         std::to_string(options.class_count - static_cast<int>(train_classes.size())) +
                         " class(es)");
    }

    const Scaler scaler = Scaler::fit(train);
    auto clf = make();
    const int length = clf->sequence_length();
    const SampleSet train_samples = make_sequences(scaler.apply(train), length);
    const SampleSet test_samples = make_sequences(scaler.apply(test), length);
    if (train_samples.size() == 0 || test_samples.size() == 0) {
      throw DataError("fold " + std::to_string(f) + " has no complete sequences of length " +
                      std::to_string(length));
    }
    clf->fit(train_samples, options.class_count, derive_seed(options.seed, {0xCF, f}));
    Eigen::MatrixXd proba = clf->predict_proba(test_samples);
    const auto predicted = argmax_rows(proba);
    reports.push_back(report_metrics(confusion_matrix(test_samples.labels, predicted, options.class_count)));
    if (predictions) {
      predictions->push_back({folds[f], test_samples.trial_ids, test_samples.labels, std::move(proba)});
    }
  }
  auto out = summarize_folds(std::move(classifier_name), std::move(reports));
  out.warnings.insert(out.warnings.begin(), warnings.begin(), warnings.end());
  return out;
}

CrossValidationReport cross_validate(const ClassifierSpec& spec, const FeatureMatrix& data,
                                     const CvOptions& options, std::vector<FoldPredictions>* predictions) {
  make_classifier(spec);  // reject unknown types before any work
  return cross_validate([&spec] { return make_classifier(spec); }, spec.type, data, options, predictions);
}

}  // namespace biofuse
