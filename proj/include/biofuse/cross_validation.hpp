#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "biofuse/classifier.hpp"
#include "biofuse/metrics.hpp"
#include "biofuse/signal_model.hpp"

namespace biofuse {

struct CvOptions {
  int folds = 10;
  std::uint64_t seed = 0;
  int class_count = kStageCount;
};

/// Test-fold output of one cross-validation fold.
struct FoldPredictions {
  std::vector<int> test_trials;
  std::vector<int> trial_ids;  // one per sample
  std::vector<int> labels;
  Eigen::MatrixXd proba;       // samples x classes
};

using ClassifierFactory = std::function<std::unique_ptr<Classifier>()>;

/// Trial-level k-fold cross-validation. Each fold fits a scaler on its
/// training rows only, trains a fresh classifier with a fold-derived seed
/// and scores the held-out trials.
CrossValidationReport cross_validate(const ClassifierFactory& make, std::string classifier_name,
                                     const FeatureMatrix& data, const CvOptions& options,
                                     std::vector<FoldPredictions>* predictions = nullptr);

CrossValidationReport cross_validate(const ClassifierSpec& spec, const FeatureMatrix& data,
                                     const CvOptions& options,
                                     std::vector<FoldPredictions>* predictions = nullptr);

}  // namespace biofuse
