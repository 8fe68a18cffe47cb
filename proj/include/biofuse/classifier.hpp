#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "biofuse/signal_model.hpp"

namespace biofuse {

/// Samples drawn from a table of windows. Each sample is `length`
/// consecutive windows ending at `ends[i]`; tabular data uses length 1.
/// The window table is shared between subsets.
struct SampleSet {
  std::shared_ptr<const Eigen::MatrixXd> windows;  // features x windows (one column per window)
  std::vector<Eigen::Index> ends;
  int length = 1;
  std::vector<int> labels;  // one per sample
  std::vector<int> trial_ids;

  Eigen::Index size() const { return static_cast<Eigen::Index>(ends.size()); }
  Eigen::Index feature_count() const { return windows ? windows->rows() : 0; }
  /// Window column for time step `t` of sample `i`.
  Eigen::Index column(Eigen::Index i, int t) const {
    return ends[static_cast<std::size_t>(i)] - (length - 1) + t;
  }
  SampleSet subset(std::span<const Eigen::Index> indices) const;
};

/// One sample per row.
SampleSet make_tabular(const FeatureMatrix& m);

/// Sequences of `length` consecutive windows (stride 1) that never cross a
/// trial boundary, labelled by their final window. Rows of one trial must be
/// contiguous and ordered by window start.
SampleSet make_sequences(const FeatureMatrix& m, int length);

/// Common contract: predict_proba rows are non-negative and sum to 1;
/// predict is the argmax with the lowest class id winning ties.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual std::string type() const = 0;
  /// Windows per sample this model consumes.
  virtual int sequence_length() const { return 1; }

  virtual void fit(const SampleSet& train, int class_count, std::uint64_t seed) = 0;
  virtual Eigen::MatrixXd predict_proba(const SampleSet& samples) const = 0;  // samples x classes
  std::vector<int> predict(const SampleSet& samples) const;

  int class_count() const { return class_count_; }

  virtual nlohmann::json hyperparameters() const = 0;
  virtual nlohmann::json parameters() const = 0;
  virtual void load(const nlohmann::json& hyperparameters, const nlohmann::json& parameters,
                    int class_count) = 0;

 protected:
  int class_count_ = 0;
};

std::vector<int> argmax_rows(const Eigen::MatrixXd& proba);

// ---------------------------------------------------------------------------

struct KnnConfig {
  int k = 5;
};

/// Brute-force Euclidean kNN. Probabilities are neighbour class frequencies;
/// a vote tie goes to the tied class holding the nearest neighbour, whose
/// probability is raised by 1e-9 so that argmax agrees with the vote.
class KnnClassifier final : public Classifier {
 public:
  explicit KnnClassifier(KnnConfig cfg = {}) : cfg_(cfg) {}

  std::string type() const override { return "knn"; }
  void fit(const SampleSet& train, int class_count, std::uint64_t seed) override;
  Eigen::MatrixXd predict_proba(const SampleSet& samples) const override;

  nlohmann::json hyperparameters() const override;
  nlohmann::json parameters() const override;
  void load(const nlohmann::json& hyperparameters, const nlohmann::json& parameters,
            int class_count) override;

 private:
  KnnConfig cfg_;
  Eigen::MatrixXd train_;  // features x points
  std::vector<int> labels_;
};

// ---------------------------------------------------------------------------

struct TrainingConfig {
  double learning_rate = 1e-2;
  double momentum = 0.9;
  int batch_size = 32;
  int max_epochs = 200;
  /// Stop after this many epochs without a new best validation loss.
  int patience = 20;
  /// A new best must undercut the previous one by more than this.
  double min_delta = 1e-3;
  /// Share of training trials held out for early stopping; falls back to
  /// samples when the set carries no trial ids.
  double validation_fraction = 0.1;
};

struct TrainingHistory {
  std::vector<double> train_loss;       // mean mini-batch loss per epoch
  std::vector<double> validation_loss;  // per epoch
  int best_epoch = 0;
};

/// Flat parameter storage. Aligned so that vectorized products sum in the
/// same order on every run.
using ParameterVector = std::vector<double, Eigen::aligned_allocator<double>>;

/// Network trained by mini-batch gradient descent with momentum on the
/// mean softmax cross-entropy. Parameters live in one flat vector.
class GradientClassifier : public Classifier {
 public:
  void fit(const SampleSet& train, int class_count, std::uint64_t seed) override;
  Eigen::MatrixXd predict_proba(const SampleSet& samples) const override;

  /// Allocates and initializes parameters for the given problem size.
  virtual void initialize(Eigen::Index feature_count, int class_count, std::uint64_t seed) = 0;

  /// Mean cross-entropy over `batch`; fills `gradient` (same layout as the
  /// parameters) when non-null.
  virtual double loss_and_gradient(const SampleSet& samples, std::span<const Eigen::Index> batch,
                                   ParameterVector* gradient) const = 0;

  /// Class probabilities (classes x batch) for the given samples.
  virtual Eigen::MatrixXd forward_proba(const SampleSet& samples,
                                        std::span<const Eigen::Index> batch) const = 0;

  const ParameterVector& flat_parameters() const { return params_; }
  void set_flat_parameters(ParameterVector p);
  const TrainingHistory& history() const { return history_; }
  const TrainingConfig& training() const { return training_; }

  nlohmann::json parameters() const override;

 protected:
  explicit GradientClassifier(TrainingConfig training) : training_(training) {}

  TrainingConfig training_;
  ParameterVector params_;
  TrainingHistory history_;
  Eigen::Index feature_count_ = 0;
};

struct MlpConfig {
  std::vector<int> hidden{64};
  TrainingConfig training{1e-2, 0.9, 32, 200, 20, 1e-3, 0.1};
};

/// Fully connected ReLU network with a softmax output layer.
class MlpClassifier final : public GradientClassifier {
 public:
  explicit MlpClassifier(MlpConfig cfg = {});

  std::string type() const override { return "mlp"; }
  void initialize(Eigen::Index feature_count, int class_count, std::uint64_t seed) override;
  double loss_and_gradient(const SampleSet& samples, std::span<const Eigen::Index> batch,
                           ParameterVector* gradient) const override;
  Eigen::MatrixXd forward_proba(const SampleSet& samples,
                                std::span<const Eigen::Index> batch) const override;

  nlohmann::json hyperparameters() const override;
  void load(const nlohmann::json& hyperparameters, const nlohmann::json& parameters,
            int class_count) override;

 private:
  struct Layer {
    Eigen::Index in = 0;
    Eigen::Index out = 0;
    std::size_t weight_offset = 0;  // out x in, column-major
    std::size_t bias_offset = 0;
  };
  void layout(Eigen::Index feature_count, int class_count);

  MlpConfig cfg_;
  std::vector<Layer> layers_;
};

struct LstmConfig {
  int hidden = 32;
  int sequence_length = 8;
  TrainingConfig training{5e-3, 0.9, 32, 200, 20, 1e-3, 0.1};
};

/// Single-layer LSTM over `sequence_length` windows; the final hidden state
/// feeds a softmax layer. Gate rows are ordered input, forget, cell, output.
class LstmClassifier final : public GradientClassifier {
 public:
  explicit LstmClassifier(LstmConfig cfg = {});

  std::string type() const override { return "lstm"; }
  int sequence_length() const override { return cfg_.sequence_length; }
  void initialize(Eigen::Index feature_count, int class_count, std::uint64_t seed) override;
  double loss_and_gradient(const SampleSet& samples, std::span<const Eigen::Index> batch,
                           ParameterVector* gradient) const override;
  Eigen::MatrixXd forward_proba(const SampleSet& samples,
                                std::span<const Eigen::Index> batch) const override;

  /// Cell states c_1..c_L (hidden x batch each) for inspection.
  std::vector<Eigen::MatrixXd> cell_states(const SampleSet& samples,
                                           std::span<const Eigen::Index> batch) const;

  nlohmann::json hyperparameters() const override;
  void load(const nlohmann::json& hyperparameters, const nlohmann::json& parameters,
            int class_count) override;

 private:
  struct Offsets {
    std::size_t wx = 0, wh = 0, b = 0, wy = 0, by = 0, total = 0;
  };
  Offsets offsets() const;

  LstmConfig cfg_;
};

// ---------------------------------------------------------------------------

struct ClassifierSpec {
  std::string type = "lstm";  // knn | mlp | lstm
  KnnConfig knn{};
  MlpConfig mlp{};
  LstmConfig lstm{};

  int sequence_length() const { return type == "lstm" ? lstm.sequence_length : 1; }
};

std::unique_ptr<Classifier> make_classifier(const ClassifierSpec& spec);

/// Builds the sample set a classifier of this spec consumes.
SampleSet make_samples(const FeatureMatrix& scaled, const ClassifierSpec& spec);

/// A fitted classifier bundled with the scaler and column order it expects.
struct TrainedModel {
  ClassifierSpec spec;
  std::vector<std::string> feature_names;
  Scaler scaler;
  std::shared_ptr<Classifier> classifier;

  /// Scales `m` (columns selected by name) and predicts.
  Eigen::MatrixXd predict_proba(const FeatureMatrix& m) const;
  SampleSet samples_for(const FeatureMatrix& m) const;
};

inline constexpr int kModelFormatVersion = 1;

TrainedModel train_model(const FeatureMatrix& train, const ClassifierSpec& spec, int class_count,
                         std::uint64_t seed);

nlohmann::json model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const nlohmann::json& doc);
void save_model(const std::filesystem::path& path, const TrainedModel& model);
TrainedModel load_model(const std::filesystem::path& path);

}  // namespace biofuse
