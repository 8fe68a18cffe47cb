#include "biofuse/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "biofuse/errors.hpp"
#include "biofuse/random.hpp"

namespace biofuse {

using json = nlohmann::json;

SampleSet SampleSet::subset(std::span<const Eigen::Index> indices) const {
  SampleSet out;
  out.windows = windows;
  out.length = length;
  out.ends.reserve(indices.size());
  for (auto i : indices) {
    out.ends.push_back(ends[static_cast<std::size_t>(i)]);
    if (!labels.empty()) out.labels.push_back(labels[static_cast<std::size_t>(i)]);
    if (!trial_ids.empty()) out.trial_ids.push_back(trial_ids[static_cast<std::size_t>(i)]);
  }
  return out;
}

SampleSet make_tabular(const FeatureMatrix& m) { return make_sequences(m, 1); }

SampleSet make_sequences(const FeatureMatrix& m, int length) {
  if (length < 1) throw std::invalid_argument("sequence length must be >= 1");
  SampleSet s;
  s.length = length;
  s.windows = std::make_shared<const Eigen::MatrixXd>(m.rows.transpose());
  const auto n = static_cast<std::size_t>(m.row_count());
  std::size_t run = 0;  // consecutive rows of the current trial ending here
  for (std::size_t r = 0; r < n; ++r) {
    const bool continues = r > 0 && m.trial_ids[r] == m.trial_ids[r - 1] &&
                           m.window_starts[r] > m.window_starts[r - 1];
    run = continues ? run + 1 : 1;
    if (run >= static_cast<std::size_t>(length)) {
      s.ends.push_back(static_cast<Eigen::Index>(r));
      s.labels.push_back(m.labels[r]);
      s.trial_ids.push_back(m.trial_ids[r]);
    }
  }
  return s;
}

std::vector<int> argmax_rows(const Eigen::MatrixXd& proba) {
  std::vector<int> out(static_cast<std::size_t>(proba.rows()));
  for (Eigen::Index r = 0; r < proba.rows(); ++r) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < proba.cols(); ++c) {
      if (proba(r, c) > proba(r, best)) best = c;
    }
    out[static_cast<std::size_t>(r)] = static_cast<int>(best);
  }
  return out;
}

std::vector<int> Classifier::predict(const SampleSet& samples) const {
  return argmax_rows(predict_proba(samples));
}

// ---------------------------------------------------------------------------

void GradientClassifier::set_flat_parameters(ParameterVector p) {
  if (p.size() != params_.size()) throw std::invalid_argument("parameter vector size mismatch");
  params_ = std::move(p);
}

json GradientClassifier::parameters() const {
  return json{{"feature_count", feature_count_},
              {"values", std::vector<double>(params_.begin(), params_.end())}};
}

void GradientClassifier::fit(const SampleSet& train, int class_count, std::uint64_t seed) {
  if (train.size() == 0) throw std::invalid_argument("cannot fit on zero samples");
  if (train.length != sequence_length()) {
    throw std::invalid_argument("sample length does not match the model's sequence length");
  }
  for (int l : train.labels) {
    if (l < 0 || l >= class_count) throw std::invalid_argument("label outside class range");
  }
  const TrainingConfig& tc = training_;
  if (tc.batch_size < 1 || tc.max_epochs < 1 || !(tc.learning_rate > 0.0)) {
    throw ConfigError("invalid training configuration");
  }
  class_count_ = class_count;
  feature_count_ = train.feature_count();
  initialize(feature_count_, class_count, derive_seed(seed, {0x1417}));
  history_ = {};

  Rng rng = make_rng(seed, {0x5A3});
  std::vector<Eigen::Index> validation;
  std::vector<Eigen::Index> fit_rows;
  std::vector<int> trials(train.trial_ids.begin(), train.trial_ids.end());
  std::sort(trials.begin(), trials.end());
  trials.erase(std::unique(trials.begin(), trials.end()), trials.end());
  if (trials.size() >= 2 && train.trial_ids.size() == static_cast<std::size_t>(train.size())) {
    // Hold out whole trials: windows of one trial are strongly correlated.
    std::shuffle(trials.begin(), trials.end(), rng);
    auto held = static_cast<std::size_t>(std::floor(tc.validation_fraction * static_cast<double>(trials.size())));
    if (tc.validation_fraction > 0.0) held = std::clamp<std::size_t>(held, 1, trials.size() - 1);
    const std::set<int> held_trials(trials.begin(), trials.begin() + static_cast<std::ptrdiff_t>(held));
    for (Eigen::Index i = 0; i < train.size(); ++i) {
      (held_trials.count(train.trial_ids[static_cast<std::size_t>(i)]) ? validation : fit_rows).push_back(i);
    }
  } else {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(train.size()));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    auto held = static_cast<std::size_t>(std::floor(tc.validation_fraction * static_cast<double>(order.size())));
    if (held >= order.size()) held = 0;
    validation.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(held));
    fit_rows.assign(order.begin() + static_cast<std::ptrdiff_t>(held), order.end());
  }

  std::vector<double> velocity(params_.size(), 0.0);
  ParameterVector grad;
  ParameterVector best = params_;
  double best_loss = std::numeric_limits<double>::infinity();
  int stale = 0;
  const auto batch = static_cast<std::size_t>(tc.batch_size);

  for (int epoch = 0; epoch < tc.max_epochs; ++epoch) {
    std::shuffle(fit_rows.begin(), fit_rows.end(), rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < fit_rows.size(); start += batch) {
      const std::size_t len = std::min(batch, fit_rows.size() - start);
      const std::span<const Eigen::Index> idx(fit_rows.data() + start, len);
      const double loss = loss_and_gradient(train, idx, &grad);
      if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << type() << " training diverged: non-finite loss at epoch " << epoch << ", batch "
            << batches << " (learning rate " << tc.learning_rate << ")";
        throw TrainingError(msg.str());
      }
      for (std::size_t i = 0; i < params_.size(); ++i) {
        velocity[i] = tc.momentum * velocity[i] - tc.learning_rate * grad[i];
        params_[i] += velocity[i];
      }
      loss_sum += loss;
      ++batches;
    }
    history_.train_loss.push_back(loss_sum / static_cast<double>(batches));
    const double val = validation.empty() ? history_.train_loss.back()
                                          : loss_and_gradient(train, validation, nullptr);
    history_.validation_loss.push_back(val);
    if (!std::isfinite(val)) {
      throw TrainingError(type() + " training diverged: non-finite validation loss at epoch " +
                          std::to_string(epoch));
    }
    if (val < best_loss - tc.min_delta) {
      best_loss = val;
      best = params_;
      history_.best_epoch = epoch;
      stale = 0;
    } else if (++stale >= tc.patience) {
      break;
    }
  }
  params_ = std::move(best);
}

Eigen::MatrixXd GradientClassifier::predict_proba(const SampleSet& samples) const {
  if (samples.feature_count() != feature_count_) {
    throw std::invalid_argument("sample feature count differs from the fitted model");
  }
  Eigen::MatrixXd out(samples.size(), class_count_);
  constexpr Eigen::Index kChunk = 512;
  std::vector<Eigen::Index> idx;
  for (Eigen::Index start = 0; start < samples.size(); start += kChunk) {
    const Eigen::Index len = std::min(kChunk, samples.size() - start);
    idx.resize(static_cast<std::size_t>(len));
    std::iota(idx.begin(), idx.end(), start);
    out.middleRows(start, len) = forward_proba(samples, idx).transpose();
  }
  return out;
}

// ---------------------------------------------------------------------------

std::unique_ptr<Classifier> make_classifier(const ClassifierSpec& spec) {
  if (spec.type == "knn") return std::make_unique<KnnClassifier>(spec.knn);
  if (spec.type == "mlp") return std::make_unique<MlpClassifier>(spec.mlp);
  if (spec.type == "lstm") return std::make_unique<LstmClassifier>(spec.lstm);
  throw ConfigError("unknown classifier type '" + spec.type + "' (expected knn, mlp or lstm)");
}

SampleSet make_samples(const FeatureMatrix& scaled, const ClassifierSpec& spec) {
  return make_sequences(scaled, spec.sequence_length());
}

SampleSet TrainedModel::samples_for(const FeatureMatrix& m) const {
  return make_samples(scaler.apply(m.select_columns(feature_names)), spec);
}

Eigen::MatrixXd TrainedModel::predict_proba(const FeatureMatrix& m) const {
  return classifier->predict_proba(samples_for(m));
}

TrainedModel train_model(const FeatureMatrix& train, const ClassifierSpec& spec, int class_count,
                         std::uint64_t seed) {
  TrainedModel model;
  model.spec = spec;
  model.feature_names = train.feature_names;
  model.scaler = Scaler::fit(train);
  auto clf = make_classifier(spec);
  clf->fit(make_samples(model.scaler.apply(train), spec), class_count, seed);
  model.classifier = std::move(clf);
  return model;
}

json model_to_json(const TrainedModel& model) {
  json doc;
  doc["format"] = "biofuse-model";
  doc["format_version"] = kModelFormatVersion;
  doc["model_type"] = model.classifier->type();
  doc["class_count"] = model.classifier->class_count();
  doc["hyperparameters"] = model.classifier->hyperparameters();
  doc["parameters"] = model.classifier->parameters();
  doc["feature_names"] = model.feature_names;
  doc["scaler"] = {{"mean", std::vector<double>(model.scaler.mean().begin(), model.scaler.mean().end())},
                   {"std", std::vector<double>(model.scaler.stddev().begin(), model.scaler.stddev().end())}};
  return doc;
}

TrainedModel model_from_json(const json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "biofuse-model") throw DataError("not a model file");
    const int version = doc.at("format_version").get<int>();
    if (version != kModelFormatVersion) {
      throw DataError("unsupported model format version " + std::to_string(version));
    }
    TrainedModel model;
    model.spec.type = doc.at("model_type").get<std::string>();
    model.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
    const auto mean = doc.at("scaler").at("mean").get<std::vector<double>>();
    const auto sd = doc.at("scaler").at("std").get<std::vector<double>>();
    model.scaler = Scaler(model.feature_names, Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size())),
                          Eigen::Map<const Eigen::VectorXd>(sd.data(), static_cast<Eigen::Index>(sd.size())));
    auto clf = make_classifier(model.spec);
    clf->load(doc.at("hyperparameters"), doc.at("parameters"), doc.at("class_count").get<int>());
    const json& hp = doc.at("hyperparameters");
    if (model.spec.type == "lstm") model.spec.lstm.sequence_length = hp.at("sequence_length").get<int>();
    if (model.spec.type == "knn") model.spec.knn.k = hp.at("k").get<int>();
    if (model.spec.type == "mlp") model.spec.mlp.hidden = hp.at("hidden").get<std::vector<int>>();
    model.classifier = std::move(clf);
    return model;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model document: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const TrainedModel& model) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << model_to_json(model).dump(1) << '\n';
}

TrainedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return model_from_json(doc);
}

}  // namespace biofuse
