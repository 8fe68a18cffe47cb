#include <cmath>
#include <stdexcept>

#include "biofuse/classifier.hpp"
#include "biofuse/errors.hpp"
#include "biofuse/random.hpp"
#include "training_json.hpp"

namespace biofuse {

using json = nlohmann::json;

namespace {

using MatMap = Eigen::Map<Eigen::MatrixXd>;
using ConstMatMap = Eigen::Map<const Eigen::MatrixXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

Eigen::MatrixXd gather(const SampleSet& s, std::span<const Eigen::Index> batch, int t) {
  Eigen::MatrixXd x(s.feature_count(), static_cast<Eigen::Index>(batch.size()));
  for (std::size_t j = 0; j < batch.size(); ++j) {
    x.col(static_cast<Eigen::Index>(j)) = s.windows->col(s.column(batch[j], t));
  }
  return x;
}

// Column-wise softmax in place.
void softmax_columns(Eigen::MatrixXd& z) {
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const double mx = z.col(j).maxCoeff();
    z.col(j) = (z.col(j).array() - mx).exp();
    z.col(j) /= z.col(j).sum();
  }
}

double cross_entropy(const Eigen::MatrixXd& logits, const SampleSet& s,
                     std::span<const Eigen::Index> batch) {
  double loss = 0.0;
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    const double mx = logits.col(j).maxCoeff();
    const double lse = mx + std::log((logits.col(j).array() - mx).exp().sum());
    loss += lse - logits(s.labels[static_cast<std::size_t>(batch[static_cast<std::size_t>(j)])], j);
  }
  return loss / static_cast<double>(logits.cols());
}

}  // namespace

MlpClassifier::MlpClassifier(MlpConfig cfg) : GradientClassifier(cfg.training), cfg_(std::move(cfg)) {
  for (int h : cfg_.hidden) {
    if (h < 1) throw ConfigError("MLP hidden layer sizes must be positive");
  }
}

void MlpClassifier::layout(Eigen::Index feature_count, int class_count) {
  layers_.clear();
  std::size_t offset = 0;
  Eigen::Index in = feature_count;
  std::vector<Eigen::Index> outs(cfg_.hidden.begin(), cfg_.hidden.end());
  outs.push_back(class_count);
  for (Eigen::Index out : outs) {
    Layer l;
    l.in = in;
    l.out = out;
    l.weight_offset = offset;
    offset += static_cast<std::size_t>(in * out);
    l.bias_offset = offset;
    offset += static_cast<std::size_t>(out);
    layers_.push_back(l);
    in = out;
  }
  params_.assign(offset, 0.0);
  feature_count_ = feature_count;
  class_count_ = class_count;
}

void MlpClassifier::initialize(Eigen::Index feature_count, int class_count, std::uint64_t seed) {
  layout(feature_count, class_count);
  Rng rng(seed);
  for (const Layer& l : layers_) {
    const double limit = std::sqrt(6.0 / static_cast<double>(l.in + l.out));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (Eigen::Index i = 0; i < l.in * l.out; ++i) params_[l.weight_offset + static_cast<std::size_t>(i)] = u(rng);
  }
}

Eigen::MatrixXd MlpClassifier::forward_proba(const SampleSet& samples,
                                             std::span<const Eigen::Index> batch) const {
  Eigen::MatrixXd a = gather(samples, batch, samples.length - 1);
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const Layer& l = layers_[k];
    ConstMatMap w(params_.data() + l.weight_offset, l.out, l.in);
    ConstVecMap b(params_.data() + l.bias_offset, l.out);
    Eigen::MatrixXd z = (w * a).colwise() + b;
    if (k + 1 < layers_.size()) z = z.cwiseMax(0.0);
    a = std::move(z);
  }
  softmax_columns(a);
  return a;
}

double MlpClassifier::loss_and_gradient(const SampleSet& samples, std::span<const Eigen::Index> batch,
                                        ParameterVector* gradient) const {
  std::vector<Eigen::MatrixXd> acts;
  acts.push_back(gather(samples, batch, samples.length - 1));
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const Layer& l = layers_[k];
    ConstMatMap w(params_.data() + l.weight_offset, l.out, l.in);
    ConstVecMap b(params_.data() + l.bias_offset, l.out);
    Eigen::MatrixXd z = (w * acts.back()).colwise() + b;
    if (k + 1 < layers_.size()) z = z.cwiseMax(0.0);
    acts.push_back(std::move(z));
  }
  const Eigen::MatrixXd& logits = acts.back();
  const double loss = cross_entropy(logits, samples, batch);
  if (!gradient) return loss;

  gradient->assign(params_.size(), 0.0);
  const auto bsz = static_cast<double>(batch.size());
  Eigen::MatrixXd delta = logits;
  softmax_columns(delta);
  for (std::size_t j = 0; j < batch.size(); ++j) {
    delta(samples.labels[static_cast<std::size_t>(batch[j])], static_cast<Eigen::Index>(j)) -= 1.0;
  }
  delta /= bsz;
  for (std::size_t k = layers_.size(); k-- > 0;) {
    const Layer& l = layers_[k];
    MatMap dw(gradient->data() + l.weight_offset, l.out, l.in);
    Eigen::Map<Eigen::VectorXd> db(gradient->data() + l.bias_offset, l.out);
    dw.noalias() = delta * acts[k].transpose();
    db = delta.rowwise().sum();
    if (k > 0) {
      ConstMatMap w(params_.data() + l.weight_offset, l.out, l.in);
      Eigen::MatrixXd back = w.transpose() * delta;
      // ReLU derivative from the stored post-activation.
      delta = (acts[k].array() > 0.0).select(back, 0.0);
    }
  }
  return loss;
}

json MlpClassifier::hyperparameters() const {
  return {{"hidden", cfg_.hidden},
          {"activation", "relu"},
          {"output", "softmax"},
          {"training", detail::training_to_json(cfg_.training)}};
}

void MlpClassifier::load(const json& hp, const json& params, int class_count) {
  cfg_.hidden = hp.at("hidden").get<std::vector<int>>();
  if (hp.contains("training")) cfg_.training = detail::training_from_json(hp.at("training"), cfg_.training);
  training_ = cfg_.training;
  const auto raw = params.at("values").get<std::vector<double>>();
  ParameterVector values(raw.begin(), raw.end());
  layout(params.at("feature_count").get<Eigen::Index>(), class_count);
  if (values.size() != params_.size()) throw DataError("MLP parameter count mismatch");
  params_ = std::move(values);
}

}  // namespace biofuse
