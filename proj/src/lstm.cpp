#include <cmath>
#include <stdexcept>

#include "biofuse/classifier.hpp"
#include "biofuse/errors.hpp"
#include "biofuse/random.hpp"
#include "training_json.hpp"

namespace biofuse {

using json = nlohmann::json;

namespace {

using ConstMatMap = Eigen::Map<const Eigen::MatrixXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

Eigen::MatrixXd gather(const SampleSet& s, std::span<const Eigen::Index> batch, int t) {
  Eigen::MatrixXd x(s.feature_count(), static_cast<Eigen::Index>(batch.size()));
  for (std::size_t j = 0; j < batch.size(); ++j) {
    x.col(static_cast<Eigen::Index>(j)) = s.windows->col(s.column(batch[j], t));
  }
  return x;
}

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) {
  return (1.0 + (-z.array()).exp()).inverse().matrix();
}

struct Trace {
  std::vector<Eigen::MatrixXd> x;                    // inputs, t = 0..L-1
  std::vector<Eigen::MatrixXd> i, f, g, o, tanh_c;   // gate activations, t = 0..L-1
  std::vector<Eigen::MatrixXd> c, h;                 // states, index 0 = initial
};

}  // namespace

LstmClassifier::LstmClassifier(LstmConfig cfg) : GradientClassifier(cfg.training), cfg_(cfg) {
  if (cfg_.sequence_length < 1) throw ConfigError("LSTM sequence length must be >= 1");
  if (cfg_.hidden < 1) throw ConfigError("LSTM hidden size must be >= 1");
}

LstmClassifier::Offsets LstmClassifier::offsets() const {
  const auto h = static_cast<std::size_t>(cfg_.hidden);
  const auto f = static_cast<std::size_t>(feature_count_);
  const auto c = static_cast<std::size_t>(class_count_);
  Offsets o;
  o.wx = 0;
  o.wh = o.wx + 4 * h * f;
  o.b = o.wh + 4 * h * h;
  o.wy = o.b + 4 * h;
  o.by = o.wy + c * h;
  o.total = o.by + c;
  return o;
}

void LstmClassifier::initialize(Eigen::Index feature_count, int class_count, std::uint64_t seed) {
  feature_count_ = feature_count;
  class_count_ = class_count;
  const Offsets off = offsets();
  params_.assign(off.total, 0.0);
  const auto h = static_cast<std::size_t>(cfg_.hidden);
  Rng rng(seed);
  auto fill = [&](std::size_t begin, std::size_t count, double fan_in, double fan_out) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (std::size_t k = 0; k < count; ++k) params_[begin + k] = u(rng);
  };
  const auto fd = static_cast<double>(feature_count);
  const auto hd = static_cast<double>(h);
  fill(off.wx, 4 * h * static_cast<std::size_t>(feature_count), fd, 4.0 * hd);
  fill(off.wh, 4 * h * h, hd, 4.0 * hd);
  fill(off.wy, static_cast<std::size_t>(class_count) * h, hd, static_cast<double>(class_count));
  for (std::size_t k = 0; k < h; ++k) params_[off.b + h + k] = 1.0;  // forget gate
}

namespace {

// Runs the recurrence; returns the logits (classes x batch).
Eigen::MatrixXd run_lstm(const ParameterVector& p, std::size_t wx_off, std::size_t wh_off,
                         std::size_t b_off, std::size_t wy_off, std::size_t by_off,
                         Eigen::Index features, Eigen::Index hidden, Eigen::Index classes,
                         const SampleSet& s, std::span<const Eigen::Index> batch, Trace& tr) {
  ConstMatMap wx(p.data() + wx_off, 4 * hidden, features);
  ConstMatMap wh(p.data() + wh_off, 4 * hidden, hidden);
  ConstVecMap b(p.data() + b_off, 4 * hidden);
  ConstMatMap wy(p.data() + wy_off, classes, hidden);
  ConstVecMap by(p.data() + by_off, classes);
  const auto n = static_cast<Eigen::Index>(batch.size());
  tr.c.assign(1, Eigen::MatrixXd::Zero(hidden, n));
  tr.h.assign(1, Eigen::MatrixXd::Zero(hidden, n));
  for (int t = 0; t < s.length; ++t) {
    tr.x.push_back(gather(s, batch, t));
    Eigen::MatrixXd z = wx * tr.x.back() + wh * tr.h.back();
    z.colwise() += b;
    tr.i.push_back(sigmoid(z.topRows(hidden)));
    tr.f.push_back(sigmoid(z.middleRows(hidden, hidden)));
    tr.g.push_back(z.middleRows(2 * hidden, hidden).array().tanh().matrix());
    tr.o.push_back(sigmoid(z.bottomRows(hidden)));
    tr.c.push_back(tr.f.back().cwiseProduct(tr.c.back()) + tr.i.back().cwiseProduct(tr.g.back()));
    tr.tanh_c.push_back(tr.c.back().array().tanh().matrix());
    tr.h.push_back(tr.o.back().cwiseProduct(tr.tanh_c.back()));
  }
  Eigen::MatrixXd logits = wy * tr.h.back();
  logits.colwise() += by;
  return logits;
}

}  // namespace

Eigen::MatrixXd LstmClassifier::forward_proba(const SampleSet& samples,
                                              std::span<const Eigen::Index> batch) const {
  if (samples.length != cfg_.sequence_length) {
    throw std::invalid_argument("sample length does not match LSTM sequence length");
  }
  const Offsets off = offsets();
  Trace tr;
  Eigen::MatrixXd z = run_lstm(params_, off.wx, off.wh, off.b, off.wy, off.by, feature_count_,
                               cfg_.hidden, class_count_, samples, batch, tr);
  for (Eigen::Index j = 0; j < z.cols(); ++j) {
    const double mx = z.col(j).maxCoeff();
    z.col(j) = (z.col(j).array() - mx).exp();
    z.col(j) /= z.col(j).sum();
  }
  return z;
}

std::vector<Eigen::MatrixXd> LstmClassifier::cell_states(const SampleSet& samples,
                                                         std::span<const Eigen::Index> batch) const {
  const Offsets off = offsets();
  Trace tr;
  run_lstm(params_, off.wx, off.wh, off.b, off.wy, off.by, feature_count_, cfg_.hidden,
           class_count_, samples, batch, tr);
  return std::vector<Eigen::MatrixXd>(tr.c.begin() + 1, tr.c.end());
}

double LstmClassifier::loss_and_gradient(const SampleSet& samples, std::span<const Eigen::Index> batch,
                                         ParameterVector* gradient) const {
  if (samples.length != cfg_.sequence_length) {
    throw std::invalid_argument("sample length does not match LSTM sequence length");
  }
  const Offsets off = offsets();
  const Eigen::Index hidden = cfg_.hidden;
  Trace tr;
  const Eigen::MatrixXd logits = run_lstm(params_, off.wx, off.wh, off.b, off.wy, off.by,
                                          feature_count_, hidden, class_count_, samples, batch, tr);
  const auto n = static_cast<Eigen::Index>(batch.size());
  Eigen::MatrixXd delta(logits.rows(), n);
  double loss = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double mx = logits.col(j).maxCoeff();
    Eigen::VectorXd e = (logits.col(j).array() - mx).exp();
    const double sum = e.sum();
    const int y = samples.labels[static_cast<std::size_t>(batch[static_cast<std::size_t>(j)])];
    loss += mx + std::log(sum) - logits(y, j);
    delta.col(j) = e / sum;
    delta(y, j) -= 1.0;
  }
  loss /= static_cast<double>(n);
  if (!gradient) return loss;

  delta /= static_cast<double>(n);
  gradient->assign(params_.size(), 0.0);
  Eigen::Map<Eigen::MatrixXd> dwx(gradient->data() + off.wx, 4 * hidden, feature_count_);
  Eigen::Map<Eigen::MatrixXd> dwh(gradient->data() + off.wh, 4 * hidden, hidden);
  Eigen::Map<Eigen::VectorXd> db(gradient->data() + off.b, 4 * hidden);
  Eigen::Map<Eigen::MatrixXd> dwy(gradient->data() + off.wy, class_count_, hidden);
  Eigen::Map<Eigen::VectorXd> dby(gradient->data() + off.by, class_count_);
  ConstMatMap wh(params_.data() + off.wh, 4 * hidden, hidden);
  ConstMatMap wy(params_.data() + off.wy, class_count_, hidden);

  dwy.noalias() = delta * tr.h.back().transpose();
  dby = delta.rowwise().sum();
  Eigen::MatrixXd dh = wy.transpose() * delta;
  Eigen::MatrixXd dc = Eigen::MatrixXd::Zero(hidden, n);
  Eigen::MatrixXd dz(4 * hidden, n);
  for (int t = samples.length - 1; t >= 0; --t) {
    const auto ts = static_cast<std::size_t>(t);
    const Eigen::ArrayXXd tc = tr.tanh_c[ts].array();
    const Eigen::ArrayXXd ig = tr.i[ts].array();
    const Eigen::ArrayXXd fg = tr.f[ts].array();
    const Eigen::ArrayXXd gg = tr.g[ts].array();
    const Eigen::ArrayXXd og = tr.o[ts].array();
    dc.array() += dh.array() * og * (1.0 - tc.square());
    dz.topRows(hidden) = (dc.array() * gg * ig * (1.0 - ig)).matrix();
    dz.middleRows(hidden, hidden) = (dc.array() * tr.c[ts].array() * fg * (1.0 - fg)).matrix();
    dz.middleRows(2 * hidden, hidden) = (dc.array() * ig * (1.0 - gg.square())).matrix();
    dz.bottomRows(hidden) = (dh.array() * tc * og * (1.0 - og)).matrix();
    dwx.noalias() += dz * tr.x[ts].transpose();
    dwh.noalias() += dz * tr.h[ts].transpose();
    db += dz.rowwise().sum();
    dh.noalias() = wh.transpose() * dz;
    dc.array() *= fg;
  }
  return loss;
}

json LstmClassifier::hyperparameters() const {
  return {{"hidden", cfg_.hidden},
          {"sequence_length", cfg_.sequence_length},
          {"layers", 1},
          {"training", detail::training_to_json(cfg_.training)}};
}

void LstmClassifier::load(const json& hp, const json& params, int class_count) {
  cfg_.hidden = hp.at("hidden").get<int>();
  cfg_.sequence_length = hp.at("sequence_length").get<int>();
  if (hp.contains("training")) cfg_.training = detail::training_from_json(hp.at("training"), cfg_.training);
  training_ = cfg_.training;
  feature_count_ = params.at("feature_count").get<Eigen::Index>();
  class_count_ = class_count;
  const auto raw = params.at("values").get<std::vector<double>>();
  ParameterVector values(raw.begin(), raw.end());
  if (values.size() != offsets().total) throw DataError("LSTM parameter count mismatch");
  params_ = std::move(values);
}

}  // namespace biofuse
