#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "biofuse/classifier.hpp"
#include "biofuse/errors.hpp"

namespace biofuse {

using json = nlohmann::json;

void KnnClassifier::fit(const SampleSet& train, int class_count, std::uint64_t /*seed*/) {
  if (cfg_.k < 1) throw ConfigError("kNN k must be >= 1");
  if (cfg_.k > train.size()) {
    throw std::invalid_argument("kNN k = " + std::to_string(cfg_.k) + " exceeds " +
                                std::to_string(train.size()) + " training points");
  }
  class_count_ = class_count;
  train_.resize(train.feature_count(), train.size());
  for (Eigen::Index i = 0; i < train.size(); ++i) {
    train_.col(i) = train.windows->col(train.column(i, train.length - 1));
  }
  labels_ = train.labels;
}

Eigen::MatrixXd KnnClassifier::predict_proba(const SampleSet& samples) const {
  if (labels_.empty()) throw std::logic_error("kNN used before fit");
  if (samples.feature_count() != train_.rows()) {
    throw std::invalid_argument("sample feature count differs from the fitted model");
  }
  const auto k = static_cast<std::size_t>(cfg_.k);
  const Eigen::Index n = train_.cols();
  Eigen::MatrixXd proba = Eigen::MatrixXd::Zero(samples.size(), class_count_);
  std::vector<double> dist(static_cast<std::size_t>(n));
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::vector<int> votes(static_cast<std::size_t>(class_count_));
  for (Eigen::Index q = 0; q < samples.size(); ++q) {
    const auto x = samples.windows->col(samples.column(q, samples.length - 1));
    for (Eigen::Index j = 0; j < n; ++j) {
      double d = 0.0;
      for (Eigen::Index f = 0; f < train_.rows(); ++f) {
        const double diff = train_(f, j) - x(f);
        d += diff * diff;
      }
      dist[static_cast<std::size_t>(j)] = d;
    }
    std::iota(idx.begin(), idx.end(), 0);
    const auto closer = [&](Eigen::Index a, Eigen::Index b) {
      const double da = dist[static_cast<std::size_t>(a)];
      const double db = dist[static_cast<std::size_t>(b)];
      return da < db || (da == db && a < b);
    };
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(), closer);
    std::fill(votes.begin(), votes.end(), 0);
    for (std::size_t i = 0; i < k; ++i) ++votes[static_cast<std::size_t>(labels_[static_cast<std::size_t>(idx[i])])];
    const int top = *std::max_element(votes.begin(), votes.end());
    int winner = -1;
    for (std::size_t i = 0; i < k && winner < 0; ++i) {
      const int c = labels_[static_cast<std::size_t>(idx[i])];
      if (votes[static_cast<std::size_t>(c)] == top) winner = c;
    }
    for (int c = 0; c < class_count_; ++c) {
      proba(q, c) = static_cast<double>(votes[static_cast<std::size_t>(c)]) / static_cast<double>(k);
    }
    proba(q, winner) += 1e-9;
    proba.row(q) /= proba.row(q).sum();
  }
  return proba;
}

json KnnClassifier::hyperparameters() const { return {{"k", cfg_.k}, {"metric", "euclidean"}}; }

json KnnClassifier::parameters() const {
  return {{"feature_count", train_.rows()},
          {"points", std::vector<double>(train_.data(), train_.data() + train_.size())},
          {"labels", labels_}};
}

void KnnClassifier::load(const json& hp, const json& params, int class_count) {
  cfg_.k = hp.at("k").get<int>();
  class_count_ = class_count;
  labels_ = params.at("labels").get<std::vector<int>>();
  const auto f = params.at("feature_count").get<Eigen::Index>();
  const auto pts = params.at("points").get<std::vector<double>>();
  if (f <= 0 || pts.size() != static_cast<std::size_t>(f) * labels_.size()) {
    throw DataError("kNN parameters have inconsistent sizes");
  }
  train_ = Eigen::Map<const Eigen::MatrixXd>(pts.data(), f, static_cast<Eigen::Index>(labels_.size()));
}

}  // namespace biofuse
