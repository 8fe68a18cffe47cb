#include "biofuse/random_forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "biofuse/random.hpp"

namespace biofuse {

namespace {

double gini(std::span<const double> counts, double total) {
  if (total <= 0.0) return 0.0;
  double s = 0.0;
  for (double c : counts) s += c * c;
  return 1.0 - s / (total * total);
}

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& x, std::span<const int> labels, int classes,
              const ForestConfig& cfg, Rng& rng, std::vector<double>& importance)
      : x_(x), labels_(labels), classes_(classes), cfg_(cfg), rng_(rng), importance_(importance) {
    const auto f = static_cast<int>(x.cols());
    mtry_ = std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(f)))));
    features_.resize(static_cast<std::size_t>(f));
    std::iota(features_.begin(), features_.end(), 0);
  }

  bool grow(std::vector<Eigen::Index> rows, std::vector<Eigen::Index> oob) {
    total_ = static_cast<double>(cfg_.out_of_bag ? oob.size() : rows.size());
    split_any_ = false;
    node(rows, oob, 0);
    return split_any_;
  }

 private:
  double oob_gain(std::span<const Eigen::Index> oob, int feature, double threshold) const {
    const auto k = static_cast<std::size_t>(classes_);
    std::vector<double> all(k, 0.0), lo(k, 0.0), hi(k, 0.0);
    double nl = 0.0, nh = 0.0;
    for (auto r : oob) {
      const auto lab = static_cast<std::size_t>(labels_[static_cast<std::size_t>(r)]);
      all[lab] += 1.0;
      if (x_(r, feature) <= threshold) {
        lo[lab] += 1.0;
        nl += 1.0;
      } else {
        hi[lab] += 1.0;
        nh += 1.0;
      }
    }
    const double n = nl + nh;
    if (n <= 0.0) return 0.0;
    return n / total_ * (gini(all, n) - (nl * gini(lo, nl) + nh * gini(hi, nh)) / n);
  }

  void node(std::vector<Eigen::Index>& rows, std::vector<Eigen::Index>& oob, int depth) {
    const auto n = static_cast<int>(rows.size());
    if (depth >= cfg_.max_depth || n < 2 * cfg_.min_leaf) return;
    std::vector<double> counts(static_cast<std::size_t>(classes_), 0.0);
    for (auto r : rows) counts[static_cast<std::size_t>(labels_[static_cast<std::size_t>(r)])] += 1.0;
    const double parent = gini(counts, n);
    if (parent <= 0.0) return;

    // Partial Fisher-Yates draws mtry distinct candidate features.
    for (int i = 0; i < mtry_; ++i) {
      std::uniform_int_distribution<int> pick(i, static_cast<int>(features_.size()) - 1);
      std::swap(features_[static_cast<std::size_t>(i)], features_[static_cast<std::size_t>(pick(rng_))]);
    }

    double best_gain = 1e-12;
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<Eigen::Index> sorted = rows;
    std::vector<double> left(static_cast<std::size_t>(classes_));
    std::vector<double> right(static_cast<std::size_t>(classes_));
    for (int i = 0; i < mtry_; ++i) {
      const int f = features_[static_cast<std::size_t>(i)];
      std::sort(sorted.begin(), sorted.end(), [&](Eigen::Index a, Eigen::Index b) {
        const double va = x_(a, f);
        const double vb = x_(b, f);
        return va < vb || (va == vb && a < b);
      });
      std::fill(left.begin(), left.end(), 0.0);
      right = counts;
      for (int k = 0; k + 1 < n; ++k) {
        const auto lab = static_cast<std::size_t>(labels_[static_cast<std::size_t>(sorted[static_cast<std::size_t>(k)])]);
        left[lab] += 1.0;
        right[lab] -= 1.0;
        const int nl = k + 1;
        const int nr = n - nl;
        if (nl < cfg_.min_leaf || nr < cfg_.min_leaf) continue;
        const double v0 = x_(sorted[static_cast<std::size_t>(k)], f);
        const double v1 = x_(sorted[static_cast<std::size_t>(k + 1)], f);
        if (!(v1 > v0)) continue;
        const double child = (nl * gini(left, nl) + nr * gini(right, nr)) / n;
        const double gain = parent - child;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = f;
          best_threshold = 0.5 * (v0 + v1);
        }
      }
    }
    if (best_feature < 0) return;

    split_any_ = true;
    importance_[static_cast<std::size_t>(best_feature)] +=
        cfg_.out_of_bag ? oob_gain(oob, best_feature, best_threshold) : n / total_ * best_gain;
    std::vector<Eigen::Index> lo, hi, oob_lo, oob_hi;
    for (auto r : rows) (x_(r, best_feature) <= best_threshold ? lo : hi).push_back(r);
    for (auto r : oob) (x_(r, best_feature) <= best_threshold ? oob_lo : oob_hi).push_back(r);
    rows.clear();
    rows.shrink_to_fit();
    oob.clear();
    oob.shrink_to_fit();
    node(lo, oob_lo, depth + 1);
    node(hi, oob_hi, depth + 1);
  }

  const Eigen::MatrixXd& x_;
  std::span<const int> labels_;
  int classes_;
  const ForestConfig& cfg_;
  Rng& rng_;
  std::vector<double>& importance_;
  std::vector<int> features_;
  int mtry_ = 1;
  double total_ = 0.0;
  bool split_any_ = false;
};

}  // namespace

std::vector<double> rf_importance(const Eigen::MatrixXd& x, std::span<const int> labels,
                                  const ForestConfig& cfg, std::uint64_t seed) {
  if (static_cast<Eigen::Index>(labels.size()) != x.rows()) {
    throw std::invalid_argument("rf_importance: label count differs from row count");
  }
  if (cfg.tree_count < 1 || cfg.max_depth < 1 || cfg.min_leaf < 1) {
    throw std::invalid_argument("rf_importance: invalid forest configuration");
  }
  if (x.cols() == 0) throw std::invalid_argument("rf_importance: no features");
  int max_label = -1;
  bool two_classes = false;
  for (int l : labels) {
    if (l < 0) throw std::invalid_argument("rf_importance: negative label");
    if (max_label >= 0 && l != labels.front()) two_classes = true;
    max_label = std::max(max_label, l);
  }
  if (!two_classes) throw std::invalid_argument("rf_importance: need at least two classes");

  std::vector<double> importance(static_cast<std::size_t>(x.cols()), 0.0);
  bool any_split = false;
  const auto n = static_cast<std::size_t>(x.rows());
  for (int t = 0; t < cfg.tree_count; ++t) {
    Rng rng = make_rng(seed, {static_cast<std::uint64_t>(t)});
    std::uniform_int_distribution<std::size_t> draw(0, n - 1);
    std::vector<Eigen::Index> rows(n);
    std::vector<bool> in_bag(n, false);
    for (auto& r : rows) {
      r = static_cast<Eigen::Index>(draw(rng));
      in_bag[static_cast<std::size_t>(r)] = true;
    }
    std::vector<Eigen::Index> oob;
    if (cfg.out_of_bag) {
      for (std::size_t i = 0; i < n; ++i) {
        if (!in_bag[i]) oob.push_back(static_cast<Eigen::Index>(i));
      }
    }
    TreeBuilder builder(x, labels, max_label + 1, cfg, rng, importance);
    any_split = builder.grow(std::move(rows), std::move(oob)) || any_split;
  }
  // Out-of-bag decreases can be negative for splits that do not generalize.
  for (double& v : importance) v = std::max(v, 0.0);
  const double total = std::accumulate(importance.begin(), importance.end(), 0.0);
  if (any_split && total > 0.0) {
    for (double& v : importance) v /= total;
  } else {
    std::fill(importance.begin(), importance.end(), 0.0);
  }
  return importance;
}

}  // namespace biofuse
