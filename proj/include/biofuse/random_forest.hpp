#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace biofuse {

struct ForestConfig {
  int tree_count = 100;
  int max_depth = 5;
  int min_leaf = 5;
  /// Measure each split's impurity decrease on the tree's out-of-bag rows
  /// instead of the bootstrap rows it was fitted on.
  bool out_of_bag = false;
};

/// Mean decrease in Gini impurity per feature over a bootstrap forest with
/// sqrt(F) candidate features per split. Normalized to sum 1 when any tree
/// split at all; all zeros otherwise. Tree t draws from derive_seed(seed, {t}).
/// With `out_of_bag`, per-feature totals are clipped at zero before
/// normalization.
std::vector<double> rf_importance(const Eigen::MatrixXd& x, std::span<const int> labels,
                                  const ForestConfig& cfg, std::uint64_t seed);

}  // namespace biofuse
