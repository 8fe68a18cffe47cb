#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "biofuse/random_forest.hpp"
#include "biofuse/signal_model.hpp"

namespace biofuse {

enum class FeatureStatus { Confirmed, Rejected, Tentative };

std::string_view to_string(FeatureStatus s);
FeatureStatus parse_feature_status(std::string_view text);

struct BorutaConfig {
  int max_iterations = 100;
  double alpha = 0.05;
  ForestConfig forest{};
  std::uint64_t seed = 0;
  /// Row subsample drawn once before the first iteration; 0 keeps all rows.
  std::size_t max_rows = 0;
};

struct SelectionReport {
  std::vector<std::string> features;
  std::vector<FeatureStatus> status;
  std::vector<int> hits;
  int iterations = 0;

  FeatureStatus status_of(std::string_view name) const;
  /// Confirmed and Tentative features, in report order.
  std::vector<std::string> selected() const;
};

/// All-relevant selection: every iteration grows a forest on the features
/// plus shuffled shadow copies of them (at least twenty shadows, cycling
/// through the features) and counts a hit for each feature whose importance
/// beats the best shadow. Features are decided by a two-sided binomial test
/// on the hit count with Bonferroni correction over all features.
/// Features are processed in name order, so results do not depend on the
/// column order of the input.
SelectionReport boruta_select(const Eigen::MatrixXd& x, std::span<const std::string> names,
                              std::span<const int> labels, const BorutaConfig& cfg);
SelectionReport boruta_select(const FeatureMatrix& m, const BorutaConfig& cfg);

/// P(X <= k) for X ~ Binomial(n, 1/2).
double binomial_half_cdf(int k, int n);

void write_selection_csv(const std::filesystem::path& path, const SelectionReport& report);
SelectionReport read_selection_csv(const std::filesystem::path& path);

}  // namespace biofuse
