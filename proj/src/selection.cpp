#include "biofuse/selection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "biofuse/errors.hpp"
#include "biofuse/random.hpp"

namespace biofuse {

std::string_view to_string(FeatureStatus s) {
  switch (s) {
    case FeatureStatus::Confirmed:
      return "Confirmed";
    case FeatureStatus::Rejected:
      return "Rejected";
    case FeatureStatus::Tentative:
      return "Tentative";
  }
  return "Tentative";
}

FeatureStatus parse_feature_status(std::string_view text) {
  if (text == "Confirmed") return FeatureStatus::Confirmed;
  if (text == "Rejected") return FeatureStatus::Rejected;
  if (text == "Tentative") return FeatureStatus::Tentative;
  throw DataError("unknown feature status '" + std::string(text) + "'");
}

FeatureStatus SelectionReport::status_of(std::string_view name) const {
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i] == name) return status[i];
  }
  throw std::out_of_range("feature '" + std::string(name) + "' not in selection report");
}

std::vector<std::string> SelectionReport::selected() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (status[i] != FeatureStatus::Rejected) out.push_back(features[i]);
  }
  return out;
}

double binomial_half_cdf(int k, int n) {
  if (k < 0) return 0.0;
  if (k >= n) return 1.0;
  const double log_half_n = n * std::log(0.5);
  double total = 0.0;
  for (int i = 0; i <= k; ++i) {
    const double log_choose = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0);
    total += std::exp(log_choose + log_half_n);
  }
  return std::min(1.0, total);
}

namespace {
constexpr Eigen::Index kMinShadows = 20;
}  // namespace

SelectionReport boruta_select(const Eigen::MatrixXd& x, std::span<const std::string> names,
                              std::span<const int> labels, const BorutaConfig& cfg) {
  if (cfg.max_iterations < 10) throw ConfigError("boruta needs at least 10 iterations");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw ConfigError("boruta alpha must lie in (0, 1)");
  if (x.rows() < 20) throw std::invalid_argument("boruta needs at least 20 rows");
  if (static_cast<Eigen::Index>(names.size()) != x.cols()) {
    throw std::invalid_argument("boruta: name count differs from column count");
  }
  const auto f = static_cast<std::size_t>(x.cols());

  // Canonical (name-sorted) feature order.
  std::vector<std::size_t> order(f);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return names[a] < names[b]; });

  std::vector<Eigen::Index> row_pick(static_cast<std::size_t>(x.rows()));
  std::iota(row_pick.begin(), row_pick.end(), 0);
  if (cfg.max_rows > 0 && row_pick.size() > cfg.max_rows) {
    Rng rng = make_rng(cfg.seed, {0xB0, 0});
    std::shuffle(row_pick.begin(), row_pick.end(), rng);
    row_pick.resize(cfg.max_rows);
    std::sort(row_pick.begin(), row_pick.end());
  }
  const auto n = static_cast<Eigen::Index>(row_pick.size());
  Eigen::MatrixXd data(n, static_cast<Eigen::Index>(f));
  std::vector<int> y(static_cast<std::size_t>(n));
  for (Eigen::Index r = 0; r < n; ++r) {
    const Eigen::Index src = row_pick[static_cast<std::size_t>(r)];
    for (std::size_t c = 0; c < f; ++c) data(r, static_cast<Eigen::Index>(c)) = x(src, static_cast<Eigen::Index>(order[c]));
    y[static_cast<std::size_t>(r)] = labels[static_cast<std::size_t>(src)];
  }

  std::vector<FeatureStatus> status(f, FeatureStatus::Tentative);
  std::vector<bool> decided(f, false);
  std::vector<int> hits(f, 0);
  const double threshold = cfg.alpha / static_cast<double>(f);
  int iteration = 0;
  while (iteration < cfg.max_iterations) {
    ++iteration;
    // Decided features stay in the forest so the shadow pool keeps its size.
    const auto a = static_cast<Eigen::Index>(f);
    const Eigen::Index shadows = std::max<Eigen::Index>(a, kMinShadows);
    Eigen::MatrixXd ext(n, a + shadows);
    ext.leftCols(a) = data;
    std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < shadows; ++j) {
      const Eigen::Index c = j % a;
      std::iota(perm.begin(), perm.end(), 0);
      Rng rng = make_rng(cfg.seed, {0xB1, static_cast<std::uint64_t>(iteration), static_cast<std::uint64_t>(c),
                                    static_cast<std::uint64_t>(j / a)});
      std::shuffle(perm.begin(), perm.end(), rng);
      for (Eigen::Index r = 0; r < n; ++r) ext(r, a + j) = data(perm[static_cast<std::size_t>(r)], c);
    }
    const std::vector<double> imp =
        rf_importance(ext, y, cfg.forest, derive_seed(cfg.seed, {0xB2, static_cast<std::uint64_t>(iteration)}));
    const double shadow_max =
        *std::max_element(imp.begin() + static_cast<std::ptrdiff_t>(a), imp.end());
    for (std::size_t c = 0; c < f; ++c) {
      if (imp[c] > shadow_max) ++hits[c];
    }
    bool undecided = false;
    for (std::size_t c = 0; c < f; ++c) {
      if (decided[c]) continue;
      const double lower = binomial_half_cdf(hits[c], iteration);
      const double upper = 1.0 - binomial_half_cdf(hits[c] - 1, iteration);
      const double two_sided = std::min(1.0, 2.0 * std::min(lower, upper));
      if (two_sided < threshold) {
        status[c] = 2 * hits[c] > iteration ? FeatureStatus::Confirmed : FeatureStatus::Rejected;
        decided[c] = true;
      } else {
        undecided = true;
      }
    }
    if (!undecided) break;
  }

  SelectionReport report;
  report.iterations = iteration;
  // Report in the caller's column order.
  std::vector<std::size_t> canonical_of(f);
  for (std::size_t c = 0; c < f; ++c) canonical_of[order[c]] = c;
  for (std::size_t i = 0; i < f; ++i) {
    report.features.push_back(names[i]);
    report.status.push_back(status[canonical_of[i]]);
    report.hits.push_back(hits[canonical_of[i]]);
  }
  return report;
}

SelectionReport boruta_select(const FeatureMatrix& m, const BorutaConfig& cfg) {
  return boruta_select(m.rows, m.feature_names, m.labels, cfg);
}

void write_selection_csv(const std::filesystem::path& path, const SelectionReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "feature,status,hits,iterations\n";
  for (std::size_t i = 0; i < report.features.size(); ++i) {
    out << report.features[i] << ',' << to_string(report.status[i]) << ',' << report.hits[i] << ','
        << report.iterations << '\n';
  }
}

SelectionReport read_selection_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (line.rfind("feature,status,hits,iterations", 0) != 0) {
    throw DataError(path.string() + ": not a selection report");
  }
  SelectionReport report;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    // Feature names may contain commas only in theory; split from the right.
    const auto c3 = line.rfind(',');
    const auto c2 = line.rfind(',', c3 - 1);
    const auto c1 = line.rfind(',', c2 - 1);
    if (c1 == std::string::npos || c2 == std::string::npos || c3 == std::string::npos) {
      throw DataError(path.string() + ": malformed row '" + line + "'");
    }
    report.features.push_back(line.substr(0, c1));
    report.status.push_back(parse_feature_status(line.substr(c1 + 1, c2 - c1 - 1)));
    report.hits.push_back(std::stoi(line.substr(c2 + 1, c3 - c2 - 1)));
    report.iterations = std::stoi(line.substr(c3 + 1));
  }
  return report;
}

}  // namespace biofuse
