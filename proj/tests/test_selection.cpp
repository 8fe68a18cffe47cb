#include <doctest.h>

#include <filesystem>
#include <numeric>
#include <random>

#include "biofuse/errors.hpp"
#include "biofuse/selection.hpp"

using namespace biofuse;

namespace {

struct Planted {
  Eigen::MatrixXd x;
  std::vector<int> labels;
  std::vector<std::string> names;
};

// Column 0 carries the label plus small noise; the rest are pure noise.
Planted planted(std::uint64_t seed, int rows = 200, int cols = 10, double noise = 0.1) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Planted p;
  p.x.resize(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const int label = r % 2;
    p.labels.push_back(label);
    p.x(r, 0) = label + noise * g(rng);
    for (int c = 1; c < cols; ++c) p.x(r, c) = g(rng);
  }
  for (int c = 0; c < cols; ++c) p.names.push_back("f" + std::to_string(c));
  return p;
}

}  // namespace

TEST_CASE("binomial cdf at one half") {
  CHECK(binomial_half_cdf(0, 1) == doctest::Approx(0.5));
  CHECK(binomial_half_cdf(2, 4) == doctest::Approx(11.0 / 16.0));
  CHECK(binomial_half_cdf(10, 10) == doctest::Approx(1.0));
  CHECK(binomial_half_cdf(-1, 10) == 0.0);
  double pmf_sum = 0.0;
  for (int k = 0; k <= 20; ++k) {
    double c = 1.0;
    for (int i = 0; i < k; ++i) c = c * (20 - i) / (i + 1);
    pmf_sum += c / std::pow(2.0, 20);
    CHECK(binomial_half_cdf(k, 20) == doctest::Approx(pmf_sum).epsilon(1e-12));
  }
}

TEST_CASE("forest importance ranks the label column first") {
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto p = planted(seed, 120, 6, 0.0);
    const auto imp = rf_importance(p.x, p.labels, {30, 5, 5}, seed);
    const auto top = std::max_element(imp.begin(), imp.end()) - imp.begin();
    wins += top == 0 ? 1 : 0;
    double sum = 0.0;
    for (double v : imp) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(sum == doctest::Approx(1.0));
  }
  CHECK(wins >= 95);
}

TEST_CASE("forest importance of constant features is zero") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Constant(50, 4, 2.0);
  std::vector<int> labels(50);
  for (int i = 0; i < 50; ++i) labels[static_cast<std::size_t>(i)] = i % 3;
  for (double v : rf_importance(x, labels, {}, 1)) CHECK(v == 0.0);
}

TEST_CASE("forest importance rejects a single class") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(30, 3);
  std::vector<int> labels(30, 1);
  CHECK_THROWS(rf_importance(x, labels, {}, 1));
}

TEST_CASE("twin columns share the importance of one") {
  auto p = planted(3, 200, 5, 0.3);
  const auto single = rf_importance(p.x, p.labels, {}, 9);
  Eigen::MatrixXd twin(p.x.rows(), p.x.cols() + 1);
  twin << p.x, p.x.col(0);
  const auto doubled = rf_importance(twin, p.labels, {}, 9);
  const double pair = doubled[0] + doubled.back();
  CHECK(pair >= 0.5 * single[0]);
  CHECK(pair <= 1.5 * single[0]);
}

TEST_CASE("forest importance is deterministic given the seed") {
  auto p = planted(4);
  CHECK(rf_importance(p.x, p.labels, {}, 5) == rf_importance(p.x, p.labels, {}, 5));
}

TEST_CASE("boruta confirms the planted feature and rarely the noise") {
  int noise_confirmed = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto p = planted(100 + seed);
    BorutaConfig cfg;
    cfg.seed = seed;
    const auto report = boruta_select(p.x, p.names, p.labels, cfg);
    CHECK(report.status_of("f0") == FeatureStatus::Confirmed);
    for (int c = 1; c < 10; ++c) {
      if (report.status_of("f" + std::to_string(c)) == FeatureStatus::Confirmed) ++noise_confirmed;
    }
    CHECK(report.features.size() == 10);
    CHECK(report.iterations >= 1);
    CHECK(report.iterations <= cfg.max_iterations);
  }
  // 90 noise decisions at a 5% false-confirmation budget.
  CHECK(noise_confirmed <= 4);
}

TEST_CASE("boruta does not depend on the column order") {
  auto p = planted(7);
  BorutaConfig cfg;
  cfg.seed = 3;
  cfg.max_iterations = 30;
  const auto a = boruta_select(p.x, p.names, p.labels, cfg);

  std::vector<int> order(10);
  std::iota(order.begin(), order.end(), 0);
  std::reverse(order.begin(), order.end());
  std::swap(order[2], order[6]);
  Eigen::MatrixXd permuted(p.x.rows(), 10);
  std::vector<std::string> names;
  for (int c = 0; c < 10; ++c) {
    permuted.col(c) = p.x.col(order[static_cast<std::size_t>(c)]);
    names.push_back(p.names[static_cast<std::size_t>(order[static_cast<std::size_t>(c)])]);
  }
  const auto b = boruta_select(permuted, names, p.labels, cfg);
  for (const auto& n : p.names) {
    CHECK(a.status_of(n) == b.status_of(n));
  }
}

TEST_CASE("a copy of a confirmed feature does not reject the original") {
  auto p = planted(8);
  Eigen::MatrixXd with_copy(p.x.rows(), 11);
  with_copy << p.x, p.x.col(0);
  auto names = p.names;
  names.push_back("f0_copy");
  BorutaConfig cfg;
  cfg.seed = 2;
  const auto report = boruta_select(with_copy, names, p.labels, cfg);
  CHECK(report.status_of("f0") != FeatureStatus::Rejected);
}

TEST_CASE("boruta configuration guards") {
  auto p = planted(9);
  BorutaConfig cfg;
  cfg.max_iterations = 5;
  CHECK_THROWS_AS(boruta_select(p.x, p.names, p.labels, cfg), ConfigError);
  cfg.max_iterations = 20;
  cfg.alpha = 1.5;
  CHECK_THROWS_AS(boruta_select(p.x, p.names, p.labels, cfg), ConfigError);
  auto small = planted(9, 10);
  CHECK_THROWS(boruta_select(small.x, small.names, small.labels, BorutaConfig{}));
}

TEST_CASE("selection report survives a CSV round trip") {
  SelectionReport r;
  r.features = {"a", "b", "c"};
  r.status = {FeatureStatus::Confirmed, FeatureStatus::Rejected, FeatureStatus::Tentative};
  r.hits = {40, 0, 11};
  r.iterations = 42;
  const auto path = std::filesystem::temp_directory_path() / "biofuse_selection_roundtrip.csv";
  write_selection_csv(path, r);
  const auto back = read_selection_csv(path);
  std::filesystem::remove(path);
  CHECK(back.features == r.features);
  CHECK(back.status == r.status);
  CHECK(back.hits == r.hits);
  CHECK(back.iterations == 42);
  CHECK(back.selected() == std::vector<std::string>{"a", "c"});
}

TEST_CASE("feature status names") {
  for (auto s : {FeatureStatus::Confirmed, FeatureStatus::Rejected, FeatureStatus::Tentative}) {
    CHECK(parse_feature_status(to_string(s)) == s);
  }
  CHECK_THROWS_AS(parse_feature_status("maybe"), DataError);
}
