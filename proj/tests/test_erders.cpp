#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "biofuse/erders.hpp"
#include "biofuse/errors.hpp"
#include "biofuse/synth.hpp"

using namespace biofuse;

namespace {

constexpr double kFs = 500.0;

// One in-band sinusoid per trial with random frequency and phase. The
// amplitude is scaled by `drop` over [drop_from, drop_to) seconds.
std::vector<Recording> beta_trials(int count, double seconds, double drop, double drop_from, double drop_to,
                                   std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> freq(15.0, 27.0);
  const auto n = static_cast<Eigen::Index>(seconds * kFs);
  std::vector<Recording> out;
  for (int t = 0; t < count; ++t) {
    const double f = freq(rng);
    const double ph = phase(rng);
    Eigen::MatrixXd x(2, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double time = static_cast<double>(i) / kFs;
      const double v = std::sin(2.0 * std::numbers::pi * f * time + ph);
      const double gain = time >= drop_from && time < drop_to ? drop : 1.0;
      x(0, i) = gain * v;
      x(1, i) = v;
    }
    out.emplace_back(Modality::Eeg, std::vector<std::string>{"C3", "C4"}, kFs, x, t);
  }
  return out;
}

double mean_over(const ErdErsCurve& c, double from, double to) {
  double s = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < c.time_s.size(); ++i) {
    if (c.time_s[i] >= from && c.time_s[i] <= to) {
      s += c.percent_change[i];
      ++n;
    }
  }
  return s / n;
}

}  // namespace

TEST_CASE("halved beta power shows as a -50% event and recovers") {
  const auto trials = beta_trials(40, 10.0, 1.0 / std::sqrt(2.0), 2.0, 7.5, 1);
  const auto curve = erd_ers_curve(trials, "C3");
  CHECK(curve.trial_count == 40);
  CHECK(curve.channel == "C3");
  for (std::size_t i = 0; i < curve.time_s.size(); ++i) {
    const double t = curve.time_s[i];
    if (t >= 2.5 && t <= 3.5) {
      CHECK(curve.percent_change[i] >= -60.0);
      CHECK(curve.percent_change[i] <= -40.0);
    }
    if (t > 8.0) CHECK(std::abs(curve.percent_change[i]) <= 10.0);
  }
  CHECK(std::abs(mean_over(curve, 1.0, 2.0)) < 2.0);
}

TEST_CASE("stationary trials give a flat curve") {
  const auto trials = beta_trials(40, 6.0, 1.0, 0.0, 0.0, 2);
  const auto curve = erd_ers_curve(trials, "C4");
  for (double v : curve.percent_change) CHECK(std::abs(v) <= 5.0);
}

TEST_CASE("curve is scale invariant and trimmed at both ends") {
  const auto trials = beta_trials(5, 5.0, 0.5, 2.0, 4.0, 3);
  std::vector<Recording> doubled;
  for (const auto& r : trials) doubled.push_back(r.with_samples(r.samples() * 2.0));
  const auto a = erd_ers_curve(trials, "C3");
  const auto b = erd_ers_curve(doubled, "C3");
  REQUIRE(a.percent_change.size() == b.percent_change.size());
  for (std::size_t i = 0; i < a.percent_change.size(); ++i) {
    CHECK(a.percent_change[i] == doctest::Approx(b.percent_change[i]).epsilon(1e-9).scale(1.0));
  }
  const ErdErsConfig cfg;
  const auto trim = static_cast<std::size_t>(std::lround(cfg.edge_trim_s * kFs));
  CHECK(a.time_s.size() == 2500 - 2 * trim);
  CHECK(a.time_s.front() == doctest::Approx(cfg.edge_trim_s));
}

TEST_CASE("trials are cropped to the shortest") {
  auto trials = beta_trials(3, 5.0, 1.0, 0.0, 0.0, 4);
  trials[1] = trials[1].cropped(2000);
  const auto curve = erd_ers_curve(trials, "C3");
  const ErdErsConfig cfg;
  CHECK(curve.time_s.size() == 2000 - 2 * static_cast<std::size_t>(std::lround(cfg.edge_trim_s * kFs)));
}

TEST_CASE("curve errors") {
  const auto trials = beta_trials(3, 3.0, 1.0, 0.0, 0.0, 5);
  CHECK_THROWS(erd_ers_curve(std::span<const Recording>(trials.data(), 1), "C3"));
  CHECK_THROWS_AS(erd_ers_curve(trials, "Cz"), DataError);
  ErdErsConfig late;
  late.baseline_start_s = 2.5;
  late.baseline_end_s = 3.5;
  CHECK_THROWS(erd_ers_curve(trials, "C3", late));
  ErdErsConfig inverted;
  inverted.baseline_start_s = 2.0;
  inverted.baseline_end_s = 1.0;
  CHECK_THROWS(erd_ers_curve(trials, "C3", inverted));
}

TEST_CASE("channel reduction") {
  GeneratorConfig gen;
  gen.trial_count = 10;
  gen.seed = 8;
  std::vector<LabeledRecording> eeg;
  for (const auto& t : generate_dataset(gen)) eeg.push_back(*t.eeg);
  ClassifierSpec spec;
  spec.type = "knn";
  CvOptions options;
  options.folds = 5;

  const auto all = channel_reduction_eval(eeg, eeg_preset_channels(), spec, options);
  const auto standard = cross_validate(spec, features::extract_eeg_dataset(eeg), options);
  CHECK(all.mean.accuracy == standard.mean.accuracy);
  CHECK(all.pooled.confusion == standard.pooled.confusion);

  const auto single = channel_reduction_eval(eeg, {"C3"}, spec, options);
  CHECK(single.classifier == "knn[C3]");
  CHECK(single.pooled.confusion.sum() == all.pooled.confusion.sum());

  CHECK_THROWS_AS(channel_reduction_eval(eeg, {}, spec, options), ConfigError);
  CHECK_THROWS_AS(channel_reduction_eval(eeg, {"Oz"}, spec, options), DataError);
}
