#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "biofuse/errors.hpp"
#include "biofuse/features.hpp"
#include "oracles.hpp"

using namespace biofuse;
namespace ft = biofuse::features;

namespace {

constexpr int kWindows = 100;
constexpr double kTol = 1e-9;

std::vector<double> reversed(std::vector<double> x) {
  std::reverse(x.begin(), x.end());
  return x;
}

std::vector<double> scaled(std::vector<double> x, double c) {
  for (auto& v : x) v *= c;
  return x;
}

std::vector<double> sine(double freq, double fs, std::size_t n) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = std::sin(2 * std::numbers::pi * freq * static_cast<double>(i) / fs);
  return x;
}

LabeledRecording synthetic_recording(Modality m, const std::vector<std::string>& channels, double fs,
                                     Eigen::Index length, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd s(static_cast<Eigen::Index>(channels.size()), length);
  for (Eigen::Index c = 0; c < s.rows(); ++c) {
    for (Eigen::Index i = 0; i < length; ++i) {
      s(c, i) = g(rng) * (1.0 + 0.3 * static_cast<double>(c)) + std::sin(0.07 * static_cast<double>(i));
    }
  }
  const auto seg = StageSegmentation({length / 5, length / 2, 3 * length / 4}, length);
  return {Recording(m, channels, fs, s, 9), seg};
}

}  // namespace

TEST_CASE("time-domain features on small examples") {
  const std::vector<double> alt{1, -1, 1, -1};
  CHECK(ft::mav(alt) == 1.0);
  CHECK(ft::mav(std::vector<double>(5, 0.0)) == 0.0);
  const std::vector<double> two{0, 2};
  CHECK(ft::variance(two) == 1.0);
  CHECK(ft::std_dev(two) == 1.0);
  CHECK(ft::variance(std::vector<double>(4, 3.0)) == 0.0);
  const std::vector<double> zigzag{0, 1, 0, 1};
  CHECK(ft::waveform_length(zigzag) == 3.0);
  const std::vector<double> step{0, 5};
  CHECK(ft::waveform_length(step) == 5.0);
  const std::vector<double> one{1.0};
  CHECK_THROWS(ft::waveform_length(one));
}

TEST_CASE("willison amplitude counts differences at or above the threshold") {
  const std::vector<double> w{0, 0.5, 0, 0.5};
  CHECK(ft::willison_amplitude(w, 0.3) == 3);
  CHECK(ft::willison_amplitude(std::vector<double>(6, 2.0), 0.3) == 0);
  const std::vector<double> edge{0, 0.3};
  CHECK(ft::willison_amplitude(edge, 0.3) == 1);
  CHECK_THROWS(ft::willison_amplitude(w, 0.0));
  CHECK_THROWS(ft::willison_amplitude(w, -1.0));
}

TEST_CASE("mav slope examples") {
  const std::vector<double> m{1, 3, 2};
  CHECK(ft::mav_slope(m) == std::vector<double>{2, -1});
  CHECK(ft::mav_slope(std::vector<double>(4, 1.5)) == std::vector<double>(3, 0.0));
  const std::vector<double> single{1.0};
  CHECK_THROWS(ft::mav_slope(single));
}

TEST_CASE("time-domain features match direct-sum references on random windows") {
  std::mt19937_64 rng(101);
  for (int rep = 0; rep < kWindows; ++rep) {
    const auto w = oracle::random_window(rng, 20 + static_cast<std::size_t>(rep), 1.0 + rep * 0.1);
    CHECK(oracle::close(ft::mav(w), oracle::mav(w), kTol));
    CHECK(oracle::close(ft::variance(w), oracle::variance(w), kTol));
    CHECK(oracle::close(ft::std_dev(w), std::sqrt(oracle::variance(w)), kTol));
    CHECK(std::fabs(ft::std_dev(w) - std::sqrt(ft::variance(w))) < 1e-12 * std::max(1.0, ft::std_dev(w)));
    CHECK(oracle::close(ft::waveform_length(w), oracle::waveform_length(w), kTol));
    const double thr = 0.5 + 0.01 * rep;
    CHECK(ft::willison_amplitude(w, thr) == oracle::willison(w, thr));
    std::vector<double> mavs(w.begin(), w.begin() + 10);
    const auto slopes = ft::mav_slope(mavs);
    for (std::size_t k = 0; k + 1 < mavs.size(); ++k) CHECK(slopes[k] == mavs[k + 1] - mavs[k]);
  }
}

TEST_CASE("amplitude scaling and time reversal") {
  std::mt19937_64 rng(102);
  for (int rep = 0; rep < 20; ++rep) {
    const auto w = oracle::random_window(rng, 64);
    const double c = 0.5 + rep * 0.37;
    const auto s = scaled(w, c);
    CHECK(ft::mav(s) == doctest::Approx(c * ft::mav(w)).epsilon(1e-12));
    CHECK(ft::std_dev(s) == doctest::Approx(c * ft::std_dev(w)).epsilon(1e-12));
    CHECK(ft::waveform_length(s) == doctest::Approx(c * ft::waveform_length(w)).epsilon(1e-12));
    CHECK(ft::variance(s) == doctest::Approx(c * c * ft::variance(w)).epsilon(1e-12));

    const auto r = reversed(w);
    CHECK(ft::mav(r) == doctest::Approx(ft::mav(w)).epsilon(1e-12));
    CHECK(ft::variance(r) == doctest::Approx(ft::variance(w)).epsilon(1e-12));
    CHECK(ft::waveform_length(r) == doctest::Approx(ft::waveform_length(w)).epsilon(1e-12));
    CHECK(ft::willison_amplitude(r, 0.8) == ft::willison_amplitude(w, 0.8));
    CHECK(ft::spectral_energy(r) == doctest::Approx(ft::spectral_energy(w)).epsilon(1e-9));
    const auto pw = dsp::welch_psd(w, 100.0, 32, 16);
    const auto pr = dsp::welch_psd(r, 100.0, 32, 16);
    CHECK(ft::subband_power(pr, {8, 30}) == doctest::Approx(ft::subband_power(pw, {8, 30})).epsilon(1e-9));
  }
  // A fixed threshold makes the count depend on amplitude.
  const std::vector<double> w{0, 0.4, 0, 0.4, 0};
  CHECK(ft::willison_amplitude(w, 0.5) == 0);
  CHECK(ft::willison_amplitude(scaled(w, 2.0), 0.5) == 4);
}

TEST_CASE("AR fit matches the normal equations on random windows") {
  std::mt19937_64 rng(103);
  for (int rep = 0; rep < kWindows; ++rep) {
    const auto w = oracle::random_window(rng, 80 + static_cast<std::size_t>(rep));
    const int p = 1 + rep % 6;
    const auto fit = ft::ar_coefficients(w, p);
    const auto want = oracle::ar_normal_equations(w, p);
    CHECK_FALSE(fit.degenerate);
    REQUIRE(fit.coefficients.size() == want.size());
    for (std::size_t k = 0; k < want.size(); ++k) CHECK(oracle::close(fit.coefficients[k], want[k], kTol, 1e-12));
  }
}

TEST_CASE("AR fit recovers a known process") {
  std::mt19937_64 rng(104);
  std::normal_distribution<double> g;
  std::vector<double> x(10000, 0.0);
  for (std::size_t i = 2; i < x.size(); ++i) x[i] = 0.5 * x[i - 1] - 0.25 * x[i - 2] + g(rng);
  const auto fit = ft::ar_coefficients(x, 2);
  CHECK(std::fabs(fit.coefficients[0] - 0.5) < 0.05);
  CHECK(std::fabs(fit.coefficients[1] + 0.25) < 0.05);

  const auto white = oracle::random_window(rng, 10000);
  for (double a : ft::ar_coefficients(white, 4).coefficients) CHECK(std::fabs(a) < 0.1);

  std::vector<double> geometric(40);
  geometric[0] = 1.0;
  for (std::size_t i = 1; i < geometric.size(); ++i) geometric[i] = geometric[i - 1] * 1.01;
  CHECK(ft::ar_coefficients(geometric, 1).coefficients[0] == doctest::Approx(1.01).epsilon(1e-6));
}

TEST_CASE("AR fit flags degenerate windows") {
  const auto fit = ft::ar_coefficients(std::vector<double>(30, 2.0), 4);
  CHECK(fit.degenerate);
  CHECK(fit.coefficients == std::vector<double>(4, 0.0));
  CHECK_THROWS(ft::ar_coefficients(std::vector<double>(12, 1.0), 4));
}

TEST_CASE("sub-band power matches the quadratic reference on random spectra") {
  std::mt19937_64 rng(105);
  for (int rep = 0; rep < kWindows; ++rep) {
    const auto w = oracle::random_window(rng, 50);
    const auto psd = dsp::welch_psd(w, 500.0, 50, 25, dsp::WindowFunction::Hann, 256);
    oracle::Psd ref{psd.freqs_hz, psd.power};
    for (ft::Band b : {ft::kAlphaBand, ft::kBetaBand, ft::Band{3.3, 71.1}}) {
      CHECK(oracle::close(ft::subband_power(psd, b), oracle::band_power(ref, b.low_hz, b.high_hz), kTol, 1e-15));
    }
  }
}

TEST_CASE("sub-band power examples") {
  dsp::PsdEstimate flat;
  for (int k = 0; k <= 100; ++k) {
    flat.freqs_hz.push_back(0.5 * k);
    flat.power.push_back(2.5);
  }
  CHECK(std::fabs(ft::subband_power(flat, {8.0, 12.0}) - 10.0) < 1e-9);
  CHECK(std::fabs(ft::subband_power(flat, {12.3, 29.9}) - 2.5 * 17.6) < 1e-9);

  const auto x = sine(10.0, 500.0, 1000);
  const auto psd = dsp::welch_psd(x, 500.0, 250, 125);
  CHECK(ft::subband_power(psd, ft::kAlphaBand) > 10.0 * ft::subband_power(psd, ft::kBetaBand));

  const auto zero = dsp::welch_psd(std::vector<double>(100, 0.0), 500.0, 50, 25);
  CHECK(ft::subband_power(zero, ft::kAlphaBand) == 0.0);
  CHECK_THROWS(ft::subband_power(flat, {12.0, 8.0}));
  CHECK_THROWS(ft::subband_power(flat, {40.0, 60.0}));
}

TEST_CASE("peak PSD finds the dominant frequency above the cutoff") {
  const auto x = sine(10.0, 500.0, 2000);
  const auto psd = dsp::welch_psd(x, 500.0, 500, 250);
  const auto peak = ft::peak_psd(psd);
  CHECK(std::fabs(peak.freq_hz - 10.0) <= psd.resolution_hz() / 2);

  dsp::PsdEstimate twin{{0, 1, 2, 3, 4}, {9, 1, 5, 2, 5}};
  const auto p = ft::peak_psd(twin, 1.0);
  CHECK(p.freq_hz == 2.0);
  CHECK(p.power == 5.0);

  const auto dc = dsp::welch_psd(std::vector<double>(200, 4.0), 100.0, 100, 50);
  CHECK_THROWS_AS(ft::peak_psd(dc), DataError);
  dsp::PsdEstimate low{{0, 0.5}, {1, 1}};
  CHECK_THROWS_AS(ft::peak_psd(low, 1.0), DataError);
}

TEST_CASE("peak PSD matches a linear scan on random spectra") {
  std::mt19937_64 rng(106);
  for (int rep = 0; rep < kWindows; ++rep) {
    const auto w = oracle::random_window(rng, 50);
    const auto ref = oracle::welch(w, 500.0, 50, 25, 256);
    std::size_t best = 0;
    bool found = false;
    for (std::size_t k = 0; k < ref.freqs.size(); ++k) {
      if (ref.freqs[k] < 1.0) continue;
      if (!found || ref.power[k] > ref.power[best]) best = k;
      found = true;
    }
    const auto psd = dsp::welch_psd(w, 500.0, 50, 25, dsp::WindowFunction::Hann, 256);
    const auto peak = ft::peak_psd(psd);
    CHECK(oracle::close(peak.power, ref.power[best], kTol));
    CHECK(peak.freq_hz == ref.freqs[best]);
  }
}

TEST_CASE("spectral energy equals N times the signal energy") {
  CHECK(ft::spectral_energy(std::vector<double>(8, 0.0)) == 0.0);
  const std::vector<double> impulse{1, 0, 0, 0};
  CHECK(ft::spectral_energy(impulse) == doctest::Approx(4.0));
  std::mt19937_64 rng(107);
  for (int rep = 0; rep < kWindows; ++rep) {
    const auto w = oracle::random_window(rng, 10 + static_cast<std::size_t>(rep));
    long double direct = 0;
    for (const auto& c : oracle::dft_real(w)) direct += std::norm(c);
    long double parseval = 0;
    for (double v : w) parseval += static_cast<long double>(v) * v;
    parseval *= static_cast<long double>(w.size());
    CHECK(oracle::close(ft::spectral_energy(w), static_cast<double>(direct), kTol));
    CHECK(oracle::close(ft::spectral_energy(w), static_cast<double>(parseval), kTol));
  }
}

TEST_CASE("wavelet energies") {
  const auto flat = ft::dwt_features(std::vector<double>(16, 3.0));
  CHECK(flat.detail == 0.0);
  CHECK(flat.approx == doctest::Approx(std::log1p(16 * 9.0)));
  const std::vector<double> alt{1, -1, 1, -1, 1, -1};
  CHECK(ft::dwt_features(alt).approx == 0.0);
  std::mt19937_64 rng(108);
  for (int rep = 0; rep < kWindows; ++rep) {
    const auto w = oracle::random_window(rng, 3 + static_cast<std::size_t>(rep));
    std::vector<double> a, d;
    oracle::haar(w, a, d);
    long double ea = 0, ed = 0;
    for (double v : a) ea += static_cast<long double>(v) * v;
    for (double v : d) ed += static_cast<long double>(v) * v;
    const auto e = ft::dwt_features(w);
    CHECK(oracle::close(e.approx, static_cast<double>(std::log1p(ea)), kTol));
    CHECK(oracle::close(e.detail, static_cast<double>(std::log1p(ed)), kTol));
  }
}

TEST_CASE("EEG preset produces 70 named columns and 496 windows") {
  const auto rec = synthetic_recording(Modality::Eeg, eeg_preset_channels(), 500.0, 5000, 1);
  const auto m = ft::extract_eeg_features(rec);
  CHECK(m.feature_count() == 70);
  CHECK(m.row_count() == 496);
  CHECK(m.feature_names[0] == eeg_preset_channels()[0] + "_MAV");
  CHECK(m.feature_names[12] == eeg_preset_channels()[1] + "_V");
  CHECK(m.labels.front() == 0);
  CHECK(m.labels.back() == 3);
}

TEST_CASE("EEG preset rows agree with the reference features") {
  const auto rec = synthetic_recording(Modality::Eeg, eeg_preset_channels(), 500.0, 600, 2);
  const auto m = ft::extract_eeg_features(rec);
  for (Eigen::Index k : {Eigen::Index{0}, Eigen::Index{17}, m.row_count() - 1}) {
    for (std::size_t c = 0; c < 7; ++c) {
      std::vector<double> w(50);
      for (std::size_t i = 0; i < 50; ++i) {
        w[i] = rec.recording.samples()(static_cast<Eigen::Index>(c), m.window_starts[static_cast<std::size_t>(k)] + static_cast<Eigen::Index>(i));
      }
      const auto psd = oracle::welch(w, 500.0, 50, 25, 256);
      std::size_t best = 2;
      for (std::size_t b = 2; b < psd.power.size(); ++b) {
        if (psd.power[b] > psd.power[best]) best = b;
      }
      std::vector<double> a, d;
      oracle::haar(w, a, d);
      double ea = 0, ed = 0;
      for (double v : a) ea += v * v;
      for (double v : d) ed += v * v;
      double se = 0;
      for (double v : w) se += v * v;
      const double want[] = {oracle::mav(w),
                             std::sqrt(oracle::variance(w)),
                             oracle::variance(w),
                             oracle::band_power(psd, 8, 12),
                             oracle::band_power(psd, 12, 30),
                             psd.power[best],
                             psd.freqs[best],
                             se * 50,
                             std::log1p(ea),
                             std::log1p(ed)};
      for (std::size_t f = 0; f < 10; ++f) {
        CHECK(oracle::close(m.rows(k, static_cast<Eigen::Index>(c * 10 + f)), want[f], 1e-9, 1e-15));
      }
    }
  }
}

TEST_CASE("EEG preset on silence yields zero amplitude and power columns") {
  LabeledRecording rec{Recording(Modality::Eeg, eeg_preset_channels(), 500.0, Eigen::MatrixXd::Zero(7, 500), 1),
                       StageSegmentation({100, 200, 300}, 500)};
  const auto m = ft::extract_eeg_features(rec);
  for (const char* f : {"MAV", "SD", "V", "SE", "ASB_alpha", "ASB_beta"}) {
    const std::vector<std::string> col{"Cz_" + std::string(f)};
    CHECK(m.select_columns(col).rows.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("EMG preset produces 25 columns and 197 windows") {
  const auto rec = synthetic_recording(Modality::Emg, emg_preset_channels(), 4000.0, 40000, 3);
  const std::vector<double> thr(5, 0.5);
  const auto m = ft::extract_emg_features(rec, {}, thr);
  CHECK(m.feature_count() == 25);
  CHECK(m.row_count() == 197);
}

TEST_CASE("EMG preset rows agree with the reference features") {
  const auto rec = synthetic_recording(Modality::Emg, emg_preset_channels(), 4000.0, 2000, 4);
  const std::vector<double> thr{0.5, 0.6, 0.7, 0.8, 0.9};
  const auto m = ft::extract_emg_features(rec, {}, thr);
  REQUIRE(m.row_count() == 7);
  for (std::size_t c = 0; c < 5; ++c) {
    std::vector<double> mavs;
    for (Eigen::Index k = 0; k < m.row_count(); ++k) {
      std::vector<double> w(800);
      for (std::size_t i = 0; i < 800; ++i) {
        w[i] = rec.recording.samples()(static_cast<Eigen::Index>(c), k * 200 + static_cast<Eigen::Index>(i));
      }
      mavs.push_back(oracle::mav(w));
      const auto row = [&](std::size_t f) { return m.rows(k, static_cast<Eigen::Index>(c * 5 + f)); };
      CHECK(oracle::close(row(0), oracle::mav(w), 1e-9));
      CHECK(oracle::close(row(1), oracle::waveform_length(w), 1e-9));
      CHECK(row(2) == oracle::willison(w, thr[c]));
      CHECK(oracle::close(row(4), oracle::ar_normal_equations(w, 4)[0], 1e-9, 1e-12));
    }
    for (Eigen::Index k = 0; k < m.row_count(); ++k) {
      const std::size_t j = std::min<std::size_t>(static_cast<std::size_t>(k), mavs.size() - 2);
      CHECK(m.rows(k, static_cast<Eigen::Index>(c * 5 + 3)) == doctest::Approx(mavs[j + 1] - mavs[j]).epsilon(1e-9));
    }
  }
}

TEST_CASE("preset extraction names the missing channel") {
  const auto rec = synthetic_recording(Modality::Eeg, {"C3", "C4"}, 500.0, 500, 5);
  try {
    ft::extract_eeg_features(rec);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("Cz") != std::string::npos);
  }
}

TEST_CASE("non-finite samples are rejected") {
  auto rec = synthetic_recording(Modality::Eeg, eeg_preset_channels(), 500.0, 500, 6);
  Eigen::MatrixXd s = rec.recording.samples();
  s(2, 40) = std::nan("");
  rec.recording = rec.recording.with_samples(s);
  CHECK_THROWS_AS(ft::extract_eeg_features(rec), DataError);
}

TEST_CASE("Willison thresholds are the resting-stage deviation") {
  std::vector<LabeledRecording> trials{synthetic_recording(Modality::Emg, emg_preset_channels(), 4000.0, 4000, 7),
                                       synthetic_recording(Modality::Emg, emg_preset_channels(), 4000.0, 4000, 8)};
  const auto thr = ft::fit_willison_thresholds(trials, emg_preset_channels());
  REQUIRE(thr.size() == 5);
  for (std::size_t c = 0; c < 5; ++c) {
    std::vector<double> rest;
    for (const auto& t : trials) {
      for (Eigen::Index i = 0; i < t.stages.boundaries()[0]; ++i) rest.push_back(t.recording.samples()(static_cast<Eigen::Index>(c), i));
    }
    CHECK(thr[c] == doctest::Approx(std::sqrt(oracle::variance(rest))).epsilon(1e-9));
  }
  ft::EmgFeatureConfig fixed;
  fixed.willison_threshold = 0.25;
  CHECK(ft::resolve_willison_thresholds(fixed, trials) == std::vector<double>(5, 0.25));
}
