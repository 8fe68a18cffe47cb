#include "biofuse/synth.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "biofuse/dsp.hpp"
#include "biofuse/errors.hpp"
#include "biofuse/random.hpp"

namespace biofuse {

GeneratorConfig::GeneratorConfig() {
  // Resting / extension / lifting / flexion.
  eeg_alpha = {
      {10.0, 5.5, 5.0, 8.0},  // C3
      {10.0, 8.5, 6.5, 9.0},  // C4
      {8.0, 6.0, 6.5, 5.0},   // Cz
      {7.0, 6.0, 4.5, 6.5},   // CP1
      {7.0, 7.0, 5.5, 5.0},   // CP2
      {9.0, 6.5, 7.5, 8.5},   // CP5
      {8.0, 7.5, 7.0, 6.0},   // CP6
  };
  eeg_beta = {
      {6.0, 3.5, 3.0, 7.5},
      {6.0, 5.0, 4.5, 5.5},
      {5.0, 3.0, 4.5, 6.0},
      {4.5, 4.0, 3.0, 5.5},
      {4.5, 3.5, 4.0, 4.5},
      {5.5, 4.5, 3.5, 6.5},
      {5.0, 5.0, 3.5, 5.0},
  };
  emg_burst = {
      {0.0, 1.0, 0.8, 0.4},  // anterior deltoid
      {0.0, 0.4, 1.0, 0.6},  // brachioradialis
      {0.0, 0.3, 1.0, 0.5},  // flexor digitorum profundis
      {0.0, 0.8, 0.4, 0.9},  // common extensor digitorum
      {0.0, 0.2, 0.9, 0.3},  // first dorsal interosseous
  };
}

void GeneratorConfig::validate() const {
  if (trial_count < 1) throw ConfigError("synth: trial_count must be >= 1");
  if (!(trial_length_s > 0.0)) throw ConfigError("synth: trial_length_s must be positive");
  if (!(eeg_rate_hz > 0.0) || !(emg_rate_hz > 0.0)) throw ConfigError("synth: sampling rates must be positive");
  if (!(boundaries_s[0] > 0.0 && boundaries_s[0] < boundaries_s[1] && boundaries_s[1] < boundaries_s[2] &&
        boundaries_s[2] < trial_length_s)) {
    throw ConfigError("synth: stage boundaries must satisfy 0 < b1 < b2 < b3 < trial_length_s");
  }
  if (transition_s < 0.0) throw ConfigError("synth: transition_s must be >= 0");
  if (class_sigma < 0.0) throw ConfigError("synth: class_sigma must be >= 0");
  if (eeg_background < 0.0 || eeg_sensor_noise < 0.0 || emg_rest_level < 0.0) {
    throw ConfigError("synth: noise levels must be >= 0");
  }
  if (eeg_alpha.size() != eeg_channels.size() || eeg_beta.size() != eeg_channels.size()) {
    throw ConfigError("synth: eeg_alpha and eeg_beta need one entry per EEG channel");
  }
  if (emg_burst.size() != emg_channels.size()) {
    throw ConfigError("synth: emg_burst needs one entry per EMG channel");
  }
  for (const auto* table : {&eeg_alpha, &eeg_beta, &emg_burst}) {
    for (const auto& row : *table) {
      for (double a : row) {
        if (!(a >= 0.0) || !std::isfinite(a)) throw ConfigError("synth: amplitudes must be finite and >= 0");
      }
    }
  }
  if (eeg_rate_hz <= 2.0 * 45.0) throw ConfigError("synth: eeg_rate_hz must exceed 90 Hz");
  if (emg_rate_hz <= 2.0 * 450.0) throw ConfigError("synth: emg_rate_hz must exceed 900 Hz");
}

namespace {

enum Stream : std::uint64_t { kAlpha = 1, kBeta = 2, kBackground = 3, kSensor = 4, kEmg = 5, kJitter = 6 };

std::vector<double> white(Rng& rng, Eigen::Index n) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (auto& v : out) v = g(rng);
  return out;
}

/// Bandpassed white noise scaled to unit sample variance.
std::vector<double> carrier(Rng& rng, Eigen::Index n, const dsp::BandpassDesign& design) {
  auto x = dsp::butterworth_bandpass(white(rng, n), design);
  double ss = 0.0;
  for (double v : x) ss += v * v;
  const double scale = ss > 0.0 ? std::sqrt(static_cast<double>(n) / ss) : 0.0;
  for (auto& v : x) v *= scale;
  return x;
}

/// Piecewise-constant stage amplitudes with raised-cosine ramps centred on
/// each boundary.
std::vector<double> envelope(const StageAmplitudes& level, const StageSegmentation& seg, double fs,
                             double transition_s) {
  const Eigen::Index n = seg.trial_length();
  std::vector<double> env(static_cast<std::size_t>(n));
  const double half = 0.5 * transition_s * fs;
  for (Eigen::Index i = 0; i < n; ++i) {
    double v = level[static_cast<std::size_t>(seg.stage_at(i))];
    for (int b = 0; b < 3; ++b) {
      const double d = static_cast<double>(i - seg.boundaries()[static_cast<std::size_t>(b)]);
      if (half > 0.0 && std::abs(d) < half) {
        const double from = level[static_cast<std::size_t>(b)];
        const double to = level[static_cast<std::size_t>(b) + 1];
        const double t = 0.5 - 0.5 * std::cos(std::numbers::pi * (d + half) / (2.0 * half));
        v = from + (to - from) * t;
      }
    }
    env[static_cast<std::size_t>(i)] = v;
  }
  return env;
}

StageAmplitudes jittered(const StageAmplitudes& base, double sigma, Rng& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  StageAmplitudes out{};
  for (std::size_t s = 0; s < out.size(); ++s) out[s] = base[s] * std::exp(sigma * g(rng));
  return out;
}

}  // namespace

Trial generate_trial(const GeneratorConfig& cfg, int trial_id) {
  cfg.validate();
  const auto tid = static_cast<std::uint64_t>(static_cast<std::int64_t>(trial_id));
  Trial trial;
  trial.trial_id = trial_id;
  trial.source = cfg.source;

  {
    const double fs = cfg.eeg_rate_hz;
    const auto n = static_cast<Eigen::Index>(std::llround(cfg.trial_length_s * fs));
    const auto seg = StageSegmentation::from_seconds(cfg.boundaries_s, fs, n);
    const dsp::BandpassDesign alpha_band(8.0, 12.0, 4, fs);
    const dsp::BandpassDesign beta_band(13.0, 30.0, 4, fs);
    const dsp::BandpassDesign background_band(1.0, 45.0, 2, fs);
    const auto channels = static_cast<Eigen::Index>(cfg.eeg_channels.size());
    Eigen::MatrixXd x(channels, n);
    for (Eigen::Index c = 0; c < channels; ++c) {
      const auto uc = static_cast<std::uint64_t>(c);
      const auto cs = static_cast<std::size_t>(c);
      Rng jitter = make_rng(cfg.seed, {0xEE, tid, uc, kJitter});
      const auto a_env = envelope(jittered(cfg.eeg_alpha[cs], cfg.class_sigma, jitter), seg, fs, cfg.transition_s);
      const auto b_env = envelope(jittered(cfg.eeg_beta[cs], cfg.class_sigma, jitter), seg, fs, cfg.transition_s);
      Rng ra = make_rng(cfg.seed, {0xEE, tid, uc, kAlpha});
      Rng rb = make_rng(cfg.seed, {0xEE, tid, uc, kBeta});
      Rng rg = make_rng(cfg.seed, {0xEE, tid, uc, kBackground});
      Rng rs = make_rng(cfg.seed, {0xEE, tid, uc, kSensor});
      const auto alpha = carrier(ra, n, alpha_band);
      const auto beta = carrier(rb, n, beta_band);
      const auto background = carrier(rg, n, background_band);
      const auto sensor = white(rs, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        x(c, i) = a_env[ui] * alpha[ui] + b_env[ui] * beta[ui] + cfg.eeg_background * background[ui] +
                  cfg.eeg_sensor_noise * sensor[ui];
      }
    }
    trial.eeg = LabeledRecording{Recording(Modality::Eeg, cfg.eeg_channels, fs, std::move(x), trial_id), seg};
  }

  {
    const double fs = cfg.emg_rate_hz;
    const auto n = static_cast<Eigen::Index>(std::llround(cfg.trial_length_s * fs));
    const auto seg = StageSegmentation::from_seconds(cfg.boundaries_s, fs, n);
    const dsp::BandpassDesign band(20.0, 450.0, 4, fs);
    const auto channels = static_cast<Eigen::Index>(cfg.emg_channels.size());
    Eigen::MatrixXd x(channels, n);
    for (Eigen::Index c = 0; c < channels; ++c) {
      const auto uc = static_cast<std::uint64_t>(c);
      Rng jitter = make_rng(cfg.seed, {0xE3, tid, uc, kJitter});
      StageAmplitudes level = jittered(cfg.emg_burst[static_cast<std::size_t>(c)], cfg.class_sigma, jitter);
      for (auto& v : level) v += cfg.emg_rest_level;
      const auto env = envelope(level, seg, fs, cfg.transition_s);
      Rng rn = make_rng(cfg.seed, {0xE3, tid, uc, kEmg});
      const auto source = carrier(rn, n, band);
      for (Eigen::Index i = 0; i < n; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        x(c, i) = env[ui] * source[ui];
      }
    }
    trial.emg = LabeledRecording{Recording(Modality::Emg, cfg.emg_channels, fs, std::move(x), trial_id), seg};
  }
  return trial;
}

std::vector<Trial> generate_dataset(const GeneratorConfig& cfg) {
  cfg.validate();
  std::vector<Trial> out;
  out.reserve(static_cast<std::size_t>(cfg.trial_count));
  for (int t = 0; t < cfg.trial_count; ++t) out.push_back(generate_trial(cfg, t));
  return out;
}

Recording add_gaussian_noise(const Recording& rec, double alpha, const NoisinessBaseline& baseline,
                             std::uint64_t seed) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("noise alpha must be >= 0");
  if (baseline.modality != rec.modality()) {
    throw DataError("noise baseline is for " + std::string(to_string(baseline.modality)) +
                    " but trial " + std::to_string(rec.trial_id()) + " is " +
                    std::string(to_string(rec.modality())));
  }
  if (alpha == 0.0) return rec;
  const double sigma = alpha * baseline.fluctuation;
  Eigen::MatrixXd x = rec.samples();
  const auto tid = static_cast<std::uint64_t>(static_cast<std::int64_t>(rec.trial_id()));
  for (Eigen::Index c = 0; c < x.rows(); ++c) {
    Rng rng = make_rng(seed, {0x4015E, tid, static_cast<std::uint64_t>(c)});
    std::normal_distribution<double> g(0.0, sigma);
    for (Eigen::Index i = 0; i < x.cols(); ++i) x(c, i) += g(rng);
  }
  return rec.with_samples(std::move(x));
}

}  // namespace biofuse
