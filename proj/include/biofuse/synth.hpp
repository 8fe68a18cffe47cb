#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "biofuse/fusion.hpp"
#include "biofuse/signal_model.hpp"
#include "biofuse/trial_io.hpp"

namespace biofuse {

using StageAmplitudes = std::array<double, kStageCount>;

/// Synthetic four-stage trials. EEG channels mix unit-variance 8-12 Hz and
/// 13-30 Hz filtered-noise carriers scaled per stage, over a broadband
/// background. EMG channels are 20-450 Hz noise under a stage-gated
/// envelope. Amplitudes ramp between stages over `transition_s`.
struct GeneratorConfig {
  int trial_count = 40;
  double trial_length_s = 10.0;
  std::array<double, 3> boundaries_s{2.0, 4.5, 7.5};
  double eeg_rate_hz = 500.0;
  double emg_rate_hz = 4000.0;
  double transition_s = 0.1;

  std::vector<std::string> eeg_channels = eeg_preset_channels();
  std::vector<StageAmplitudes> eeg_alpha;  // per channel
  std::vector<StageAmplitudes> eeg_beta;
  double eeg_background = 2.5;  // std of the 1-45 Hz background
  double eeg_sensor_noise = 0.5;

  std::vector<std::string> emg_channels = emg_preset_channels();
  std::vector<StageAmplitudes> emg_burst;
  double emg_rest_level = 0.05;

  /// Std of the log-normal jitter applied to every (trial, channel, stage)
  /// amplitude. Larger values make the stages harder to separate.
  double class_sigma = 0.1;

  std::uint64_t seed = 0;
  std::string source = "synthetic";

  GeneratorConfig();
  /// Throws ConfigError on inconsistent fields.
  void validate() const;
};

Trial generate_trial(const GeneratorConfig& cfg, int trial_id);
std::vector<Trial> generate_dataset(const GeneratorConfig& cfg);

/// Adds i.i.d. zero-mean Gaussian noise with std alpha * baseline
/// fluctuation. Each channel draws from a stream keyed by (seed, trial id,
/// channel index).
Recording add_gaussian_noise(const Recording& rec, double alpha, const NoisinessBaseline& baseline,
                             std::uint64_t seed);

}  // namespace biofuse
