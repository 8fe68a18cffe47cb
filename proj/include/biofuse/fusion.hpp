#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "biofuse/classifier.hpp"
#include "biofuse/features.hpp"
#include "biofuse/signal_model.hpp"
#include "biofuse/trial_io.hpp"

namespace biofuse {

struct FusionWeights {
  double eeg = 0.5;
  double emg = 0.5;
};

/// w_eeg = a_eeg / (a_eeg + a_emg); w_emg = 1 - w_eeg.
FusionWeights fusion_weights(double accuracy_eeg, double accuracy_emg);

/// Mean absolute successive difference of one recording, averaged over
/// channels.
double mean_fluctuation(const Recording& rec);

struct NoisinessBaseline {
  Modality modality = Modality::Eeg;
  double fluctuation = 0.0;
};

/// Mean over training trials of mean_fluctuation. Throws DataError when the
/// result is zero.
NoisinessBaseline noisiness_baseline(std::span<const Recording> training);
NoisinessBaseline noisiness_baseline(std::span<const LabeledRecording> training);

/// N of an unseen trial; 0 for a constant trial.
double noisiness(const Recording& unseen, const NoisinessBaseline& baseline);

struct SourceDecision {
  Modality modality = Modality::Eeg;
  std::vector<double> proba;
  double noisiness = 1.0;
};

struct FusionResult {
  int label = 0;
  Modality chosen = Modality::Emg;
  double truthiness_eeg = 0.0;
  double truthiness_emg = 0.0;
  bool tie = false;
};

/// Truthiness w / N per source (+inf when N = 0). Equal truthiness goes to
/// the higher weight, then to EMG.
Modality choose_source(const FusionWeights& w, double n_eeg, double n_emg, bool* tie = nullptr);

/// Picks a source with choose_source and returns the argmax of its
/// probabilities.
FusionResult fuse(const SourceDecision& eeg, const SourceDecision& emg, const FusionWeights& w);

// ---------------------------------------------------------------------------
// Noise scenarios

enum class NoiseCase { Clean, EegNoise, EmgNoise, BothNoise };

std::string_view to_string(NoiseCase c);
NoiseCase parse_noise_case(std::string_view text);

struct FusionScenarioConfig {
  features::EegFeatureConfig eeg_features{};
  features::EmgFeatureConfig emg_features{};
  ClassifierSpec eeg_classifier{};
  ClassifierSpec emg_classifier{};
  int folds = 10;
  double noise_alpha = 3.0;
  std::vector<NoiseCase> cases{NoiseCase::Clean, NoiseCase::EegNoise, NoiseCase::EmgNoise,
                               NoiseCase::BothNoise};
  std::uint64_t seed = 0;
  int class_count = kStageCount;
};

struct ScenarioRow {
  NoiseCase noise_case = NoiseCase::Clean;
  double noise_alpha = 0.0;
  double acc_eeg = 0.0;
  double acc_emg = 0.0;
  double acc_fused = 0.0;
  double mean_n_eeg = 0.0;
  double mean_n_emg = 0.0;
  int trials_choosing_eeg = 0;
  int trials_choosing_emg = 0;
};

struct FusionScenarioReport {
  FusionWeights weights;
  double clean_acc_eeg = 0.0;
  double clean_acc_emg = 0.0;
  std::vector<ScenarioRow> rows;
};

/// Cross-validated scenario run. In every fold both classifiers and both
/// noisiness baselines are fitted on the clean training trials; the held-out
/// trials are then scored clean and with Gaussian noise injected into the
/// modalities named by each case. Weights come from the clean CV accuracies.
/// Fusion picks one source per trial, and accuracies are pooled over the
/// samples of the scored source.
FusionScenarioReport run_fusion_scenarios(std::span<const Trial> trials, const FusionScenarioConfig& cfg);

void write_scenario_csv(const std::filesystem::path& path, const FusionScenarioReport& report);

}  // namespace biofuse
