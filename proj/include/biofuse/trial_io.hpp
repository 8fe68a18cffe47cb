#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "biofuse/signal_model.hpp"

namespace biofuse {

/// One trial as stored on disk: `trial_<id>_eeg.csv`, `trial_<id>_emg.csv`
/// and the `trial_<id>_meta.json` sidecar.
struct Trial {
  int trial_id = 0;
  std::string source = "unknown";
  std::optional<LabeledRecording> eeg;
  std::optional<LabeledRecording> emg;

  const LabeledRecording& get(Modality m) const;
};

inline constexpr int kTrialMetaVersion = 1;

std::filesystem::path trial_csv_path(const std::filesystem::path& dir, int trial_id, Modality m);
std::filesystem::path trial_meta_path(const std::filesystem::path& dir, int trial_id);

/// Samples are written in fixed-point notation with `decimals` digits.
void write_recording_csv(const std::filesystem::path& path, const Recording& rec,
                         int decimals = 6);
Eigen::MatrixXd read_samples_csv(const std::filesystem::path& path,
                                 std::vector<std::string>& channel_names);

void write_trial(const std::filesystem::path& dir, const Trial& trial, int decimals = 6);
Trial read_trial(const std::filesystem::path& dir, int trial_id);

/// Trial ids that have a metadata sidecar in `dir`, ascending.
std::vector<int> list_trials(const std::filesystem::path& dir);

/// Every trial in `dir` for one modality, in ascending trial order.
std::vector<LabeledRecording> load_modality(const std::filesystem::path& dir, Modality m);

}  // namespace biofuse
