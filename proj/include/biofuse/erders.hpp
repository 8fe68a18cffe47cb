#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "biofuse/cross_validation.hpp"
#include "biofuse/features.hpp"
#include "biofuse/signal_model.hpp"

namespace biofuse {

struct ErdErsConfig {
  features::Band band = features::kBetaBand;
  double baseline_start_s = 1.0;
  double baseline_end_s = 2.0;
  int filter_order = 5;
  /// Smoothing window in seconds, rounded to an odd sample count.
  double smooth_window_s = 0.5;
  int smooth_polyorder = 3;
  /// Removed from both ends of the reported curve. Covers the filter
  /// transient and the smoother's half window.
  double edge_trim_s = 0.3;
};

struct ErdErsCurve {
  std::vector<double> time_s;
  std::vector<double> percent_change;
  features::Band band;
  std::string channel;
  int trial_count = 0;
  double reference_power = 0.0;
};

/// Band-power time course of one channel: bandpass, square, average over
/// trials cropped to their common length, smooth, then percent change
/// against the mean power of the baseline interval.
ErdErsCurve erd_ers_curve(std::span<const Recording> trials, const std::string& channel,
                          const ErdErsConfig& cfg = {});
ErdErsCurve erd_ers_curve(std::span<const LabeledRecording> trials, const std::string& channel,
                          const ErdErsConfig& cfg = {});

void write_curve_csv(const std::filesystem::path& path, const ErdErsCurve& curve);

/// Cross-validated EEG pipeline restricted to `channels`.
CrossValidationReport channel_reduction_eval(std::span<const LabeledRecording> trials,
                                             const std::vector<std::string>& channels,
                                             const ClassifierSpec& spec, const CvOptions& options,
                                             features::EegFeatureConfig features = {});

}  // namespace biofuse
