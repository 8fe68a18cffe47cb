#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "biofuse/dsp.hpp"
#include "biofuse/signal_model.hpp"

namespace biofuse::features {

double mav(std::span<const double> w);
double variance(std::span<const double> w);
double std_dev(std::span<const double> w);
double waveform_length(std::span<const double> w);

/// Count of successive absolute differences at or above `threshold`.
int willison_amplitude(std::span<const double> w, double threshold);

/// Differences of consecutive window MAVs; length K - 1.
std::vector<double> mav_slope(std::span<const double> window_mavs);

struct ArFit {
  std::vector<double> coefficients;  // a_1 .. a_P
  bool degenerate = false;           // constant or rank-deficient window
};

/// Ordinary least squares fit of x_i on (x_{i-1}, ..., x_{i-P}), no intercept.
ArFit ar_coefficients(std::span<const double> w, int order);

struct Band {
  double low_hz = 0.0;
  double high_hz = 0.0;
};

inline constexpr Band kAlphaBand{8.0, 12.0};
inline constexpr Band kBetaBand{12.0, 30.0};

/// Simpson integral of the PSD over [low, high]. Values at the band edges
/// are linearly interpolated between neighbouring bins.
double subband_power(const dsp::PsdEstimate& psd, Band band);

struct PeakPsd {
  double power = 0.0;
  double freq_hz = 0.0;
};

/// Largest PSD value at or above `low_cut_hz`; the lowest frequency wins
/// ties. Throws DataError when no such bin carries power.
PeakPsd peak_psd(const dsp::PsdEstimate& psd, double low_cut_hz = 1.0);

/// Sum of |X_k|^2 over all N DFT bins, which equals N * sum(x^2).
double spectral_energy(std::span<const double> w);

struct DwtEnergies {
  double approx = 0.0;  // log(1 + sum cA^2)
  double detail = 0.0;  // log(1 + sum cD^2)
};

DwtEnergies dwt_features(std::span<const double> w);

// ---------------------------------------------------------------------------
// Preset pipelines

inline const std::vector<std::string> kEegFeatureNames = {
    "MAV", "SD", "V", "ASB_alpha", "ASB_beta", "PPSD", "FPPSD", "SE", "E_cA", "E_cD"};
inline const std::vector<std::string> kEmgFeatureNames = {"MAV", "WL", "WA", "MAS", "AR1"};

struct EegFeatureConfig {
  WindowSpec window = kEegWindow;
  Band alpha = kAlphaBand;
  Band beta = kBetaBand;
  double low_cut_hz = 1.0;
  /// Lowest frequency the Welch segment should resolve with two cycles.
  double welch_low_freq_hz = 8.0;
  /// Zero-padded FFT length for the per-window PSD (0 = segment length).
  std::size_t nfft = 256;
  std::vector<std::string> channels = eeg_preset_channels();
};

struct EmgFeatureConfig {
  WindowSpec window = kEmgWindow;
  int ar_order = 4;
  /// Absolute Willison threshold for every channel. When unset, thresholds
  /// come from fit_willison_thresholds on the training trials.
  std::optional<double> willison_threshold;
  std::vector<std::string> channels = emg_preset_channels();
};

/// Column names `<channel>_<feature>`, channel-major.
std::vector<std::string> feature_column_names(std::span<const std::string> channels,
                                              std::span<const std::string> features);

FeatureMatrix extract_eeg_features(const LabeledRecording& rec, const EegFeatureConfig& cfg = {});

/// `thresholds` holds one Willison threshold per configured channel.
FeatureMatrix extract_emg_features(const LabeledRecording& rec, const EmgFeatureConfig& cfg,
                                   std::span<const double> thresholds);

/// Population standard deviation of resting-stage samples, per channel,
/// pooled over `trials`.
std::vector<double> fit_willison_thresholds(std::span<const LabeledRecording> trials,
                                            std::span<const std::string> channels);

/// Resolves thresholds for `cfg`: the absolute override when set, otherwise
/// fitted on `reference_trials`.
std::vector<double> resolve_willison_thresholds(const EmgFeatureConfig& cfg,
                                                std::span<const LabeledRecording> reference_trials);

FeatureMatrix extract_eeg_dataset(std::span<const LabeledRecording> trials,
                                  const EegFeatureConfig& cfg = {});
FeatureMatrix extract_emg_dataset(std::span<const LabeledRecording> trials,
                                  const EmgFeatureConfig& cfg, std::span<const double> thresholds);

}  // namespace biofuse::features
