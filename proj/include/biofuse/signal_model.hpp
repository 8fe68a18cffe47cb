#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace biofuse {

enum class Modality { Eeg, Emg };

std::string_view to_string(Modality m);
Modality parse_modality(std::string_view text);

inline constexpr int kStageCount = 4;
inline constexpr std::array<std::string_view, kStageCount> kStageNames = {
    "resting", "extension", "lifting", "flexion"};

const std::vector<std::string>& eeg_preset_channels();
const std::vector<std::string>& emg_preset_channels();
const std::vector<std::string>& preset_channels(Modality m);

/// One trial of one modality. Samples are stored channels x time.
class Recording {
 public:
  Recording() = default;
  Recording(Modality modality, std::vector<std::string> channel_names, double sampling_rate_hz,
            Eigen::MatrixXd samples, int trial_id);

  Modality modality() const { return modality_; }
  const std::vector<std::string>& channel_names() const { return channel_names_; }
  double sampling_rate_hz() const { return sampling_rate_hz_; }
  const Eigen::MatrixXd& samples() const { return samples_; }
  int trial_id() const { return trial_id_; }

  Eigen::Index channel_count() const { return samples_.rows(); }
  Eigen::Index length() const { return samples_.cols(); }
  double duration_s() const { return static_cast<double>(length()) / sampling_rate_hz_; }

  std::optional<Eigen::Index> find_channel(std::string_view name) const;
  /// Throws DataError naming the channel and trial when absent.
  Eigen::Index channel_index(std::string_view name) const;
  std::vector<double> channel(Eigen::Index index) const;

  Recording with_samples(Eigen::MatrixXd samples) const;
  Recording cropped(Eigen::Index length) const;
  Recording select_channels(std::span<const std::string> names) const;

 private:
  Modality modality_ = Modality::Eeg;
  std::vector<std::string> channel_names_;
  double sampling_rate_hz_ = 1.0;
  Eigen::MatrixXd samples_;
  int trial_id_ = 0;
};

/// Three boundary sample indices splitting a trial into the four stages.
/// A boundary sample belongs to the later stage.
class StageSegmentation {
 public:
  StageSegmentation() = default;
  StageSegmentation(std::array<Eigen::Index, 3> boundaries, Eigen::Index trial_length);

  const std::array<Eigen::Index, 3>& boundaries() const { return boundaries_; }
  Eigen::Index trial_length() const { return trial_length_; }
  int stage_at(Eigen::Index sample) const;

  static StageSegmentation from_seconds(std::array<double, 3> boundaries_s, double sampling_rate_hz,
                                        Eigen::Index trial_length);

 private:
  std::array<Eigen::Index, 3> boundaries_{1, 2, 3};
  Eigen::Index trial_length_ = 4;
};

/// A recording together with the stage boundaries that label its samples.
struct LabeledRecording {
  Recording recording;
  StageSegmentation stages;
};

struct WindowSpec {
  double width_s = 0.1;
  double overlap_s = 0.08;

  double step_s() const { return width_s - overlap_s; }
};

inline constexpr WindowSpec kEegWindow{0.1, 0.08};
inline constexpr WindowSpec kEmgWindow{0.2, 0.15};

/// WindowSpec resolved against a sampling rate.
struct WindowSamples {
  Eigen::Index width = 0;
  Eigen::Index step = 0;
  /// Non-empty when seconds-to-samples rounding deviates by more than 1%.
  std::string warning;
};

WindowSamples resolve_window(const WindowSpec& spec, double sampling_rate_hz);

/// Number of windows of width W and step S that fit in L samples.
Eigen::Index window_count(Eigen::Index length, Eigen::Index width, Eigen::Index step);

struct Window {
  std::string channel;
  std::vector<double> samples;
  Eigen::Index start_index = 0;
  int label = 0;
};

/// Windows per channel, in channel order then increasing start order.
/// Labels are left at 0; see label_window.
std::vector<std::vector<Window>> slide_windows(const Recording& rec, const WindowSpec& spec);

int label_window(Eigen::Index start_index, Eigen::Index width, const StageSegmentation& seg);
int label_window(const Window& w, const StageSegmentation& seg);

struct FeatureMatrix {
  std::vector<std::string> feature_names;
  Eigen::MatrixXd rows;  // windows x features
  std::vector<int> labels;
  std::vector<int> trial_ids;
  std::vector<Eigen::Index> window_starts;

  Eigen::Index row_count() const { return rows.rows(); }
  Eigen::Index feature_count() const { return rows.cols(); }

  /// Throws DataError on shape mismatches or non-finite entries.
  void validate() const;

  FeatureMatrix select_rows(std::span<const Eigen::Index> indices) const;
  FeatureMatrix select_columns(std::span<const std::string> names) const;
  std::vector<int> distinct_trials() const;

  static FeatureMatrix concat_rows(std::span<const FeatureMatrix> parts);
};

class Scaler {
 public:
  static Scaler fit(const FeatureMatrix& train);

  FeatureMatrix apply(const FeatureMatrix& m) const;
  Eigen::MatrixXd apply(const Eigen::MatrixXd& rows) const;

  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::VectorXd& stddev() const { return stddev_; }

  Scaler() = default;
  Scaler(std::vector<std::string> names, Eigen::VectorXd mean, Eigen::VectorXd stddev);

 private:
  std::vector<std::string> feature_names_;
  Eigen::VectorXd mean_;
  Eigen::VectorXd stddev_;
};

inline Scaler fit_scaler(const FeatureMatrix& train) { return Scaler::fit(train); }
inline FeatureMatrix apply_scaler(const Scaler& s, const FeatureMatrix& m) { return s.apply(m); }

/// Partitions distinct trial ids into k folds after a seeded shuffle. The
/// first (n mod k) folds hold one extra trial.
std::vector<std::vector<int>> split_trials(std::vector<int> trial_ids, int fold_count,
                                           std::uint64_t seed);

}  // namespace biofuse
