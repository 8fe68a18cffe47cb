#include "biofuse/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <stdexcept>
#include <unordered_map>

#include "biofuse/errors.hpp"
#include "biofuse/random.hpp"

namespace biofuse {

std::string_view to_string(Modality m) { return m == Modality::Eeg ? "eeg" : "emg"; }

Modality parse_modality(std::string_view text) {
  if (text == "eeg" || text == "EEG") return Modality::Eeg;
  if (text == "emg" || text == "EMG") return Modality::Emg;
  throw ConfigError("unknown modality '" + std::string(text) + "' (expected eeg or emg)");
}

const std::vector<std::string>& eeg_preset_channels() {
  static const std::vector<std::string> names = {"C3", "C4", "Cz", "CP1", "CP2", "CP5", "CP6"};
  return names;
}

const std::vector<std::string>& emg_preset_channels() {
  static const std::vector<std::string> names = {
      "Anterior Deltoid", "Brachioradialis", "Flexor Digitorum Profundis",
      "Common Extensor Digitorum", "First Dorsal Interosseous"};
  return names;
}

const std::vector<std::string>& preset_channels(Modality m) {
  return m == Modality::Eeg ? eeg_preset_channels() : emg_preset_channels();
}

Recording::Recording(Modality modality, std::vector<std::string> channel_names,
                     double sampling_rate_hz, Eigen::MatrixXd samples, int trial_id)
    : modality_(modality),
      channel_names_(std::move(channel_names)),
      sampling_rate_hz_(sampling_rate_hz),
      samples_(std::move(samples)),
      trial_id_(trial_id) {
  if (!(sampling_rate_hz_ > 0.0) || !std::isfinite(sampling_rate_hz_)) {
    throw std::invalid_argument("sampling rate must be positive");
  }
  if (static_cast<Eigen::Index>(channel_names_.size()) != samples_.rows()) {
    throw DataError("trial " + std::to_string(trial_id_) + ": " +
                    std::to_string(channel_names_.size()) + " channel names for " +
                    std::to_string(samples_.rows()) + " channels");
  }
}

std::optional<Eigen::Index> Recording::find_channel(std::string_view name) const {
  for (std::size_t i = 0; i < channel_names_.size(); ++i) {
    if (channel_names_[i] == name) return static_cast<Eigen::Index>(i);
  }
  return std::nullopt;
}

Eigen::Index Recording::channel_index(std::string_view name) const {
  if (auto idx = find_channel(name)) return *idx;
  throw DataError("trial " + std::to_string(trial_id_) + " (" + std::string(to_string(modality_)) +
                  "): missing channel '" + std::string(name) + "'");
}

std::vector<double> Recording::channel(Eigen::Index index) const {
  std::vector<double> out(static_cast<std::size_t>(length()));
  for (Eigen::Index t = 0; t < length(); ++t) out[static_cast<std::size_t>(t)] = samples_(index, t);
  return out;
}

Recording Recording::with_samples(Eigen::MatrixXd samples) const {
  return Recording(modality_, channel_names_, sampling_rate_hz_, std::move(samples), trial_id_);
}

Recording Recording::cropped(Eigen::Index length) const {
  if (length > this->length() || length < 0) {
    throw std::invalid_argument("crop length exceeds recording length");
  }
  return with_samples(samples_.leftCols(length));
}

Recording Recording::select_channels(std::span<const std::string> names) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(names.size()), length());
  for (std::size_t i = 0; i < names.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = samples_.row(channel_index(names[i]));
  }
  return Recording(modality_, std::vector<std::string>(names.begin(), names.end()),
                   sampling_rate_hz_, std::move(out), trial_id_);
}

StageSegmentation::StageSegmentation(std::array<Eigen::Index, 3> boundaries,
                                     Eigen::Index trial_length)
    : boundaries_(boundaries), trial_length_(trial_length) {
  if (!(0 < boundaries[0] && boundaries[0] < boundaries[1] && boundaries[1] < boundaries[2] &&
        boundaries[2] < trial_length)) {
    throw DataError("stage boundaries must satisfy 0 < b1 < b2 < b3 < trial length");
  }
}

int StageSegmentation::stage_at(Eigen::Index sample) const {
  int stage = 0;
  for (Eigen::Index b : boundaries_) {
    if (sample >= b) ++stage;
  }
  return stage;
}

StageSegmentation StageSegmentation::from_seconds(std::array<double, 3> boundaries_s,
                                                  double sampling_rate_hz,
                                                  Eigen::Index trial_length) {
  std::array<Eigen::Index, 3> b{};
  for (std::size_t i = 0; i < 3; ++i) {
    b[i] = static_cast<Eigen::Index>(std::llround(boundaries_s[i] * sampling_rate_hz));
  }
  return StageSegmentation(b, trial_length);
}

WindowSamples resolve_window(const WindowSpec& spec, double sampling_rate_hz) {
  if (!(spec.width_s > 0.0) || !(spec.overlap_s >= 0.0) || !(spec.overlap_s < spec.width_s)) {
    throw ConfigError("window spec requires 0 <= overlap < width");
  }
  WindowSamples out;
  const double width_exact = spec.width_s * sampling_rate_hz;
  const double step_exact = spec.step_s() * sampling_rate_hz;
  out.width = static_cast<Eigen::Index>(std::llround(width_exact));
  out.step = static_cast<Eigen::Index>(std::llround(step_exact));
  if (out.width < 2) throw ConfigError("window width must cover at least 2 samples");
  if (out.step < 1) throw ConfigError("window step must cover at least 1 sample");
  auto rel = [](double exact, Eigen::Index rounded) {
    return std::abs(static_cast<double>(rounded) - exact) / exact;
  };
  if (rel(width_exact, out.width) > 0.01 || rel(step_exact, out.step) > 0.01) {
    out.warning = "window of " + std::to_string(spec.width_s) + " s / step " +
                  std::to_string(spec.step_s()) + " s does not map to whole samples at " +
                  std::to_string(sampling_rate_hz) + " Hz (rounded to " +
                  std::to_string(out.width) + "/" + std::to_string(out.step) + ")";
  }
  return out;
}

Eigen::Index window_count(Eigen::Index length, Eigen::Index width, Eigen::Index step) {
  if (length < width) return 0;
  return (length - width) / step + 1;
}

std::vector<std::vector<Window>> slide_windows(const Recording& rec, const WindowSpec& spec) {
  const WindowSamples ws = resolve_window(spec, rec.sampling_rate_hz());
  const Eigen::Index count = window_count(rec.length(), ws.width, ws.step);
  if (count == 0) {
    throw DataError("trial " + std::to_string(rec.trial_id()) + " has " +
                    std::to_string(rec.length()) + " samples, shorter than one window of " +
                    std::to_string(ws.width));
  }
  std::vector<std::vector<Window>> out(static_cast<std::size_t>(rec.channel_count()));
  for (Eigen::Index c = 0; c < rec.channel_count(); ++c) {
    auto& windows = out[static_cast<std::size_t>(c)];
    windows.reserve(static_cast<std::size_t>(count));
    for (Eigen::Index k = 0; k < count; ++k) {
      Window w;
      w.channel = rec.channel_names()[static_cast<std::size_t>(c)];
      w.start_index = k * ws.step;
      w.samples.resize(static_cast<std::size_t>(ws.width));
      for (Eigen::Index i = 0; i < ws.width; ++i) {
        w.samples[static_cast<std::size_t>(i)] = rec.samples()(c, w.start_index + i);
      }
      windows.push_back(std::move(w));
    }
  }
  return out;
}

int label_window(Eigen::Index start_index, Eigen::Index width, const StageSegmentation& seg) {
  return seg.stage_at(start_index + width / 2);
}

int label_window(const Window& w, const StageSegmentation& seg) {
  return label_window(w.start_index, static_cast<Eigen::Index>(w.samples.size()), seg);
}

void FeatureMatrix::validate() const {
  const auto n = static_cast<std::size_t>(rows.rows());
  if (labels.size() != n || trial_ids.size() != n || window_starts.size() != n) {
    throw DataError("feature matrix: row, label, trial and window counts disagree");
  }
  if (static_cast<Eigen::Index>(feature_names.size()) != rows.cols()) {
    throw DataError("feature matrix: header has " + std::to_string(feature_names.size()) +
                    " names for " + std::to_string(rows.cols()) + " columns");
  }
  std::set<std::string> unique(feature_names.begin(), feature_names.end());
  if (unique.size() != feature_names.size()) throw DataError("feature matrix: duplicate names");
  if (!rows.allFinite()) {
    for (Eigen::Index r = 0; r < rows.rows(); ++r) {
      for (Eigen::Index c = 0; c < rows.cols(); ++c) {
        if (!std::isfinite(rows(r, c))) {
          throw DataError("feature matrix: non-finite value in column '" +
                          feature_names[static_cast<std::size_t>(c)] + "' (trial " +
                          std::to_string(trial_ids[static_cast<std::size_t>(r)]) + ")");
        }
      }
    }
  }
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const Eigen::Index> indices) const {
  FeatureMatrix out;
  out.feature_names = feature_names;
  out.rows.resize(static_cast<Eigen::Index>(indices.size()), rows.cols());
  out.labels.reserve(indices.size());
  out.trial_ids.reserve(indices.size());
  out.window_starts.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const Eigen::Index r = indices[i];
    out.rows.row(static_cast<Eigen::Index>(i)) = rows.row(r);
    out.labels.push_back(labels[static_cast<std::size_t>(r)]);
    out.trial_ids.push_back(trial_ids[static_cast<std::size_t>(r)]);
    out.window_starts.push_back(window_starts[static_cast<std::size_t>(r)]);
  }
  return out;
}

FeatureMatrix FeatureMatrix::select_columns(std::span<const std::string> names) const {
  std::unordered_map<std::string, Eigen::Index> index;
  for (std::size_t i = 0; i < feature_names.size(); ++i) {
    index.emplace(feature_names[i], static_cast<Eigen::Index>(i));
  }
  FeatureMatrix out;
  out.feature_names.assign(names.begin(), names.end());
  out.rows.resize(rows.rows(), static_cast<Eigen::Index>(names.size()));
  for (std::size_t j = 0; j < names.size(); ++j) {
    auto it = index.find(names[j]);
    if (it == index.end()) throw DataError("feature matrix has no column '" + names[j] + "'");
    out.rows.col(static_cast<Eigen::Index>(j)) = rows.col(it->second);
  }
  out.labels = labels;
  out.trial_ids = trial_ids;
  out.window_starts = window_starts;
  return out;
}

std::vector<int> FeatureMatrix::distinct_trials() const {
  std::vector<int> ids = trial_ids;
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

FeatureMatrix FeatureMatrix::concat_rows(std::span<const FeatureMatrix> parts) {
  FeatureMatrix out;
  if (parts.empty()) return out;
  out.feature_names = parts.front().feature_names;
  Eigen::Index total = 0;
  for (const auto& p : parts) {
    if (p.feature_names != out.feature_names) {
      throw DataError("cannot concatenate feature matrices with different columns");
    }
    total += p.row_count();
  }
  out.rows.resize(total, static_cast<Eigen::Index>(out.feature_names.size()));
  Eigen::Index r = 0;
  for (const auto& p : parts) {
    out.rows.middleRows(r, p.row_count()) = p.rows;
    r += p.row_count();
    out.labels.insert(out.labels.end(), p.labels.begin(), p.labels.end());
    out.trial_ids.insert(out.trial_ids.end(), p.trial_ids.begin(), p.trial_ids.end());
    out.window_starts.insert(out.window_starts.end(), p.window_starts.begin(),
                             p.window_starts.end());
  }
  return out;
}

Scaler::Scaler(std::vector<std::string> names, Eigen::VectorXd mean, Eigen::VectorXd stddev)
    : feature_names_(std::move(names)), mean_(std::move(mean)), stddev_(std::move(stddev)) {
  if (mean_.size() != static_cast<Eigen::Index>(feature_names_.size()) ||
      stddev_.size() != mean_.size()) {
    throw DataError("scaler: parameter sizes disagree with feature names");
  }
}

Scaler Scaler::fit(const FeatureMatrix& train) {
  if (train.row_count() == 0) throw std::invalid_argument("cannot fit a scaler on zero rows");
  const double n = static_cast<double>(train.row_count());
  Eigen::VectorXd mean = train.rows.colwise().sum().transpose() / n;
  Eigen::VectorXd sd(train.feature_count());
  for (Eigen::Index c = 0; c < train.feature_count(); ++c) {
    const double var = (train.rows.col(c).array() - mean(c)).square().sum() / n;
    const double s = std::sqrt(var);
    sd(c) = s < 1e-12 ? 1.0 : s;
  }
  return Scaler(train.feature_names, std::move(mean), std::move(sd));
}

Eigen::MatrixXd Scaler::apply(const Eigen::MatrixXd& rows) const {
  if (rows.cols() != mean_.size()) throw DataError("scaler: column count mismatch");
  Eigen::MatrixXd out = rows;
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    out.col(c) = (out.col(c).array() - mean_(c)) / stddev_(c);
  }
  return out;
}

FeatureMatrix Scaler::apply(const FeatureMatrix& m) const {
  if (m.feature_names != feature_names_) {
    throw DataError("scaler was fitted on different feature columns");
  }
  FeatureMatrix out = m;
  out.rows = apply(m.rows);
  return out;
}

std::vector<std::vector<int>> split_trials(std::vector<int> trial_ids, int fold_count,
                                           std::uint64_t seed) {
  std::sort(trial_ids.begin(), trial_ids.end());
  trial_ids.erase(std::unique(trial_ids.begin(), trial_ids.end()), trial_ids.end());
  const int n = static_cast<int>(trial_ids.size());
  if (fold_count < 2 || fold_count > n) {
    throw std::invalid_argument("fold count " + std::to_string(fold_count) +
                                " must lie in [2, " + std::to_string(n) + "]");
  }
  Rng rng = make_rng(seed, {0x5f1d});
  std::shuffle(trial_ids.begin(), trial_ids.end(), rng);
  std::vector<std::vector<int>> folds(static_cast<std::size_t>(fold_count));
  const int base = n / fold_count;
  const int extra = n % fold_count;
  int pos = 0;
  for (int f = 0; f < fold_count; ++f) {
    const int size = base + (f < extra ? 1 : 0);
    folds[static_cast<std::size_t>(f)].assign(trial_ids.begin() + pos,
                                              trial_ids.begin() + pos + size);
    std::sort(folds[static_cast<std::size_t>(f)].begin(), folds[static_cast<std::size_t>(f)].end());
    pos += size;
  }
  return folds;
}

}  // namespace biofuse
