#include "biofuse/features.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "biofuse/errors.hpp"

namespace biofuse::features {

namespace {

void require_non_empty(std::span<const double> w, const char* what) {
  if (w.empty()) throw std::invalid_argument(std::string(what) + ": empty window");
}

}  // namespace

double mav(std::span<const double> w) {
  require_non_empty(w, "mav");
  double s = 0.0;
  for (double v : w) s += std::abs(v);
  return s / static_cast<double>(w.size());
}

double variance(std::span<const double> w) {
  require_non_empty(w, "variance");
  double mean = 0.0;
  for (double v : w) mean += v;
  mean /= static_cast<double>(w.size());
  double ss = 0.0;
  for (double v : w) ss += (v - mean) * (v - mean);
  return ss / static_cast<double>(w.size());
}

double std_dev(std::span<const double> w) { return std::sqrt(variance(w)); }

double waveform_length(std::span<const double> w) {
  if (w.size() < 2) throw std::invalid_argument("waveform length needs at least 2 samples");
  double s = 0.0;
  for (std::size_t i = 1; i < w.size(); ++i) s += std::abs(w[i] - w[i - 1]);
  return s;
}

int willison_amplitude(std::span<const double> w, double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("willison threshold must be positive");
  if (w.size() < 2) throw std::invalid_argument("willison amplitude needs at least 2 samples");
  int count = 0;
  for (std::size_t i = 1; i < w.size(); ++i) {
    if (std::abs(w[i] - w[i - 1]) >= threshold) ++count;
  }
  return count;
}

std::vector<double> mav_slope(std::span<const double> window_mavs) {
  if (window_mavs.size() < 2) throw std::invalid_argument("mav slope needs at least 2 windows");
  std::vector<double> out(window_mavs.size() - 1);
  for (std::size_t k = 0; k + 1 < window_mavs.size(); ++k) {
    out[k] = window_mavs[k + 1] - window_mavs[k];
  }
  return out;
}

ArFit ar_coefficients(std::span<const double> w, int order) {
  if (order < 1) throw std::invalid_argument("AR order must be >= 1");
  const auto p = static_cast<std::size_t>(order);
  if (w.size() <= 3 * p) throw std::invalid_argument("AR fit needs more than 3P samples");
  ArFit fit;
  fit.coefficients.assign(p, 0.0);
  const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
  if (*lo == *hi) {
    fit.degenerate = true;
    return fit;
  }
  const auto rows = static_cast<Eigen::Index>(w.size() - p);
  Eigen::MatrixXd design(rows, order);
  Eigen::VectorXd target(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::size_t i = static_cast<std::size_t>(r) + p;
    target(r) = w[i];
    for (std::size_t lag = 1; lag <= p; ++lag) design(r, static_cast<Eigen::Index>(lag - 1)) = w[i - lag];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < order) {
    fit.degenerate = true;
    return fit;
  }
  const Eigen::VectorXd a = qr.solve(target);
  for (std::size_t k = 0; k < p; ++k) fit.coefficients[k] = a(static_cast<Eigen::Index>(k));
  return fit;
}

double subband_power(const dsp::PsdEstimate& psd, Band band) {
  if (!(band.high_hz > band.low_hz)) throw std::invalid_argument("sub-band is empty");
  const auto& f = psd.freqs_hz;
  const auto& p = psd.power;
  if (f.size() < 2 || f.size() != p.size()) throw std::invalid_argument("malformed PSD");
  if (band.low_hz < f.front() || band.high_hz > f.back()) {
    throw std::invalid_argument("sub-band outside PSD frequency range");
  }
  auto interp = [&](double x) {
    auto it = std::upper_bound(f.begin(), f.end(), x);
    if (it == f.end()) return p.back();
    const std::size_t j = static_cast<std::size_t>(it - f.begin());
    const std::size_t i = j - 1;
    const double t = (x - f[i]) / (f[j] - f[i]);
    return p[i] + t * (p[j] - p[i]);
  };
  std::vector<double> xs{band.low_hz};
  std::vector<double> ys{interp(band.low_hz)};
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (f[k] > band.low_hz && f[k] < band.high_hz) {
      xs.push_back(f[k]);
      ys.push_back(p[k]);
    }
  }
  xs.push_back(band.high_hz);
  ys.push_back(interp(band.high_hz));
  return std::max(0.0, dsp::simpson_integrate(ys, xs));
}

PeakPsd peak_psd(const dsp::PsdEstimate& psd, double low_cut_hz) {
  PeakPsd best;
  bool any_bin = false;
  for (std::size_t k = 0; k < psd.freqs_hz.size(); ++k) {
    if (psd.freqs_hz[k] < low_cut_hz) continue;
    if (!any_bin || psd.power[k] > best.power) {
      best = {psd.power[k], psd.freqs_hz[k]};
    }
    any_bin = true;
  }
  if (!any_bin) throw DataError("no PSD bins at or above the low-frequency cutoff");
  if (!(best.power > 0.0)) throw DataError("no spectral power above the low-frequency cutoff");
  return best;
}

double spectral_energy(std::span<const double> w) {
  require_non_empty(w, "spectral energy");
  double s = 0.0;
  for (const auto& c : dsp::dft(w)) s += std::norm(c);
  return s;
}

DwtEnergies dwt_features(std::span<const double> w) {
  if (w.size() < 2) throw std::invalid_argument("dwt features need at least 2 samples");
  const auto c = dsp::haar_dwt_level1(w);
  double ea = 0.0;
  double ed = 0.0;
  for (double v : c.approx) ea += v * v;
  for (double v : c.detail) ed += v * v;
  return {std::log1p(ea), std::log1p(ed)};
}

std::vector<std::string> feature_column_names(std::span<const std::string> channels,
                                              std::span<const std::string> features) {
  std::vector<std::string> out;
  out.reserve(channels.size() * features.size());
  for (const auto& ch : channels) {
    for (const auto& f : features) out.push_back(ch + "_" + f);
  }
  return out;
}

namespace {

FeatureMatrix window_frame(const LabeledRecording& lr, const WindowSamples& ws,
                           std::span<const std::string> names) {
  const Recording& rec = lr.recording;
  const Eigen::Index count = window_count(rec.length(), ws.width, ws.step);
  if (count == 0) {
    throw DataError("trial " + std::to_string(rec.trial_id()) + " has " +
                    std::to_string(rec.length()) + " samples, shorter than one window of " +
                    std::to_string(ws.width));
  }
  FeatureMatrix m;
  m.feature_names.assign(names.begin(), names.end());
  m.rows.resize(count, static_cast<Eigen::Index>(names.size()));
  m.labels.resize(static_cast<std::size_t>(count));
  m.trial_ids.assign(static_cast<std::size_t>(count), rec.trial_id());
  m.window_starts.resize(static_cast<std::size_t>(count));
  for (Eigen::Index k = 0; k < count; ++k) {
    const Eigen::Index start = k * ws.step;
    m.window_starts[static_cast<std::size_t>(k)] = start;
    m.labels[static_cast<std::size_t>(k)] = label_window(start, ws.width, lr.stages);
  }
  return m;
}

void require_modality(const Recording& rec, Modality m) {
  if (rec.modality() != m) {
    throw DataError("trial " + std::to_string(rec.trial_id()) + ": expected " +
                    std::string(to_string(m)) + " recording, got " +
                    std::string(to_string(rec.modality())));
  }
}

void reject_non_finite(const Recording& rec) {
  if (!rec.samples().allFinite()) {
    throw DataError("trial " + std::to_string(rec.trial_id()) + " contains non-finite samples");
  }
}

}  // namespace

FeatureMatrix extract_eeg_features(const LabeledRecording& lr, const EegFeatureConfig& cfg) {
  const Recording& rec = lr.recording;
  require_modality(rec, Modality::Eeg);
  reject_non_finite(rec);
  std::vector<Eigen::Index> channel_rows;
  for (const auto& ch : cfg.channels) channel_rows.push_back(rec.channel_index(ch));

  const WindowSamples ws = resolve_window(cfg.window, rec.sampling_rate_hz());
  FeatureMatrix m = window_frame(lr, ws, feature_column_names(cfg.channels, kEegFeatureNames));
  const auto width = static_cast<std::size_t>(ws.width);
  const double fs = rec.sampling_rate_hz();
  const std::size_t segment = dsp::welch_segment_length(width, fs, cfg.welch_low_freq_hz);
  const std::size_t nfft = std::max(cfg.nfft, segment);
  const std::size_t nf = kEegFeatureNames.size();

  std::vector<double> buf(width);
  for (std::size_t c = 0; c < channel_rows.size(); ++c) {
    for (Eigen::Index k = 0; k < m.row_count(); ++k) {
      const Eigen::Index start = m.window_starts[static_cast<std::size_t>(k)];
      for (std::size_t i = 0; i < width; ++i) {
        buf[i] = rec.samples()(channel_rows[c], start + static_cast<Eigen::Index>(i));
      }
      const auto psd = dsp::welch_psd(buf, fs, segment, segment / 2, dsp::WindowFunction::Hann, nfft);
      PeakPsd peak;
      try {
        peak = peak_psd(psd, cfg.low_cut_hz);
      } catch (const DataError&) {
        peak = {};  // silent window: no spectral peak
      }
      const DwtEnergies dwt = dwt_features(buf);
      const double var = variance(buf);
      const double values[] = {mav(buf),
                               std::sqrt(var),
                               var,
                               subband_power(psd, cfg.alpha),
                               subband_power(psd, cfg.beta),
                               peak.power,
                               peak.freq_hz,
                               spectral_energy(buf),
                               dwt.approx,
                               dwt.detail};
      for (std::size_t f = 0; f < nf; ++f) {
        m.rows(k, static_cast<Eigen::Index>(c * nf + f)) = values[f];
      }
    }
  }
  m.validate();
  return m;
}

FeatureMatrix extract_emg_features(const LabeledRecording& lr, const EmgFeatureConfig& cfg,
                                   std::span<const double> thresholds) {
  const Recording& rec = lr.recording;
  require_modality(rec, Modality::Emg);
  reject_non_finite(rec);
  if (thresholds.size() != cfg.channels.size()) {
    throw std::invalid_argument("one Willison threshold per EMG channel is required");
  }
  std::vector<Eigen::Index> channel_rows;
  for (const auto& ch : cfg.channels) channel_rows.push_back(rec.channel_index(ch));

  const WindowSamples ws = resolve_window(cfg.window, rec.sampling_rate_hz());
  FeatureMatrix m = window_frame(lr, ws, feature_column_names(cfg.channels, kEmgFeatureNames));
  const auto width = static_cast<std::size_t>(ws.width);
  const std::size_t nf = kEmgFeatureNames.size();
  const Eigen::Index count = m.row_count();

  std::vector<double> buf(width);
  std::vector<double> mavs(static_cast<std::size_t>(count));
  for (std::size_t c = 0; c < channel_rows.size(); ++c) {
    const auto col = [&](std::size_t f) { return static_cast<Eigen::Index>(c * nf + f); };
    for (Eigen::Index k = 0; k < count; ++k) {
      const Eigen::Index start = m.window_starts[static_cast<std::size_t>(k)];
      for (std::size_t i = 0; i < width; ++i) {
        buf[i] = rec.samples()(channel_rows[c], start + static_cast<Eigen::Index>(i));
      }
      mavs[static_cast<std::size_t>(k)] = mav(buf);
      m.rows(k, col(0)) = mavs[static_cast<std::size_t>(k)];
      m.rows(k, col(1)) = waveform_length(buf);
      m.rows(k, col(2)) = willison_amplitude(buf, thresholds[c]);
      m.rows(k, col(4)) = ar_coefficients(buf, cfg.ar_order).coefficients.front();
    }
    // Forward slope to the next window; the final window repeats the last
    // available slope, and a single-window trial has slope 0.
    if (count == 1) {
      m.rows(0, col(3)) = 0.0;
    } else {
      const std::vector<double> slopes = mav_slope(mavs);
      for (Eigen::Index k = 0; k < count; ++k) {
        m.rows(k, col(3)) = slopes[std::min<std::size_t>(static_cast<std::size_t>(k), slopes.size() - 1)];
      }
    }
  }
  m.validate();
  return m;
}

std::vector<double> fit_willison_thresholds(std::span<const LabeledRecording> trials,
                                            std::span<const std::string> channels) {
  std::vector<double> out;
  for (const auto& ch : channels) {
    double sum = 0.0;
    double sumsq = 0.0;
    double n = 0.0;
    for (const auto& lr : trials) {
      const Eigen::Index row = lr.recording.channel_index(ch);
      const Eigen::Index end = std::min(lr.stages.boundaries()[0], lr.recording.length());
      for (Eigen::Index t = 0; t < end; ++t) {
        const double v = lr.recording.samples()(row, t);
        sum += v;
        sumsq += v * v;
        n += 1.0;
      }
    }
    if (n < 2.0) throw DataError("no resting-stage samples to fit Willison threshold on " + ch);
    const double mean = sum / n;
    const double sd = std::sqrt(std::max(0.0, sumsq / n - mean * mean));
    if (!(sd > 0.0)) {
      throw DataError("resting-stage samples of channel '" + ch +
                      "' are constant; set an absolute Willison threshold");
    }
    out.push_back(sd);
  }
  return out;
}

std::vector<double> resolve_willison_thresholds(const EmgFeatureConfig& cfg,
                                                std::span<const LabeledRecording> reference_trials) {
  if (cfg.willison_threshold) {
    if (!(*cfg.willison_threshold > 0.0)) {
      throw ConfigError("willison threshold must be positive");
    }
    return std::vector<double>(cfg.channels.size(), *cfg.willison_threshold);
  }
  return fit_willison_thresholds(reference_trials, cfg.channels);
}

FeatureMatrix extract_eeg_dataset(std::span<const LabeledRecording> trials,
                                  const EegFeatureConfig& cfg) {
  std::vector<FeatureMatrix> parts;
  parts.reserve(trials.size());
  for (const auto& t : trials) parts.push_back(extract_eeg_features(t, cfg));
  return FeatureMatrix::concat_rows(parts);
}

FeatureMatrix extract_emg_dataset(std::span<const LabeledRecording> trials,
                                  const EmgFeatureConfig& cfg, std::span<const double> thresholds) {
  std::vector<FeatureMatrix> parts;
  parts.reserve(trials.size());
  for (const auto& t : trials) parts.push_back(extract_emg_features(t, cfg, thresholds));
  return FeatureMatrix::concat_rows(parts);
}

}  // namespace biofuse::features
