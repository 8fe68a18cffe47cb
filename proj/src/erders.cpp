#include "biofuse/erders.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

#include "biofuse/dsp.hpp"
#include "biofuse/errors.hpp"

namespace biofuse {

ErdErsCurve erd_ers_curve(std::span<const Recording> trials, const std::string& channel, const ErdErsConfig& cfg) {
  if (trials.size() < 2) throw DataError("ERD/ERS needs at least 2 trials");
  const double fs = trials.front().sampling_rate_hz();
  Eigen::Index length = trials.front().length();
  for (const auto& t : trials) {
    if (t.sampling_rate_hz() != fs) throw DataError("ERD/ERS trials have different sampling rates");
    length = std::min(length, t.length());
  }
  if (!(cfg.baseline_start_s >= 0.0 && cfg.baseline_end_s > cfg.baseline_start_s)) {
    throw ConfigError("ERD/ERS baseline interval must satisfy 0 <= start < end");
  }
  const auto b0 = static_cast<Eigen::Index>(std::ceil(cfg.baseline_start_s * fs - 1e-9));
  const auto b1 = static_cast<Eigen::Index>(std::floor(cfg.baseline_end_s * fs + 1e-9));
  if (b1 >= length) {
    throw DataError("ERD/ERS baseline interval [" + std::to_string(cfg.baseline_start_s) + ", " +
                    std::to_string(cfg.baseline_end_s) + "] s lies outside the " +
                    std::to_string(static_cast<double>(length) / fs) + " s common trial length");
  }

  const dsp::BandpassDesign design(cfg.band.low_hz, cfg.band.high_hz, cfg.filter_order, fs);
  std::vector<double> power(static_cast<std::size_t>(length), 0.0);
  for (const auto& t : trials) {
    const Eigen::Index c = t.channel_index(channel);
    const Eigen::VectorXd row = t.samples().row(c).head(length).transpose();
    const auto filtered =
        dsp::butterworth_bandpass(std::span<const double>(row.data(), static_cast<std::size_t>(length)), design);
    for (std::size_t i = 0; i < power.size(); ++i) power[i] += filtered[i] * filtered[i];
  }
  for (auto& p : power) p /= static_cast<double>(trials.size());

  auto window = static_cast<std::size_t>(std::llround(cfg.smooth_window_s * fs));
  if (window % 2 == 0) ++window;
  if (window > power.size()) throw DataError("ERD/ERS smoothing window exceeds the trial length");
  const auto smooth = dsp::savgol_smooth(power, window, cfg.smooth_polyorder);

  double ref = 0.0;
  for (Eigen::Index i = b0; i <= b1; ++i) ref += smooth[static_cast<std::size_t>(i)];
  ref /= static_cast<double>(b1 - b0 + 1);
  if (!(ref > 0.0)) throw DataError("ERD/ERS reference power is zero on channel " + channel);

  const auto trim = static_cast<Eigen::Index>(std::llround(cfg.edge_trim_s * fs));
  if (2 * trim >= length) throw DataError("ERD/ERS edge trim removes the whole curve");
  ErdErsCurve curve;
  curve.band = cfg.band;
  curve.channel = channel;
  curve.trial_count = static_cast<int>(trials.size());
  curve.reference_power = ref;
  for (Eigen::Index i = trim; i < length - trim; ++i) {
    curve.time_s.push_back(static_cast<double>(i) / fs);
    curve.percent_change.push_back((smooth[static_cast<std::size_t>(i)] - ref) / ref * 100.0);
  }
  return curve;
}

ErdErsCurve erd_ers_curve(std::span<const LabeledRecording> trials, const std::string& channel,
                          const ErdErsConfig& cfg) {
  std::vector<Recording> recs;
  recs.reserve(trials.size());
  for (const auto& t : trials) recs.push_back(t.recording);
  return erd_ers_curve(std::span<const Recording>(recs), channel, cfg);
}

void write_curve_csv(const std::filesystem::path& path, const ErdErsCurve& curve) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "t_s,percent_change\n";
  char buf[64];
  for (std::size_t i = 0; i < curve.time_s.size(); ++i) {
    auto r = std::to_chars(buf, buf + sizeof(buf), curve.time_s[i], std::chars_format::fixed, 6);
    out.write(buf, r.ptr - buf);
    out << ',';
    r = std::to_chars(buf, buf + sizeof(buf), curve.percent_change[i], std::chars_format::fixed, 6);
    out.write(buf, r.ptr - buf);
    out << '\n';
  }
}

CrossValidationReport channel_reduction_eval(std::span<const LabeledRecording> trials,
                                             const std::vector<std::string>& channels,
                                             const ClassifierSpec& spec, const CvOptions& options,
                                             features::EegFeatureConfig features) {
  if (channels.empty()) throw ConfigError("channel subset is empty");
  features.channels = channels;
  const auto data = features::extract_eeg_dataset(trials, features);
  auto report = cross_validate(spec, data, options);
  std::string name = spec.type + "[";
  for (std::size_t i = 0; i < channels.size(); ++i) name += (i ? "+" : "") + channels[i];
  report.classifier = name + "]";
  return report;
}

}  // namespace biofuse
