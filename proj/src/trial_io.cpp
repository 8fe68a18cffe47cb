#include "biofuse/trial_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <regex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "biofuse/errors.hpp"

namespace biofuse {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(std::move(cur));
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

const LabeledRecording& Trial::get(Modality m) const {
  const auto& slot = m == Modality::Eeg ? eeg : emg;
  if (!slot) {
    throw DataError("trial " + std::to_string(trial_id) + " has no " +
                    std::string(to_string(m)) + " recording");
  }
  return *slot;
}

fs::path trial_csv_path(const fs::path& dir, int trial_id, Modality m) {
  return dir / ("trial_" + std::to_string(trial_id) + "_" + std::string(to_string(m)) + ".csv");
}

fs::path trial_meta_path(const fs::path& dir, int trial_id) {
  return dir / ("trial_" + std::to_string(trial_id) + "_meta.json");
}

void write_recording_csv(const fs::path& path, const Recording& rec, int decimals) {
  std::string out;
  out.reserve(static_cast<std::size_t>(rec.length() * rec.channel_count() * (decimals + 6)));
  for (std::size_t c = 0; c < rec.channel_names().size(); ++c) {
    if (c) out.push_back(',');
    const auto& name = rec.channel_names()[c];
    if (name.find(',') != std::string::npos) {
      out += '"' + name + '"';
    } else {
      out += name;
    }
  }
  out.push_back('\n');
  char buf[64];
  for (Eigen::Index t = 0; t < rec.length(); ++t) {
    for (Eigen::Index c = 0; c < rec.channel_count(); ++c) {
      if (c) out.push_back(',');
      double v = rec.samples()(c, t);
      auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, decimals);
      std::string_view text(buf, static_cast<std::size_t>(res.ptr - buf));
      // Avoid emitting "-0.000000" for values that round to zero.
      if (text.front() == '-' && text.find_first_not_of("-0.") == std::string_view::npos) {
        text.remove_prefix(1);
      }
      out += text;
    }
    out.push_back('\n');
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write " + path.string());
  f << out;
}

Eigen::MatrixXd read_samples_csv(const fs::path& path, std::vector<std::string>& channel_names) {
  const std::string text = read_file(path);
  std::size_t pos = text.find('\n');
  if (pos == std::string::npos) throw DataError(path.string() + ": missing header row");
  channel_names = split_csv_line(std::string_view(text).substr(0, pos));
  const std::size_t channels = channel_names.size();
  std::vector<double> values;
  values.reserve(text.size() / 8);
  const char* p = text.data() + pos + 1;
  const char* end = text.data() + text.size();
  std::size_t row = 0;
  while (p < end) {
    if (*p == '\n' || *p == '\r') {
      ++p;
      continue;
    }
    for (std::size_t c = 0; c < channels; ++c) {
      double v = 0.0;
      auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc()) {
        throw DataError(path.string() + ": malformed number at data row " + std::to_string(row + 1));
      }
      p = res.ptr;
      if (c + 1 < channels) {
        if (p >= end || *p != ',') {
          throw DataError(path.string() + ": expected " + std::to_string(channels) +
                          " columns at data row " + std::to_string(row + 1));
        }
        ++p;
      }
      values.push_back(v);
    }
    while (p < end && *p == '\r') ++p;
    if (p < end && *p != '\n') {
      throw DataError(path.string() + ": too many columns at data row " + std::to_string(row + 1));
    }
    ++row;
  }
  Eigen::MatrixXd samples(static_cast<Eigen::Index>(channels), static_cast<Eigen::Index>(row));
  for (std::size_t t = 0; t < row; ++t) {
    for (std::size_t c = 0; c < channels; ++c) {
      samples(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(t)) = values[t * channels + c];
    }
  }
  return samples;
}

void write_trial(const fs::path& dir, const Trial& trial, int decimals) {
  fs::create_directories(dir);
  json meta;
  meta["format_version"] = kTrialMetaVersion;
  meta["trial_id"] = trial.trial_id;
  meta["source"] = trial.source;
  meta["sampling_rate_hz"] = json::object();
  meta["stage_boundaries"] = json::object();
  for (Modality m : {Modality::Eeg, Modality::Emg}) {
    const auto& slot = m == Modality::Eeg ? trial.eeg : trial.emg;
    if (!slot) continue;
    const std::string key(to_string(m));
    meta["sampling_rate_hz"][key] = slot->recording.sampling_rate_hz();
    const auto& b = slot->stages.boundaries();
    meta["stage_boundaries"][key] = {b[0], b[1], b[2]};
    write_recording_csv(trial_csv_path(dir, trial.trial_id, m), slot->recording, decimals);
  }
  std::ofstream f(trial_meta_path(dir, trial.trial_id), std::ios::binary);
  if (!f) throw DataError("cannot write metadata for trial " + std::to_string(trial.trial_id));
  f << meta.dump(2) << '\n';
}

Trial read_trial(const fs::path& dir, int trial_id) {
  const fs::path meta_path = trial_meta_path(dir, trial_id);
  json meta;
  try {
    meta = json::parse(read_file(meta_path));
  } catch (const json::parse_error& e) {
    throw DataError(meta_path.string() + ": " + e.what());
  }
  Trial trial;
  try {
    trial.trial_id = meta.at("trial_id").get<int>();
    trial.source = meta.value("source", "unknown");
    for (Modality m : {Modality::Eeg, Modality::Emg}) {
      const std::string key(to_string(m));
      if (!meta.at("sampling_rate_hz").contains(key)) continue;
      const fs::path csv = trial_csv_path(dir, trial_id, m);
      if (!fs::exists(csv)) continue;
      std::vector<std::string> names;
      Eigen::MatrixXd samples = read_samples_csv(csv, names);
      const double fs_hz = meta.at("sampling_rate_hz").at(key).get<double>();
      const auto b = meta.at("stage_boundaries").at(key).get<std::vector<Eigen::Index>>();
      if (b.size() != 3) throw DataError(meta_path.string() + ": need 3 stage boundaries");
      Recording rec(m, std::move(names), fs_hz, std::move(samples), trial_id);
      StageSegmentation seg({b[0], b[1], b[2]}, rec.length());
      (m == Modality::Eeg ? trial.eeg : trial.emg) = LabeledRecording{std::move(rec), seg};
    }
  } catch (const json::exception& e) {
    throw DataError(meta_path.string() + ": " + e.what());
  }
  if (trial.trial_id != trial_id) {
    throw DataError(meta_path.string() + ": trial_id field disagrees with file name");
  }
  return trial;
}

std::vector<int> list_trials(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError("data directory " + dir.string() + " not found");
  static const std::regex pattern(R"(trial_(-?\d+)_meta\.json)");
  std::vector<int> ids;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::smatch m;
    const std::string name = entry.path().filename().string();
    if (std::regex_match(name, m, pattern)) ids.push_back(std::stoi(m[1].str()));
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<LabeledRecording> load_modality(const fs::path& dir, Modality m) {
  std::vector<LabeledRecording> out;
  for (int id : list_trials(dir)) {
    Trial t = read_trial(dir, id);
    out.push_back(t.get(m));
  }
  if (out.empty()) throw DataError("no trials found in " + dir.string());
  return out;
}

}  // namespace biofuse
