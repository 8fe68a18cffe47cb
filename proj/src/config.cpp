#include "biofuse/config.hpp"

#include <charconv>
#include <cstdlib>
#include <limits>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "biofuse/errors.hpp"

namespace biofuse {

using json = nlohmann::json;

namespace {

template <typename T>
struct is_vector : std::false_type {};
template <typename T>
struct is_vector<std::vector<T>> : std::true_type {};
template <typename T>
struct is_array : std::false_type {};
template <typename T, std::size_t N>
struct is_array<std::array<T, N>> : std::true_type {};
template <typename T>
struct is_optional : std::false_type {};
template <typename T>
struct is_optional<std::optional<T>> : std::true_type {};

template <typename T>
void convert(const json& j, T& out, const std::string& path) {
  if constexpr (std::is_same_v<T, bool>) {
    if (!j.is_boolean()) throw ConfigError(path + ": expected true or false");
    out = j.get<bool>();
  } else if constexpr (std::is_same_v<T, std::uint64_t>) {
    if (!j.is_number_unsigned()) throw ConfigError(path + ": expected a non-negative integer");
    out = j.get<std::uint64_t>();
  } else if constexpr (std::is_integral_v<T>) {
    if (!j.is_number_integer()) throw ConfigError(path + ": expected an integer");
    const auto v = j.get<std::int64_t>();
    if (v < std::numeric_limits<T>::min() || v > std::numeric_limits<T>::max()) {
      throw ConfigError(path + ": integer out of range");
    }
    out = static_cast<T>(v);
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!j.is_number()) throw ConfigError(path + ": expected a number");
    out = j.get<T>();
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!j.is_string()) throw ConfigError(path + ": expected a string");
    out = j.get<std::string>();
  } else if constexpr (is_optional<T>::value) {
    if (j.is_null()) {
      out.reset();
    } else {
      typename T::value_type v{};
      convert(j, v, path);
      out = v;
    }
  } else if constexpr (is_vector<T>::value) {
    if (!j.is_array()) throw ConfigError(path + ": expected an array");
    out.clear();
    for (std::size_t i = 0; i < j.size(); ++i) {
      typename T::value_type v{};
      convert(j[i], v, path + "[" + std::to_string(i) + "]");
      out.push_back(std::move(v));
    }
  } else if constexpr (is_array<T>::value) {
    if (!j.is_array() || j.size() != out.size()) {
      throw ConfigError(path + ": expected an array of " + std::to_string(out.size()) + " values");
    }
    for (std::size_t i = 0; i < out.size(); ++i) convert(j[i], out[i], path + "[" + std::to_string(i) + "]");
  } else {
    static_assert(sizeof(T) == 0, "unsupported config type");
  }
}

/// Reads known keys of one object and rejects everything else.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError((path_.empty() ? "config" : path_) + ": expected an object");
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it != j_.end()) convert(*it, out, name(key));
  }

  /// Child section, or nullopt when absent.
  std::optional<Section> child(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) return std::nullopt;
    return Section(*it, name(key));
  }

  const json* raw(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError("unknown config key '" + name(it.key()) + "'");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_band(Section& s, const std::string& key, features::Band& band) {
  std::array<double, 2> v{band.low_hz, band.high_hz};
  s.read(key, v);
  band = {v[0], v[1]};
}

void read_window(Section& parent, const std::string& key, WindowSpec& w) {
  if (auto s = parent.child(key)) {
    s->read("width_s", w.width_s);
    s->read("overlap_s", w.overlap_s);
    s->finish();
  }
}

void read_training(Section& parent, TrainingConfig& t) {
  if (auto s = parent.child("training")) {
    s->read("learning_rate", t.learning_rate);
    s->read("momentum", t.momentum);
    s->read("batch_size", t.batch_size);
    s->read("max_epochs", t.max_epochs);
    s->read("patience", t.patience);
    s->read("min_delta", t.min_delta);
    s->read("validation_fraction", t.validation_fraction);
    s->finish();
  }
}

json band_json(const features::Band& b) { return json::array({b.low_hz, b.high_hz}); }

json training_json(const TrainingConfig& t) {
  return {{"learning_rate", t.learning_rate}, {"momentum", t.momentum},   {"batch_size", t.batch_size},
          {"max_epochs", t.max_epochs},       {"patience", t.patience},   {"min_delta", t.min_delta},
          {"validation_fraction", t.validation_fraction}};
}

void check(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void check_training(const TrainingConfig& t, const std::string& path) {
  check(t.learning_rate > 0.0, path + ".learning_rate must be > 0");
  check(t.momentum >= 0.0 && t.momentum < 1.0, path + ".momentum must be in [0, 1)");
  check(t.batch_size >= 1, path + ".batch_size must be >= 1");
  check(t.max_epochs >= 1, path + ".max_epochs must be >= 1");
  check(t.patience >= 1, path + ".patience must be >= 1");
  check(t.min_delta >= 0.0, path + ".min_delta must be >= 0");
  check(t.validation_fraction >= 0.0 && t.validation_fraction < 1.0, path + ".validation_fraction must be in [0, 1)");
}

void check_band(const features::Band& b, const std::string& path) {
  check(b.low_hz > 0.0 && b.high_hz > b.low_hz, path + " must satisfy 0 < low < high");
}

void check_window(const WindowSpec& w, const std::string& path) {
  check(w.width_s > 0.0, path + ".width_s must be > 0");
  check(w.overlap_s >= 0.0 && w.overlap_s < w.width_s, path + ".overlap_s must be in [0, width_s)");
}

}  // namespace

void validate_config(const PipelineConfig& cfg) {
  check_window(cfg.eeg.window, "windows.eeg");
  check_window(cfg.emg.window, "windows.emg");
  check_band(cfg.eeg.alpha, "features.eeg.alpha_band");
  check_band(cfg.eeg.beta, "features.eeg.beta_band");
  check(cfg.eeg.low_cut_hz >= 0.0, "features.eeg.low_cut_hz must be >= 0");
  check(cfg.eeg.welch_low_freq_hz > 0.0, "features.eeg.welch_low_freq_hz must be > 0");
  check(!cfg.eeg.channels.empty(), "features.eeg.channels must not be empty");
  check(cfg.emg.ar_order >= 1, "features.emg.ar_order must be >= 1");
  check(!cfg.emg.willison_threshold || *cfg.emg.willison_threshold > 0.0,
        "features.emg.willison_threshold must be > 0 or null");
  check(!cfg.emg.channels.empty(), "features.emg.channels must not be empty");

  const auto& b = cfg.selection.boruta;
  check(b.max_iterations >= 10, "selection.max_iterations must be >= 10");
  check(b.alpha > 0.0 && b.alpha < 1.0, "selection.alpha must be in (0, 1)");
  check(b.forest.tree_count >= 1, "selection.forest.tree_count must be >= 1");
  check(b.forest.max_depth >= 1, "selection.forest.max_depth must be >= 1");
  check(b.forest.min_leaf >= 1, "selection.forest.min_leaf must be >= 1");

  const auto& c = cfg.classifier;
  check(c.spec.type == "knn" || c.spec.type == "mlp" || c.spec.type == "lstm",
        "classifier.type must be knn, mlp or lstm");
  check(c.folds >= 2, "classifier.folds must be >= 2");
  check(c.spec.knn.k >= 1, "classifier.knn.k must be >= 1");
  check(!c.spec.mlp.hidden.empty(), "classifier.mlp.hidden must list at least one layer");
  for (int h : c.spec.mlp.hidden) check(h >= 1, "classifier.mlp.hidden sizes must be >= 1");
  check(c.spec.lstm.hidden >= 1, "classifier.lstm.hidden must be >= 1");
  check(c.spec.lstm.sequence_length >= 1, "classifier.lstm.sequence_length must be >= 1");
  check_training(c.spec.mlp.training, "classifier.mlp.training");
  check_training(c.spec.lstm.training, "classifier.lstm.training");

  check(cfg.fusion.noise_alpha >= 0.0, "fusion.noise_alpha must be >= 0");
  check(!cfg.fusion.cases.empty(), "fusion.cases must not be empty");

  const auto& e = cfg.erders.curve;
  check_band(e.band, "erders.band");
  check(e.baseline_start_s >= 0.0 && e.baseline_end_s > e.baseline_start_s,
        "erders.baseline_s must satisfy 0 <= start < end");
  check(e.filter_order >= 1, "erders.filter_order must be >= 1");
  check(e.smooth_window_s > 0.0, "erders.smooth_window_s must be > 0");
  check(e.smooth_polyorder >= 0, "erders.smooth_polyorder must be >= 0");
  check(e.edge_trim_s >= 0.0, "erders.edge_trim_s must be >= 0");

  cfg.synth.validate();
}

PipelineConfig config_from_json(const json& doc) {
  PipelineConfig cfg;
  Section root(doc, "");
  root.read("seed", cfg.seed);
  if (auto s = root.child("data")) {
    s->read("dir", cfg.data_dir);
    s->finish();
  }
  if (auto s = root.child("windows")) {
    read_window(*s, "eeg", cfg.eeg.window);
    read_window(*s, "emg", cfg.emg.window);
    s->finish();
  }
  if (auto s = root.child("features")) {
    if (auto e = s->child("eeg")) {
      read_band(*e, "alpha_band", cfg.eeg.alpha);
      read_band(*e, "beta_band", cfg.eeg.beta);
      e->read("low_cut_hz", cfg.eeg.low_cut_hz);
      e->read("welch_low_freq_hz", cfg.eeg.welch_low_freq_hz);
      e->read("nfft", cfg.eeg.nfft);
      e->read("channels", cfg.eeg.channels);
      e->finish();
    }
    if (auto m = s->child("emg")) {
      m->read("ar_order", cfg.emg.ar_order);
      m->read("willison_threshold", cfg.emg.willison_threshold);
      m->read("channels", cfg.emg.channels);
      m->finish();
    }
    s->finish();
  }
  if (auto s = root.child("selection")) {
    auto& b = cfg.selection.boruta;
    s->read("enabled", cfg.selection.enabled);
    s->read("max_iterations", b.max_iterations);
    s->read("alpha", b.alpha);
    s->read("max_rows", b.max_rows);
    if (auto f = s->child("forest")) {
      f->read("tree_count", b.forest.tree_count);
      f->read("max_depth", b.forest.max_depth);
      f->read("min_leaf", b.forest.min_leaf);
      f->read("out_of_bag", b.forest.out_of_bag);
      f->finish();
    }
    s->finish();
  }
  if (auto s = root.child("classifier")) {
    auto& spec = cfg.classifier.spec;
    s->read("type", spec.type);
    s->read("folds", cfg.classifier.folds);
    if (auto k = s->child("knn")) {
      k->read("k", spec.knn.k);
      k->finish();
    }
    if (auto m = s->child("mlp")) {
      m->read("hidden", spec.mlp.hidden);
      read_training(*m, spec.mlp.training);
      m->finish();
    }
    if (auto l = s->child("lstm")) {
      l->read("hidden", spec.lstm.hidden);
      l->read("sequence_length", spec.lstm.sequence_length);
      read_training(*l, spec.lstm.training);
      l->finish();
    }
    s->finish();
  }
  if (auto s = root.child("fusion")) {
    s->read("noise_alpha", cfg.fusion.noise_alpha);
    std::vector<std::string> cases;
    for (auto c : cfg.fusion.cases) cases.emplace_back(to_string(c));
    s->read("cases", cases);
    cfg.fusion.cases.clear();
    for (const auto& c : cases) cfg.fusion.cases.push_back(parse_noise_case(c));
    s->finish();
  }
  if (auto s = root.child("erders")) {
    auto& e = cfg.erders.curve;
    s->read("channel", cfg.erders.channel);
    read_band(*s, "band", e.band);
    std::array<double, 2> baseline{e.baseline_start_s, e.baseline_end_s};
    s->read("baseline_s", baseline);
    e.baseline_start_s = baseline[0];
    e.baseline_end_s = baseline[1];
    s->read("filter_order", e.filter_order);
    s->read("smooth_window_s", e.smooth_window_s);
    s->read("smooth_polyorder", e.smooth_polyorder);
    s->read("edge_trim_s", e.edge_trim_s);
    s->finish();
  }
  if (auto s = root.child("synth")) {
    auto& g = cfg.synth;
    s->read("trial_count", g.trial_count);
    s->read("trial_length_s", g.trial_length_s);
    s->read("boundaries_s", g.boundaries_s);
    s->read("eeg_rate_hz", g.eeg_rate_hz);
    s->read("emg_rate_hz", g.emg_rate_hz);
    s->read("transition_s", g.transition_s);
    s->read("eeg_channels", g.eeg_channels);
    s->read("eeg_alpha", g.eeg_alpha);
    s->read("eeg_beta", g.eeg_beta);
    s->read("eeg_background", g.eeg_background);
    s->read("eeg_sensor_noise", g.eeg_sensor_noise);
    s->read("emg_channels", g.emg_channels);
    s->read("emg_burst", g.emg_burst);
    s->read("emg_rest_level", g.emg_rest_level);
    s->read("class_sigma", g.class_sigma);
    s->read("source", g.source);
    s->finish();
  }
  root.finish();
  cfg.synth.seed = cfg.seed;
  cfg.selection.boruta.seed = cfg.seed;
  validate_config(cfg);
  return cfg;
}

PipelineConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end(), nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  return config_from_json(doc);
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

json config_to_json(const PipelineConfig& cfg) {
  json doc;
  doc["seed"] = cfg.seed;
  doc["data"] = {{"dir", cfg.data_dir}};
  doc["windows"] = {{"eeg", {{"width_s", cfg.eeg.window.width_s}, {"overlap_s", cfg.eeg.window.overlap_s}}},
                    {"emg", {{"width_s", cfg.emg.window.width_s}, {"overlap_s", cfg.emg.window.overlap_s}}}};
  doc["features"]["eeg"] = {{"alpha_band", band_json(cfg.eeg.alpha)},
                            {"beta_band", band_json(cfg.eeg.beta)},
                            {"low_cut_hz", cfg.eeg.low_cut_hz},
                            {"welch_low_freq_hz", cfg.eeg.welch_low_freq_hz},
                            {"nfft", cfg.eeg.nfft},
                            {"channels", cfg.eeg.channels}};
  doc["features"]["emg"] = {{"ar_order", cfg.emg.ar_order},
                            {"willison_threshold", cfg.emg.willison_threshold ? json(*cfg.emg.willison_threshold) : json()},
                            {"channels", cfg.emg.channels}};
  const auto& b = cfg.selection.boruta;
  doc["selection"] = {{"enabled", cfg.selection.enabled},
                      {"max_iterations", b.max_iterations},
                      {"alpha", b.alpha},
                      {"max_rows", b.max_rows},
                      {"forest", {{"tree_count", b.forest.tree_count},
                                  {"max_depth", b.forest.max_depth},
                                  {"min_leaf", b.forest.min_leaf},
                                  {"out_of_bag", b.forest.out_of_bag}}}};
  const auto& spec = cfg.classifier.spec;
  doc["classifier"] = {
      {"type", spec.type},
      {"folds", cfg.classifier.folds},
      {"knn", {{"k", spec.knn.k}}},
      {"mlp", {{"hidden", spec.mlp.hidden}, {"training", training_json(spec.mlp.training)}}},
      {"lstm", {{"hidden", spec.lstm.hidden},
                {"sequence_length", spec.lstm.sequence_length},
                {"training", training_json(spec.lstm.training)}}}};
  std::vector<std::string> cases;
  for (auto c : cfg.fusion.cases) cases.emplace_back(to_string(c));
  doc["fusion"] = {{"noise_alpha", cfg.fusion.noise_alpha}, {"cases", cases}};
  const auto& e = cfg.erders.curve;
  doc["erders"] = {{"channel", cfg.erders.channel},
                   {"band", band_json(e.band)},
                   {"baseline_s", {e.baseline_start_s, e.baseline_end_s}},
                   {"filter_order", e.filter_order},
                   {"smooth_window_s", e.smooth_window_s},
                   {"smooth_polyorder", e.smooth_polyorder},
                   {"edge_trim_s", e.edge_trim_s}};
  const auto& g = cfg.synth;
  doc["synth"] = {{"trial_count", g.trial_count},
                  {"trial_length_s", g.trial_length_s},
                  {"boundaries_s", g.boundaries_s},
                  {"eeg_rate_hz", g.eeg_rate_hz},
                  {"emg_rate_hz", g.emg_rate_hz},
                  {"transition_s", g.transition_s},
                  {"eeg_channels", g.eeg_channels},
                  {"eeg_alpha", g.eeg_alpha},
                  {"eeg_beta", g.eeg_beta},
                  {"eeg_background", g.eeg_background},
                  {"eeg_sensor_noise", g.eeg_sensor_noise},
                  {"emg_channels", g.emg_channels},
                  {"emg_burst", g.emg_burst},
                  {"emg_rest_level", g.emg_rest_level},
                  {"class_sigma", g.class_sigma},
                  {"source", g.source}};
  return doc;
}

void apply_environment(PipelineConfig& cfg) {
  const char* env = std::getenv("BIOFUSE_SEED");
  if (env == nullptr || *env == '\0') return;
  const std::string text(env);
  std::uint64_t seed = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("BIOFUSE_SEED must be a non-negative integer, got '" + text + "'");
  }
  cfg.seed = seed;
  cfg.synth.seed = seed;
  cfg.selection.boruta.seed = seed;
}

}  // namespace biofuse
