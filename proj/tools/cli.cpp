#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "biofuse/checksum.hpp"
#include "biofuse/config.hpp"
#include "biofuse/cross_validation.hpp"
#include "biofuse/erders.hpp"
#include "biofuse/errors.hpp"
#include "biofuse/feature_io.hpp"
#include "biofuse/features.hpp"
#include "biofuse/fusion.hpp"
#include "biofuse/metrics.hpp"
#include "biofuse/random.hpp"
#include "biofuse/selection.hpp"
#include "biofuse/svg.hpp"
#include "biofuse/synth.hpp"
#include "biofuse/trial_io.hpp"

namespace biofuse::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

/// Records what a run read and wrote, next to its primary output.
class Manifest {
 public:
  Manifest(std::string command, const PipelineConfig& cfg, const std::vector<std::string>& args) {
    const json config = config_to_json(cfg);
    doc_["tool"] = "biofuse";
    doc_["version"] = kVersion;
    doc_["manifest_version"] = 1;
    doc_["command"] = std::move(command);
    doc_["arguments"] = args;
    doc_["seed"] = cfg.seed;
    doc_["config_sha256"] = sha256_hex(config.dump());
    doc_["config"] = config;
    doc_["inputs"] = json::array();
    doc_["outputs"] = json::array();
  }

  void input(const fs::path& p) { add("inputs", p); }
  void output(const fs::path& p) { add("outputs", p); }
  json& extra() { return doc_["details"]; }

  void write(const fs::path& primary) const {
    fs::path path = primary;
    path += ".manifest.json";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write manifest " + path.string());
    out << doc_.dump(2) << '\n';
  }

 private:
  void add(const char* key, const fs::path& p) {
    if (fs::is_directory(p)) {
      std::vector<fs::path> files;
      for (const auto& e : fs::directory_iterator(p)) {
        if (e.is_regular_file()) files.push_back(e.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) doc_[key].push_back({{"path", f.generic_string()}, {"sha256", sha256_file(f)}});
    } else {
      doc_[key].push_back({{"path", p.generic_string()}, {"sha256", sha256_file(p)}});
    }
  }

  json doc_;
};

void require_file(const fs::path& p, const std::string& what) {
  if (!fs::is_regular_file(p)) throw DataError(what + " not found: " + p.string());
}

void require_dir(const fs::path& p, const std::string& what) {
  if (!fs::is_directory(p)) throw DataError(what + " not found: " + p.string());
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

void refuse_overwrite(const fs::path& out, const std::vector<fs::path>& inputs) {
  for (const auto& in : inputs) {
    if (fs::exists(in) && fs::exists(out) && fs::equivalent(in, out)) {
      throw ConfigError("output " + out.string() + " would overwrite an input");
    }
  }
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

FeatureMatrix apply_selection(const FeatureMatrix& m, const std::string& selection_path, Manifest& manifest) {
  if (selection_path.empty()) return m;
  require_file(selection_path, "selection file");
  manifest.input(selection_path);
  const auto report = read_selection_csv(selection_path);
  const auto keep = report.selected();
  if (keep.empty()) throw DataError("selection " + selection_path + " keeps no features");
  return m.select_columns(keep);
}

FeatureMatrix load_features(const std::string& path, Manifest& manifest) {
  require_file(path, "feature file");
  manifest.input(path);
  return read_feature_csv(path);
}

// ---------------------------------------------------------------------------

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
};

struct SynthArgs {
  std::string out;
  std::optional<int> trial_count;
  std::optional<double> trial_length_s;
  std::vector<double> boundaries_s;
  std::optional<double> eeg_rate_hz, emg_rate_hz, transition_s, eeg_background, eeg_sensor_noise;
  std::optional<double> emg_rest_level, class_sigma;
  std::string eeg_channels, emg_channels, eeg_alpha, eeg_beta, emg_burst, source;
};

struct ExtractArgs {
  std::string data, modality, out, channels;
  std::optional<double> willison_threshold;
};

struct SelectArgs {
  std::string features, out;
  std::optional<int> max_iterations;
  std::optional<double> alpha;
  std::optional<std::size_t> max_rows;
};

struct TrainArgs {
  std::string features, selection, out, classifier;
};

struct EvaluateArgs {
  std::string features, selection, model, out, classifier, confusion_svg;
  std::optional<int> folds;
};

struct FuseArgs {
  std::string data, out, noise_case = "all";
  std::optional<double> alpha;
  std::optional<int> folds;
};

struct ErdArgs {
  std::string data, out, channel, svg;
  std::vector<double> band, baseline;
};

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string out;
};

PipelineConfig resolve_config(const Common& c) {
  PipelineConfig cfg = c.config_path.empty() ? PipelineConfig{} : load_config(c.config_path);
  apply_environment(cfg);
  if (c.seed) {
    cfg.seed = *c.seed;
    cfg.synth.seed = *c.seed;
    cfg.selection.boruta.seed = *c.seed;
  }
  return cfg;
}

std::vector<StageAmplitudes> parse_table(const std::string& text, const std::string& flag) {
  try {
    return json::parse(text).get<std::vector<StageAmplitudes>>();
  } catch (const json::exception&) {
    throw ConfigError(flag + " expects a JSON array of 4-value arrays, e.g. [[10,5,5,8],...]");
  }
}

int cmd_synth(const SynthArgs& a, PipelineConfig cfg, const std::vector<std::string>& args, std::ostream& out) {
  auto& g = cfg.synth;
  if (a.trial_count) g.trial_count = *a.trial_count;
  if (a.trial_length_s) g.trial_length_s = *a.trial_length_s;
  if (!a.boundaries_s.empty()) {
    if (a.boundaries_s.size() != 3) throw ConfigError("--boundaries-s expects 3 values");
    g.boundaries_s = {a.boundaries_s[0], a.boundaries_s[1], a.boundaries_s[2]};
  }
  if (a.eeg_rate_hz) g.eeg_rate_hz = *a.eeg_rate_hz;
  if (a.emg_rate_hz) g.emg_rate_hz = *a.emg_rate_hz;
  if (a.transition_s) g.transition_s = *a.transition_s;
  if (a.eeg_background) g.eeg_background = *a.eeg_background;
  if (a.eeg_sensor_noise) g.eeg_sensor_noise = *a.eeg_sensor_noise;
  if (a.emg_rest_level) g.emg_rest_level = *a.emg_rest_level;
  if (a.class_sigma) g.class_sigma = *a.class_sigma;
  if (!a.eeg_channels.empty()) g.eeg_channels = split_list(a.eeg_channels);
  if (!a.emg_channels.empty()) g.emg_channels = split_list(a.emg_channels);
  if (!a.eeg_alpha.empty()) g.eeg_alpha = parse_table(a.eeg_alpha, "--eeg-alpha");
  if (!a.eeg_beta.empty()) g.eeg_beta = parse_table(a.eeg_beta, "--eeg-beta");
  if (!a.emg_burst.empty()) g.emg_burst = parse_table(a.emg_burst, "--emg-burst");
  if (!a.source.empty()) g.source = a.source;
  g.validate();

  const fs::path dir(a.out);
  fs::create_directories(dir);
  for (int t = 0; t < g.trial_count; ++t) write_trial(dir, generate_trial(g, t));
  Manifest manifest("synth", cfg, args);
  manifest.output(dir);
  manifest.write(dir);
  out << "wrote " << g.trial_count << " trials to " << dir.string() << '\n';
  return kExitOk;
}

int cmd_extract(const ExtractArgs& a, PipelineConfig cfg, const std::vector<std::string>& args,
                std::ostream& out) {
  const std::string data = a.data.empty() ? cfg.data_dir : a.data;
  if (data.empty()) throw ConfigError("extract needs --data or data.dir in the config");
  require_dir(data, "data directory");
  refuse_overwrite(a.out, {data});
  const Modality m = parse_modality(a.modality);
  const auto trials = load_modality(data, m);
  Manifest manifest("extract", cfg, args);
  manifest.input(data);
  FeatureMatrix features;
  if (m == Modality::Eeg) {
    auto fc = cfg.eeg;
    if (!a.channels.empty()) fc.channels = split_list(a.channels);
    features = features::extract_eeg_dataset(trials, fc);
  } else {
    auto fc = cfg.emg;
    if (!a.channels.empty()) fc.channels = split_list(a.channels);
    if (a.willison_threshold) fc.willison_threshold = *a.willison_threshold;
    const auto thresholds = features::resolve_willison_thresholds(fc, trials);
    manifest.extra()["willison_thresholds"] = thresholds;
    features = features::extract_emg_dataset(trials, fc, thresholds);
  }
  ensure_parent(a.out);
  write_feature_csv(a.out, features);
  manifest.output(a.out);
  manifest.extra()["rows"] = features.row_count();
  manifest.extra()["features"] = features.feature_count();
  manifest.write(a.out);
  out << "extracted " << features.row_count() << " windows x " << features.feature_count() << " features from "
      << trials.size() << " trials\n";
  return kExitOk;
}

int cmd_select(const SelectArgs& a, PipelineConfig cfg, const std::vector<std::string>& args, std::ostream& out) {
  refuse_overwrite(a.out, {a.features});
  Manifest manifest("select", cfg, args);
  const auto features = load_features(a.features, manifest);
  auto b = cfg.selection.boruta;
  if (a.max_iterations) b.max_iterations = *a.max_iterations;
  if (a.alpha) b.alpha = *a.alpha;
  if (a.max_rows) b.max_rows = *a.max_rows;
  b.seed = derive_seed(cfg.seed, {0xB0});
  const auto report = boruta_select(features, b);
  ensure_parent(a.out);
  write_selection_csv(a.out, report);
  manifest.output(a.out);
  manifest.write(a.out);
  int confirmed = 0, rejected = 0;
  for (auto s : report.status) {
    confirmed += s == FeatureStatus::Confirmed;
    rejected += s == FeatureStatus::Rejected;
  }
  out << "confirmed " << confirmed << ", rejected " << rejected << ", tentative "
      << report.features.size() - static_cast<std::size_t>(confirmed + rejected) << " after " << report.iterations
      << " iterations\n";
  return kExitOk;
}

ClassifierSpec spec_for(const PipelineConfig& cfg, const std::string& override_type) {
  ClassifierSpec spec = cfg.classifier.spec;
  if (!override_type.empty()) spec.type = override_type;
  make_classifier(spec);  // validates the type
  return spec;
}

int cmd_train(const TrainArgs& a, PipelineConfig cfg, const std::vector<std::string>& args, std::ostream& out) {
  refuse_overwrite(a.out, {a.features, a.selection});
  Manifest manifest("train", cfg, args);
  const auto features = apply_selection(load_features(a.features, manifest), a.selection, manifest);
  const auto spec = spec_for(cfg, a.classifier);
  const auto model = train_model(features, spec, kStageCount, derive_seed(cfg.seed, {0x7A}));
  ensure_parent(a.out);
  save_model(a.out, model);
  manifest.output(a.out);
  manifest.write(a.out);
  out << "trained " << spec.type << " on " << features.row_count() << " windows, " << features.feature_count()
      << " features\n";
  return kExitOk;
}

int cmd_evaluate(const EvaluateArgs& a, PipelineConfig cfg, const std::vector<std::string>& args,
                 std::ostream& out) {
  refuse_overwrite(a.out, {a.features, a.selection, a.model});
  Manifest manifest("evaluate", cfg, args);
  const auto features = apply_selection(load_features(a.features, manifest), a.selection, manifest);
  CrossValidationReport report;
  if (!a.model.empty()) {
    require_file(a.model, "model file");
    manifest.input(a.model);
    const auto model = load_model(a.model);
    const auto samples = model.samples_for(features);
    const auto predicted = argmax_rows(model.classifier->predict_proba(samples));
    const int classes = model.classifier->class_count();
    report = summarize_folds(model.spec.type,
                             {report_metrics(confusion_matrix(samples.labels, predicted, classes))});
  } else {
    const auto spec = spec_for(cfg, a.classifier);
    CvOptions opt;
    opt.folds = a.folds.value_or(cfg.classifier.folds);
    opt.seed = derive_seed(cfg.seed, {0xC7});
    report = cross_validate(spec, features, opt);
  }
  ensure_parent(a.out);
  write_report_csv(a.out, report);
  manifest.output(a.out);
  if (!a.confusion_svg.empty()) {
    write_confusion_svg(a.confusion_svg, report.pooled.confusion, report.classifier + " confusion");
    manifest.output(a.confusion_svg);
  }
  manifest.extra()["warnings"] = report.warnings;
  manifest.write(a.out);
  out << report.classifier << ": accuracy " << report.mean.accuracy << " (std " << report.stddev.accuracy
      << "), macro F1 " << report.mean.macro_f1 << " over " << report.folds.size() << " fold(s)\n";
  return kExitOk;
}

int cmd_fuse(const FuseArgs& a, PipelineConfig cfg, const std::vector<std::string>& args, std::ostream& out) {
  const std::string data = a.data.empty() ? cfg.data_dir : a.data;
  if (data.empty()) throw ConfigError("fuse-eval needs --data or data.dir in the config");
  require_dir(data, "data directory");
  refuse_overwrite(a.out, {data});
  std::vector<Trial> trials;
  for (int id : list_trials(data)) trials.push_back(read_trial(data, id));
  if (trials.empty()) throw DataError("no trials found in " + data);

  FusionScenarioConfig sc;
  sc.eeg_features = cfg.eeg;
  sc.emg_features = cfg.emg;
  sc.eeg_classifier = cfg.classifier.spec;
  sc.emg_classifier = cfg.classifier.spec;
  sc.folds = a.folds.value_or(cfg.classifier.folds);
  sc.noise_alpha = a.alpha.value_or(cfg.fusion.noise_alpha);
  if (a.noise_case == "all") {
    sc.cases = cfg.fusion.cases;
  } else {
    sc.cases = {parse_noise_case(a.noise_case)};
  }
  sc.seed = derive_seed(cfg.seed, {0xF5});
  const auto report = run_fusion_scenarios(trials, sc);

  Manifest manifest("fuse-eval", cfg, args);
  manifest.input(data);
  ensure_parent(a.out);
  write_scenario_csv(a.out, report);
  manifest.output(a.out);
  manifest.extra()["weights"] = {{"eeg", report.weights.eeg}, {"emg", report.weights.emg}};
  manifest.extra()["clean_accuracy"] = {{"eeg", report.clean_acc_eeg}, {"emg", report.clean_acc_emg}};
  manifest.write(a.out);
  out << "weights eeg " << report.weights.eeg << " emg " << report.weights.emg << '\n';
  for (const auto& r : report.rows) {
    out << to_string(r.noise_case) << ": eeg " << r.acc_eeg << ", emg " << r.acc_emg << ", fused " << r.acc_fused
        << '\n';
  }
  return kExitOk;
}

int cmd_erders(const ErdArgs& a, PipelineConfig cfg, const std::vector<std::string>& args, std::ostream& out) {
  const std::string data = a.data.empty() ? cfg.data_dir : a.data;
  if (data.empty()) throw ConfigError("erders needs --data or data.dir in the config");
  require_dir(data, "data directory");
  refuse_overwrite(a.out, {data});
  auto curve_cfg = cfg.erders.curve;
  if (!a.band.empty()) {
    if (a.band.size() != 2) throw ConfigError("--band expects low and high frequencies");
    curve_cfg.band = {a.band[0], a.band[1]};
  }
  if (!a.baseline.empty()) {
    if (a.baseline.size() != 2) throw ConfigError("--baseline expects start and end seconds");
    curve_cfg.baseline_start_s = a.baseline[0];
    curve_cfg.baseline_end_s = a.baseline[1];
  }
  const std::string channel = a.channel.empty() ? cfg.erders.channel : a.channel;
  const auto trials = load_modality(data, Modality::Eeg);
  const auto curve = erd_ers_curve(trials, channel, curve_cfg);
  Manifest manifest("erders", cfg, args);
  manifest.input(data);
  ensure_parent(a.out);
  write_curve_csv(a.out, curve);
  manifest.output(a.out);
  if (!a.svg.empty()) {
    write_curve_svg(a.svg, curve);
    manifest.output(a.svg);
  }
  manifest.write(a.out);
  out << "ERD/ERS curve for " << channel << " over " << curve.trial_count << " trials, " << curve.time_s.size()
      << " points\n";
  return kExitOk;
}

int cmd_report(const ReportArgs& a, PipelineConfig cfg, const std::vector<std::string>& args, std::ostream& out) {
  std::vector<fs::path> inputs(a.inputs.begin(), a.inputs.end());
  refuse_overwrite(a.out, inputs);
  Manifest manifest("report", cfg, args);
  std::vector<CrossValidationReport> reports;
  for (const auto& p : a.inputs) {
    require_file(p, "report file");
    manifest.input(p);
    reports.push_back(read_report_csv(p));
  }
  ensure_parent(a.out);
  write_summary_table_csv(a.out, reports);
  manifest.output(a.out);
  manifest.write(a.out);
  out << "summarized " << reports.size() << " report(s)\n";
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"EEG/EMG movement-stage recognition and decision-level fusion", "biofuse"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Common common;
  auto add_common = [&common](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "Pipeline config (JSON, comments allowed)");
    sub->add_option("--seed", common.seed, "Root seed; overrides BIOFUSE_SEED and the config");
  };

  SynthArgs synth;
  auto* s_synth = app.add_subcommand("synth", "Generate a synthetic four-stage EEG/EMG dataset");
  add_common(s_synth);
  s_synth->add_option("--out", synth.out, "Output directory")->required();
  s_synth->add_option("--trial-count", synth.trial_count, "Number of trials");
  s_synth->add_option("--trial-length-s", synth.trial_length_s, "Trial length in seconds");
  s_synth->add_option("--boundaries-s", synth.boundaries_s, "Three stage boundaries in seconds")->expected(3);
  s_synth->add_option("--eeg-rate-hz", synth.eeg_rate_hz, "EEG sampling rate");
  s_synth->add_option("--emg-rate-hz", synth.emg_rate_hz, "EMG sampling rate");
  s_synth->add_option("--transition-s", synth.transition_s, "Amplitude ramp between stages");
  s_synth->add_option("--eeg-background", synth.eeg_background, "Std of the 1-45 Hz EEG background");
  s_synth->add_option("--eeg-sensor-noise", synth.eeg_sensor_noise, "Std of white EEG sensor noise");
  s_synth->add_option("--emg-rest-level", synth.emg_rest_level, "EMG envelope floor");
  s_synth->add_option("--class-sigma", synth.class_sigma, "Log-normal amplitude jitter per trial and stage");
  s_synth->add_option("--eeg-channels", synth.eeg_channels, "Comma-separated EEG channel names");
  s_synth->add_option("--emg-channels", synth.emg_channels, "Comma-separated EMG channel names");
  s_synth->add_option("--eeg-alpha", synth.eeg_alpha, "JSON table of per-channel stage alpha amplitudes");
  s_synth->add_option("--eeg-beta", synth.eeg_beta, "JSON table of per-channel stage beta amplitudes");
  s_synth->add_option("--emg-burst", synth.emg_burst, "JSON table of per-muscle stage burst amplitudes");
  s_synth->add_option("--source", synth.source, "Source tag written to trial metadata");

  ExtractArgs extract;
  auto* s_extract = app.add_subcommand("extract", "Compute windowed features for one modality");
  add_common(s_extract);
  s_extract->add_option("--data", extract.data, "Trial directory");
  s_extract->add_option("--modality", extract.modality, "eeg or emg")->required()->check(CLI::IsMember({"eeg", "emg"}));
  s_extract->add_option("--out", extract.out, "Feature CSV to write")->required();
  s_extract->add_option("--channels", extract.channels, "Comma-separated channel subset");
  s_extract->add_option("--willison-threshold", extract.willison_threshold, "Absolute Willison threshold (EMG)");

  SelectArgs select;
  auto* s_select = app.add_subcommand("select", "Boruta feature selection");
  add_common(s_select);
  s_select->add_option("--features", select.features, "Feature CSV")->required();
  s_select->add_option("--out", select.out, "Selection CSV to write")->required();
  s_select->add_option("--max-iterations", select.max_iterations, "Boruta iterations");
  s_select->add_option("--alpha", select.alpha, "Significance level");
  s_select->add_option("--max-rows", select.max_rows, "Row subsample (0 keeps all)");

  TrainArgs train;
  auto* s_train = app.add_subcommand("train", "Train a classifier on a feature CSV");
  add_common(s_train);
  s_train->add_option("--features", train.features, "Feature CSV")->required();
  s_train->add_option("--selection", train.selection, "Selection CSV; keeps confirmed and tentative features");
  s_train->add_option("--out", train.out, "Model JSON to write")->required();
  s_train->add_option("--classifier", train.classifier, "knn, mlp or lstm");

  EvaluateArgs evaluate;
  auto* s_eval = app.add_subcommand("evaluate", "Cross-validate a classifier or score a saved model");
  add_common(s_eval);
  s_eval->add_option("--features", evaluate.features, "Feature CSV")->required();
  s_eval->add_option("--selection", evaluate.selection, "Selection CSV");
  s_eval->add_option("--model", evaluate.model, "Saved model; when given, scores it instead of cross-validating");
  s_eval->add_option("--out", evaluate.out, "Report CSV to write")->required();
  s_eval->add_option("--classifier", evaluate.classifier, "knn, mlp or lstm");
  s_eval->add_option("--folds", evaluate.folds, "Cross-validation folds");
  s_eval->add_option("--confusion-svg", evaluate.confusion_svg, "Also plot the pooled confusion matrix");

  FuseArgs fuse;
  auto* s_fuse = app.add_subcommand("fuse-eval", "Run the fusion noise scenarios");
  add_common(s_fuse);
  s_fuse->add_option("--data", fuse.data, "Trial directory");
  s_fuse->add_option("--out", fuse.out, "Scenario CSV to write")->required();
  s_fuse->add_option("--case", fuse.noise_case, "clean, eeg-noise, emg-noise, both or all")
      ->check(CLI::IsMember({"all", "clean", "eeg-noise", "emg-noise", "both"}));
  s_fuse->add_option("--alpha", fuse.alpha, "Noise std as a multiple of the baseline fluctuation");
  s_fuse->add_option("--folds", fuse.folds, "Cross-validation folds");

  ErdArgs erd;
  auto* s_erd = app.add_subcommand("erders", "ERD/ERS band-power curve for one EEG channel");
  add_common(s_erd);
  s_erd->add_option("--data", erd.data, "Trial directory");
  s_erd->add_option("--out", erd.out, "Curve CSV to write")->required();
  s_erd->add_option("--channel", erd.channel, "EEG channel");
  s_erd->add_option("--band", erd.band, "Band edges in Hz")->expected(2);
  s_erd->add_option("--baseline", erd.baseline, "Baseline interval in seconds")->expected(2);
  s_erd->add_option("--svg", erd.svg, "Also plot the curve");

  ReportArgs report;
  auto* s_report = app.add_subcommand("report", "Summarize evaluation reports into one table");
  add_common(s_report);
  s_report->add_option("--inputs", report.inputs, "Report CSVs")->required()->expected(1, -1);
  s_report->add_option("--out", report.out, "Summary CSV to write")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << " (run with --help for usage)\n";
    return kExitUsage;
  }

  try {
    const PipelineConfig cfg = resolve_config(common);
    if (s_synth->parsed()) return cmd_synth(synth, cfg, args, out);
    if (s_extract->parsed()) return cmd_extract(extract, cfg, args, out);
    if (s_select->parsed()) return cmd_select(select, cfg, args, out);
    if (s_train->parsed()) return cmd_train(train, cfg, args, out);
    if (s_eval->parsed()) return cmd_evaluate(evaluate, cfg, args, out);
    if (s_fuse->parsed()) return cmd_fuse(fuse, cfg, args, out);
    if (s_erd->parsed()) return cmd_erders(erd, cfg, args, out);
    if (s_report->parsed()) return cmd_report(report, cfg, args, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const TrainingError& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  err << "error: no subcommand given\n";
  return kExitUsage;
}

}  // namespace biofuse::cli
