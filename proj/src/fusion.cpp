#include "biofuse/fusion.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include "biofuse/errors.hpp"
#include "biofuse/random.hpp"
#include "biofuse/synth.hpp"

namespace biofuse {

FusionWeights fusion_weights(double accuracy_eeg, double accuracy_emg) {
  if (!(accuracy_eeg > 0.0 && accuracy_eeg <= 1.0) || !(accuracy_emg > 0.0 && accuracy_emg <= 1.0)) {
    throw std::invalid_argument("fusion weights need accuracies in (0, 1]");
  }
  FusionWeights w;
  w.eeg = accuracy_eeg / (accuracy_eeg + accuracy_emg);
  w.emg = 1.0 - w.eeg;
  return w;
}

double mean_fluctuation(const Recording& rec) {
  if (rec.length() < 2) {
    throw DataError("trial " + std::to_string(rec.trial_id()) + " needs at least 2 samples for noisiness");
  }
  if (rec.channel_count() == 0) throw DataError("trial " + std::to_string(rec.trial_id()) + " has no channels");
  const Eigen::MatrixXd& x = rec.samples();
  const Eigen::Index n = x.cols();
  const double per_channel =
      (x.rightCols(n - 1) - x.leftCols(n - 1)).cwiseAbs().rowwise().sum().mean() / static_cast<double>(n - 1);
  return per_channel;
}

namespace {

template <typename Get>
NoisinessBaseline baseline_from(std::size_t count, Get get) {
  if (count == 0) throw DataError("noisiness baseline needs at least one training trial");
  NoisinessBaseline b;
  b.modality = get(0).modality();
  double sum = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    const Recording& r = get(i);
    if (r.modality() != b.modality) throw DataError("noisiness baseline mixes modalities");
    sum += mean_fluctuation(r);
  }
  b.fluctuation = sum / static_cast<double>(count);
  if (!(b.fluctuation > 0.0)) {
    throw DataError("noisiness baseline is zero: all " + std::string(to_string(b.modality)) +
                    " training trials are constant");
  }
  return b;
}

}  // namespace

NoisinessBaseline noisiness_baseline(std::span<const Recording> training) {
  return baseline_from(training.size(), [&](std::size_t i) -> const Recording& { return training[i]; });
}

NoisinessBaseline noisiness_baseline(std::span<const LabeledRecording> training) {
  return baseline_from(training.size(), [&](std::size_t i) -> const Recording& { return training[i].recording; });
}

double noisiness(const Recording& unseen, const NoisinessBaseline& baseline) {
  if (!(baseline.fluctuation > 0.0)) throw std::invalid_argument("noisiness baseline must be positive");
  return mean_fluctuation(unseen) / baseline.fluctuation;
}

Modality choose_source(const FusionWeights& w, double n_eeg, double n_emg, bool* tie) {
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const double t_eeg = n_eeg == 0.0 ? kInf : w.eeg / n_eeg;
  const double t_emg = n_emg == 0.0 ? kInf : w.emg / n_emg;
  if (tie) *tie = t_eeg == t_emg;
  if (t_eeg > t_emg) return Modality::Eeg;
  if (t_emg > t_eeg) return Modality::Emg;
  return w.eeg > w.emg ? Modality::Eeg : Modality::Emg;
}

namespace {

int argmax(const std::vector<double>& p) {
  if (p.empty()) throw std::invalid_argument("empty probability vector");
  std::size_t best = 0;
  for (std::size_t i = 1; i < p.size(); ++i) {
    if (p[i] > p[best]) best = i;
  }
  return static_cast<int>(best);
}

}  // namespace

FusionResult fuse(const SourceDecision& eeg, const SourceDecision& emg, const FusionWeights& w) {
  if (eeg.proba.size() != emg.proba.size()) throw std::invalid_argument("fuse: class sets differ");
  if (eeg.noisiness < 0.0 || emg.noisiness < 0.0) throw std::invalid_argument("fuse: negative noisiness");
  constexpr double kInf = std::numeric_limits<double>::infinity();
  FusionResult r;
  r.truthiness_eeg = eeg.noisiness == 0.0 ? kInf : w.eeg / eeg.noisiness;
  r.truthiness_emg = emg.noisiness == 0.0 ? kInf : w.emg / emg.noisiness;
  r.chosen = choose_source(w, eeg.noisiness, emg.noisiness, &r.tie);
  r.label = argmax(r.chosen == Modality::Eeg ? eeg.proba : emg.proba);
  return r;
}

// ---------------------------------------------------------------------------

std::string_view to_string(NoiseCase c) {
  switch (c) {
    case NoiseCase::Clean: return "clean";
    case NoiseCase::EegNoise: return "eeg-noise";
    case NoiseCase::EmgNoise: return "emg-noise";
    case NoiseCase::BothNoise: return "both";
  }
  return "clean";
}

NoiseCase parse_noise_case(std::string_view text) {
  for (auto c : {NoiseCase::Clean, NoiseCase::EegNoise, NoiseCase::EmgNoise, NoiseCase::BothNoise}) {
    if (text == to_string(c)) return c;
  }
  throw ConfigError("unknown noise case '" + std::string(text) + "' (expected clean, eeg-noise, emg-noise or both)");
}

namespace {

bool noises(NoiseCase c, Modality m) {
  if (c == NoiseCase::BothNoise) return true;
  return (c == NoiseCase::EegNoise && m == Modality::Eeg) || (c == NoiseCase::EmgNoise && m == Modality::Emg);
}

std::string_view noised_label(NoiseCase c) {
  switch (c) {
    case NoiseCase::Clean: return "none";
    case NoiseCase::EegNoise: return "eeg";
    case NoiseCase::EmgNoise: return "emg";
    case NoiseCase::BothNoise: return "eeg+emg";
  }
  return "none";
}

struct SourceScore {
  long long correct = 0;
  long long total = 0;
  double n = 0.0;
};

struct TrialScore {
  SourceScore eeg;
  SourceScore emg;
};

SourceScore score(const TrainedModel& model, const FeatureMatrix& features) {
  const SampleSet samples = model.samples_for(features);
  const auto predicted = argmax_rows(model.classifier->predict_proba(samples));
  SourceScore s;
  s.total = static_cast<long long>(predicted.size());
  for (std::size_t i = 0; i < predicted.size(); ++i) s.correct += predicted[i] == samples.labels[i] ? 1 : 0;
  return s;
}

double ratio(long long a, long long b) { return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b); }

}  // namespace

FusionScenarioReport run_fusion_scenarios(std::span<const Trial> trials, const FusionScenarioConfig& cfg) {
  if (trials.empty()) throw DataError("fusion scenarios need trials");
  if (!(cfg.noise_alpha >= 0.0)) throw ConfigError("noise alpha must be >= 0");
  std::vector<int> ids;
  for (const auto& t : trials) {
    if (!t.eeg || !t.emg) {
      throw DataError("trial " + std::to_string(t.trial_id) + " lacks " + (t.eeg ? "EMG" : "EEG") +
                      " data; fusion needs both modalities");
    }
    ids.push_back(t.trial_id);
  }
  if (std::set<int>(ids.begin(), ids.end()).size() != ids.size()) throw DataError("duplicate trial ids");

  std::vector<NoiseCase> cases = cfg.cases;
  if (std::find(cases.begin(), cases.end(), NoiseCase::Clean) == cases.end()) {
    cases.insert(cases.begin(), NoiseCase::Clean);  // weights need clean accuracies
  }

  std::vector<FeatureMatrix> clean_eeg;
  clean_eeg.reserve(trials.size());
  for (const auto& t : trials) clean_eeg.push_back(features::extract_eeg_features(*t.eeg, cfg.eeg_features));

  const auto folds = split_trials(ids, cfg.folds, cfg.seed);
  std::map<int, std::size_t> index_of;
  for (std::size_t i = 0; i < trials.size(); ++i) index_of[trials[i].trial_id] = i;
  const std::uint64_t noise_seed_eeg = derive_seed(cfg.seed, {0x401, 0});
  const std::uint64_t noise_seed_emg = derive_seed(cfg.seed, {0x401, 1});

  // scores[case][trial index]
  std::vector<std::vector<TrialScore>> scores(cases.size(), std::vector<TrialScore>(trials.size()));

  for (std::size_t f = 0; f < folds.size(); ++f) {
    const std::set<int> test_ids(folds[f].begin(), folds[f].end());
    std::vector<LabeledRecording> train_eeg;
    std::vector<LabeledRecording> train_emg;
    std::vector<FeatureMatrix> train_eeg_features;
    for (std::size_t i = 0; i < trials.size(); ++i) {
      if (test_ids.count(trials[i].trial_id)) continue;
      train_eeg.push_back(*trials[i].eeg);
      train_emg.push_back(*trials[i].emg);
      train_eeg_features.push_back(clean_eeg[i]);
    }
    const auto base_eeg = noisiness_baseline(std::span<const LabeledRecording>(train_eeg));
    const auto base_emg = noisiness_baseline(std::span<const LabeledRecording>(train_emg));
    const auto thresholds = features::resolve_willison_thresholds(cfg.emg_features, train_emg);

    const auto model_eeg = train_model(FeatureMatrix::concat_rows(train_eeg_features), cfg.eeg_classifier,
                                       cfg.class_count, derive_seed(cfg.seed, {0xF0, f, 0}));
    const auto model_emg =
        train_model(features::extract_emg_dataset(train_emg, cfg.emg_features, thresholds), cfg.emg_classifier,
                    cfg.class_count, derive_seed(cfg.seed, {0xF0, f, 1}));

    for (int id : folds[f]) {
      const std::size_t ti = index_of.at(id);
      const Trial& trial = trials[ti];
      for (std::size_t c = 0; c < cases.size(); ++c) {
        TrialScore& s = scores[c][ti];
        if (noises(cases[c], Modality::Eeg) && cfg.noise_alpha > 0.0) {
          LabeledRecording noisy{add_gaussian_noise(trial.eeg->recording, cfg.noise_alpha, base_eeg, noise_seed_eeg),
                                 trial.eeg->stages};
          s.eeg = score(model_eeg, features::extract_eeg_features(noisy, cfg.eeg_features));
          s.eeg.n = noisiness(noisy.recording, base_eeg);
        } else {
          s.eeg = score(model_eeg, clean_eeg[ti]);
          s.eeg.n = noisiness(trial.eeg->recording, base_eeg);
        }
        if (noises(cases[c], Modality::Emg) && cfg.noise_alpha > 0.0) {
          LabeledRecording noisy{add_gaussian_noise(trial.emg->recording, cfg.noise_alpha, base_emg, noise_seed_emg),
                                 trial.emg->stages};
          s.emg = score(model_emg, features::extract_emg_features(noisy, cfg.emg_features, thresholds));
          s.emg.n = noisiness(noisy.recording, base_emg);
        } else {
          s.emg = score(model_emg, features::extract_emg_features(*trial.emg, cfg.emg_features, thresholds));
          s.emg.n = noisiness(trial.emg->recording, base_emg);
        }
      }
    }
  }

  FusionScenarioReport report;
  const std::size_t clean_index =
      static_cast<std::size_t>(std::find(cases.begin(), cases.end(), NoiseCase::Clean) - cases.begin());
  {
    long long ce = 0, te = 0, cm = 0, tm = 0;
    for (const auto& s : scores[clean_index]) {
      ce += s.eeg.correct;
      te += s.eeg.total;
      cm += s.emg.correct;
      tm += s.emg.total;
    }
    report.clean_acc_eeg = ratio(ce, te);
    report.clean_acc_emg = ratio(cm, tm);
  }
  if (report.clean_acc_eeg <= 0.0 || report.clean_acc_emg <= 0.0) {
    throw TrainingError("a clean classifier scored zero accuracy; fusion weights are undefined");
  }
  report.weights = fusion_weights(report.clean_acc_eeg, report.clean_acc_emg);

  for (std::size_t c = 0; c < cases.size(); ++c) {
    if (cases[c] == NoiseCase::Clean &&
        std::find(cfg.cases.begin(), cfg.cases.end(), NoiseCase::Clean) == cfg.cases.end()) {
      continue;
    }
    ScenarioRow row;
    row.noise_case = cases[c];
    row.noise_alpha = cases[c] == NoiseCase::Clean ? 0.0 : cfg.noise_alpha;
    long long ce = 0, te = 0, cm = 0, tm = 0, cf = 0, tf = 0;
    double n_eeg = 0.0, n_emg = 0.0;
    for (const auto& s : scores[c]) {
      ce += s.eeg.correct;
      te += s.eeg.total;
      cm += s.emg.correct;
      tm += s.emg.total;
      n_eeg += s.eeg.n;
      n_emg += s.emg.n;
      const bool eeg_wins = choose_source(report.weights, s.eeg.n, s.emg.n) == Modality::Eeg;
      const SourceScore& chosen = eeg_wins ? s.eeg : s.emg;
      cf += chosen.correct;
      tf += chosen.total;
      (eeg_wins ? row.trials_choosing_eeg : row.trials_choosing_emg) += 1;
    }
    row.acc_eeg = ratio(ce, te);
    row.acc_emg = ratio(cm, tm);
    row.acc_fused = ratio(cf, tf);
    row.mean_n_eeg = n_eeg / static_cast<double>(trials.size());
    row.mean_n_emg = n_emg / static_cast<double>(trials.size());
    report.rows.push_back(row);
  }
  return report;
}

namespace {

std::string num(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 6);
  return std::string(buf, res.ptr);
}

}  // namespace

void write_scenario_csv(const std::filesystem::path& path, const FusionScenarioReport& report) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "case,modality_noised,noise_alpha,acc_eeg,acc_emg,acc_fused,mean_N_eeg,mean_N_emg\n";
  for (const auto& r : report.rows) {
    out << to_string(r.noise_case) << ',' << noised_label(r.noise_case) << ',' << num(r.noise_alpha) << ','
        << num(r.acc_eeg) << ',' << num(r.acc_emg) << ',' << num(r.acc_fused) << ',' << num(r.mean_n_eeg) << ','
        << num(r.mean_n_emg) << '\n';
  }
}

}  // namespace biofuse
