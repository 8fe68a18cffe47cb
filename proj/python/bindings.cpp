#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "biofuse/config.hpp"
#include "biofuse/dsp.hpp"
#include "biofuse/erders.hpp"
#include "biofuse/errors.hpp"
#include "biofuse/features.hpp"
#include "biofuse/fusion.hpp"
#include "biofuse/synth.hpp"

namespace py = pybind11;
using namespace biofuse;

namespace {

Recording make_recording(Modality m, std::vector<std::string> channels, double fs, Eigen::MatrixXd samples,
                         int trial_id) {
  return Recording(m, std::move(channels), fs, std::move(samples), trial_id);
}

py::dict recording_dict(const LabeledRecording& r) {
  py::dict d;
  d["samples"] = r.recording.samples();
  d["channels"] = r.recording.channel_names();
  d["sampling_rate_hz"] = r.recording.sampling_rate_hz();
  const auto b = r.stages.boundaries();
  d["boundaries"] = std::vector<Eigen::Index>(b.begin(), b.end());
  return d;
}

GeneratorConfig generator_from(const std::string& config_json, std::uint64_t seed) {
  PipelineConfig cfg = config_json.empty() ? PipelineConfig{} : parse_config(config_json);
  cfg.synth.seed = seed;
  return cfg.synth;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "EEG/EMG movement-stage features, fusion and ERD/ERS curves";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_ValueError);

  py::enum_<Modality>(m, "Modality").value("EEG", Modality::Eeg).value("EMG", Modality::Emg);

  m.def("mav", [](std::vector<double> w) { return features::mav(w); });
  m.def("variance", [](std::vector<double> w) { return features::variance(w); });
  m.def("waveform_length", [](std::vector<double> w) { return features::waveform_length(w); });
  m.def("willison_amplitude", [](std::vector<double> w, double t) { return features::willison_amplitude(w, t); },
        py::arg("window"), py::arg("threshold"));
  m.def("spectral_energy", [](std::vector<double> w) { return features::spectral_energy(w); });
  m.def(
      "ar_coefficients",
      [](std::vector<double> w, int order) { return features::ar_coefficients(w, order).coefficients; },
      py::arg("window"), py::arg("order") = 4);
  m.def("dwt_energies", [](std::vector<double> w) {
    const auto e = features::dwt_features(w);
    return std::make_pair(e.approx, e.detail);
  });

  m.def(
      "welch_psd",
      [](std::vector<double> x, double fs, std::size_t segment, std::size_t overlap, std::size_t nfft) {
        const auto p = dsp::welch_psd(x, fs, segment, overlap, dsp::WindowFunction::Hann, nfft);
        return std::make_pair(p.freqs_hz, p.power);
      },
      py::arg("x"), py::arg("fs"), py::arg("segment_len"), py::arg("overlap"), py::arg("nfft") = 0);
  m.def(
      "band_power",
      [](std::vector<double> freqs, std::vector<double> power, double lo, double hi) {
        return features::subband_power(dsp::PsdEstimate{std::move(freqs), std::move(power)}, {lo, hi});
      },
      py::arg("freqs_hz"), py::arg("power"), py::arg("low_hz"), py::arg("high_hz"));
  m.def("simpson", [](std::vector<double> y, std::vector<double> x) { return dsp::simpson_integrate(y, x); },
        py::arg("y"), py::arg("x"));
  m.def(
      "bandpass",
      [](std::vector<double> x, double lo, double hi, int order, double fs) {
        return dsp::butterworth_bandpass(x, dsp::BandpassDesign(lo, hi, order, fs));
      },
      py::arg("x"), py::arg("low_hz"), py::arg("high_hz"), py::arg("order"), py::arg("fs"));
  m.def(
      "savgol",
      [](std::vector<double> x, std::size_t window, int poly) { return dsp::savgol_smooth(x, window, poly); },
      py::arg("x"), py::arg("window_len"), py::arg("polyorder"));

  m.def(
      "fusion_weights",
      [](double acc_eeg, double acc_emg) {
        const auto w = fusion_weights(acc_eeg, acc_emg);
        return std::make_pair(w.eeg, w.emg);
      },
      py::arg("acc_eeg"), py::arg("acc_emg"));
  m.def(
      "choose_source",
      [](double w_eeg, double w_emg, double n_eeg, double n_emg) {
        return choose_source(FusionWeights{w_eeg, w_emg}, n_eeg, n_emg);
      },
      py::arg("w_eeg"), py::arg("w_emg"), py::arg("n_eeg"), py::arg("n_emg"));
  m.def(
      "noisiness",
      [](const Eigen::MatrixXd& x, const std::vector<Eigen::MatrixXd>& reference, Modality modality) {
        std::vector<Recording> ref;
        auto named = [](Eigen::Index n) {
          std::vector<std::string> v;
          for (Eigen::Index i = 0; i < n; ++i) v.push_back("ch" + std::to_string(i));
          return v;
        };
        for (std::size_t i = 0; i < reference.size(); ++i) {
          ref.push_back(make_recording(modality, named(reference[i].rows()), 1.0, reference[i], static_cast<int>(i)));
        }
        const auto base = noisiness_baseline(ref);
        return noisiness(make_recording(modality, named(x.rows()), 1.0, x, 0), base);
      },
      py::arg("x"), py::arg("reference"), py::arg("modality") = Modality::Eeg);

  m.def(
      "generate_trial",
      [](int trial_id, std::uint64_t seed, const std::string& config_json) {
        const Trial t = generate_trial(generator_from(config_json, seed), trial_id);
        py::dict d;
        d["trial_id"] = t.trial_id;
        d["source"] = t.source;
        d["eeg"] = recording_dict(*t.eeg);
        d["emg"] = recording_dict(*t.emg);
        return d;
      },
      py::arg("trial_id"), py::arg("seed") = 0, py::arg("config_json") = "");

  m.def(
      "erd_ers_curve",
      [](const std::vector<Eigen::MatrixXd>& trials, const std::vector<std::string>& channels, double fs,
         const std::string& channel) {
        std::vector<Recording> recs;
        for (std::size_t i = 0; i < trials.size(); ++i) {
          recs.push_back(make_recording(Modality::Eeg, channels, fs, trials[i], static_cast<int>(i)));
        }
        const auto c = erd_ers_curve(recs, channel);
        return std::make_pair(c.time_s, c.percent_change);
      },
      py::arg("trials"), py::arg("channels"), py::arg("fs"), py::arg("channel"));

  m.def("default_config", []() { return config_to_json(PipelineConfig{}).dump(2); });
  m.def("normalize_config", [](const std::string& text) { return config_to_json(parse_config(text)).dump(2); });
}
