#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "biofuse/classifier.hpp"
#include "biofuse/erders.hpp"
#include "biofuse/features.hpp"
#include "biofuse/fusion.hpp"
#include "biofuse/selection.hpp"
#include "biofuse/synth.hpp"

namespace biofuse {

struct SelectionSettings {
  bool enabled = true;
  BorutaConfig boruta{};
};

struct ClassifierSettings {
  ClassifierSpec spec{};
  int folds = 10;
};

struct FusionSettings {
  double noise_alpha = 3.0;
  std::vector<NoiseCase> cases{NoiseCase::Clean, NoiseCase::EegNoise, NoiseCase::EmgNoise, NoiseCase::BothNoise};
};

struct ErdErsSettings {
  std::string channel = "C3";
  ErdErsConfig curve{};
};

/// Every tunable of the pipeline. Section seeds are derived from `seed`.
struct PipelineConfig {
  std::uint64_t seed = 0;
  std::string data_dir;
  features::EegFeatureConfig eeg{};
  features::EmgFeatureConfig emg{};
  SelectionSettings selection{};
  ClassifierSettings classifier{};
  FusionSettings fusion{};
  ErdErsSettings erders{};
  GeneratorConfig synth{};
};

/// Parses a config document. Comments are allowed; unknown keys, wrong
/// types and out-of-range values raise ConfigError naming the key path.
PipelineConfig config_from_json(const nlohmann::json& doc);
PipelineConfig parse_config(std::string_view text);
PipelineConfig load_config(const std::filesystem::path& path);

/// Complete document with every field, suitable for config_from_json.
nlohmann::json config_to_json(const PipelineConfig& cfg);

/// Applies BIOFUSE_SEED when set. Throws ConfigError on a malformed value.
void apply_environment(PipelineConfig& cfg);

/// Range checks shared by the parser and programmatic callers.
void validate_config(const PipelineConfig& cfg);

}  // namespace biofuse
