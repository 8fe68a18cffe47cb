#pragma once

#include <nlohmann/json.hpp>

#include "biofuse/classifier.hpp"

namespace biofuse::detail {

inline nlohmann::json training_to_json(const TrainingConfig& t) {
  return {{"learning_rate", t.learning_rate}, {"momentum", t.momentum},
          {"batch_size", t.batch_size},       {"max_epochs", t.max_epochs},
          {"patience", t.patience},           {"min_delta", t.min_delta},
          {"validation_fraction", t.validation_fraction}};
}

inline TrainingConfig training_from_json(const nlohmann::json& j, TrainingConfig t) {
  t.learning_rate = j.value("learning_rate", t.learning_rate);
  t.momentum = j.value("momentum", t.momentum);
  t.batch_size = j.value("batch_size", t.batch_size);
  t.max_epochs = j.value("max_epochs", t.max_epochs);
  t.patience = j.value("patience", t.patience);
  t.min_delta = j.value("min_delta", t.min_delta);
  t.validation_fraction = j.value("validation_fraction", t.validation_fraction);
  return t;
}

}  // namespace biofuse::detail
