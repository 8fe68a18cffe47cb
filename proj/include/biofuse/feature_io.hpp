#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "biofuse/signal_model.hpp"

namespace biofuse {

/// `trial_id,window_start,label,<feature...>`, one row per window. Values
/// use the shortest representation that reads back to the same double.
void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& m);
FeatureMatrix read_feature_csv(const std::filesystem::path& path);

}  // namespace biofuse
