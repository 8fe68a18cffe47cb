#pragma once

#include <filesystem>
#include <string>

#include "biofuse/erders.hpp"
#include "biofuse/metrics.hpp"

namespace biofuse {

/// Line plot of a percent-change curve with a zero reference line.
void write_curve_svg(const std::filesystem::path& path, const ErdErsCurve& curve);

/// Heat map of a confusion matrix with counts in every cell.
void write_confusion_svg(const std::filesystem::path& path, const ConfusionMatrix& confusion,
                         const std::string& title);

}  // namespace biofuse
