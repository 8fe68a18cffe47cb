#include "biofuse/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "biofuse/errors.hpp"
#include "biofuse/signal_model.hpp"

namespace biofuse {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::ofstream open(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

}  // namespace

void write_curve_svg(const std::filesystem::path& path, const ErdErsCurve& curve) {
  if (curve.time_s.empty()) throw DataError("cannot plot an empty curve");
  constexpr double kW = 800, kH = 400, kL = 60, kR = 20, kT = 30, kB = 40;
  const auto [tmin, tmax] = std::minmax_element(curve.time_s.begin(), curve.time_s.end());
  auto [pmin_it, pmax_it] = std::minmax_element(curve.percent_change.begin(), curve.percent_change.end());
  const double lo = std::min(*pmin_it, 0.0) - 5.0;
  const double hi = std::max(*pmax_it, 0.0) + 5.0;
  const double span_t = std::max(*tmax - *tmin, 1e-9);
  auto x = [&](double t) { return kL + (t - *tmin) / span_t * (kW - kL - kR); };
  auto y = [&](double p) { return kT + (hi - p) / (hi - lo) * (kH - kT - kB); };

  auto out = open(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kL << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << curve.channel << " "
      << fmt(curve.band.low_hz) << "-" << fmt(curve.band.high_hz) << " Hz, " << curve.trial_count
      << " trials</text>\n";
  out << "<line x1=\"" << kL << "\" x2=\"" << kW - kR << "\" y1=\"" << fmt(y(0)) << "\" y2=\"" << fmt(y(0))
      << "\" stroke=\"#999\" stroke-dasharray=\"4 4\"/>\n";
  out << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
  const std::size_t stride = std::max<std::size_t>(1, curve.time_s.size() / 2000);
  for (std::size_t i = 0; i < curve.time_s.size(); i += stride) {
    out << fmt(x(curve.time_s[i])) << ',' << fmt(y(curve.percent_change[i])) << ' ';
  }
  out << "\"/>\n";
  out << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 8 << "\" font-family=\"sans-serif\" font-size=\"12\">time (s)</text>\n";
  out << "<text x=\"5\" y=\"" << fmt(y(hi) + 12) << "\" font-family=\"sans-serif\" font-size=\"12\">" << fmt(hi)
      << "%</text>\n";
  out << "<text x=\"5\" y=\"" << fmt(y(lo)) << "\" font-family=\"sans-serif\" font-size=\"12\">" << fmt(lo)
      << "%</text>\n";
  out << "</svg>\n";
}

void write_confusion_svg(const std::filesystem::path& path, const ConfusionMatrix& confusion,
                         const std::string& title) {
  constexpr double kCell = 70, kL = 110, kT = 50;
  const Eigen::Index n = confusion.rows();
  const long long peak = std::max<long long>(1, confusion.maxCoeff());
  auto out = open(path);
  const double size_w = kL + kCell * static_cast<double>(n) + 20;
  const double size_h = kT + kCell * static_cast<double>(n) + 40;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size_w << "\" height=\"" << size_h << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"10\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << title << "</text>\n";
  for (Eigen::Index r = 0; r < n; ++r) {
    const std::string name = r < kStageCount ? std::string(kStageNames[static_cast<std::size_t>(r)])
                                             : std::to_string(r);
    out << "<text x=\"10\" y=\"" << kT + kCell * (static_cast<double>(r) + 0.55)
        << "\" font-family=\"sans-serif\" font-size=\"12\">" << name << "</text>\n";
    for (Eigen::Index c = 0; c < n; ++c) {
      const double shade = static_cast<double>(confusion(r, c)) / static_cast<double>(peak);
      const int level = static_cast<int>(255.0 * (1.0 - 0.8 * shade));
      out << "<rect x=\"" << kL + kCell * static_cast<double>(c) << "\" y=\"" << kT + kCell * static_cast<double>(r)
          << "\" width=\"" << kCell << "\" height=\"" << kCell << "\" fill=\"rgb(" << level << ',' << level
          << ",255)\" stroke=\"#666\"/>\n";
      out << "<text x=\"" << kL + kCell * (static_cast<double>(c) + 0.5) << "\" y=\""
          << kT + kCell * (static_cast<double>(r) + 0.55)
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << confusion(r, c)
          << "</text>\n";
    }
  }
  out << "<text x=\"" << kL << "\" y=\"" << size_h - 12
      << "\" font-family=\"sans-serif\" font-size=\"12\">predicted (columns) vs true (rows)</text>\n";
  out << "</svg>\n";
}

}  // namespace biofuse
