#include "biofuse/feature_io.hpp"

#include <charconv>
#include <fstream>
#include <string_view>

#include "biofuse/errors.hpp"

namespace biofuse {

void write_feature_csv(const std::filesystem::path& path, const FeatureMatrix& m) {
  m.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "trial_id,window_start,label";
  for (const auto& n : m.feature_names) out << ',' << n;
  out << '\n';
  char buf[64];
  for (Eigen::Index r = 0; r < m.row_count(); ++r) {
    const auto ur = static_cast<std::size_t>(r);
    out << m.trial_ids[ur] << ',' << m.window_starts[ur] << ',' << m.labels[ur];
    for (Eigen::Index c = 0; c < m.feature_count(); ++c) {
      const auto res = std::to_chars(buf, buf + sizeof(buf), m.rows(r, c));
      out << ',';
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
}

namespace {

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

template <typename T>
T parse(std::string_view cell, const std::string& where) {
  T v{};
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw DataError(where + ": cannot parse '" + std::string(cell) + "'");
  }
  return v;
}

}  // namespace

FeatureMatrix read_feature_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open feature file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty feature file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  if (header.size() < 4 || header[0] != "trial_id" || header[1] != "window_start" || header[2] != "label") {
    throw DataError(path.string() + ": header must start with trial_id,window_start,label and name features");
  }
  FeatureMatrix m;
  for (std::size_t i = 3; i < header.size(); ++i) m.feature_names.emplace_back(header[i]);
  const std::size_t f = m.feature_names.size();
  std::vector<double> values;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (cells.size() != f + 3) {
      throw DataError(where + ": expected " + std::to_string(f + 3) + " columns, found " +
                      std::to_string(cells.size()));
    }
    m.trial_ids.push_back(parse<int>(cells[0], where));
    m.window_starts.push_back(parse<Eigen::Index>(cells[1], where));
    m.labels.push_back(parse<int>(cells[2], where));
    for (std::size_t i = 0; i < f; ++i) values.push_back(parse<double>(cells[i + 3], where));
  }
  const auto rows = static_cast<Eigen::Index>(m.labels.size());
  m.rows = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      values.data(), rows, static_cast<Eigen::Index>(f));
  m.validate();
  return m;
}

}  // namespace biofuse
