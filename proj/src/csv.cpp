#include "priorboost/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

#include "priorboost/errors.hpp"

namespace priorboost::csv {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(current);
      current.clear();
    } else if (c != '\r') {
      current.push_back(c);
    }
  }
  fields.push_back(current);
  return fields;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, result.ptr);
}

Table parse_table(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  Table table;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (!have_header) {
      for (auto& f : fields) table.header.push_back(trim(f));
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw ValidationError(source + ": row " + std::to_string(line_no) + " has " +
                            std::to_string(fields.size()) + " cells, header has " +
                            std::to_string(table.header.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const std::string cell = trim(fields[c]);
      double value = 0.0;
      const auto* begin = cell.data();
      const auto* end = cell.data() + cell.size();
      const auto [ptr, ec] = std::from_chars(begin, end, value);
      if (cell.empty() || ec != std::errc() || ptr != end) {
        throw ValidationError(source + ": row " + std::to_string(line_no) + ", column " +
                              std::to_string(c + 1) + " ('" + table.header[c] +
                              "'): non-numeric cell '" + cell + "'");
      }
      row.push_back(value);
    }
    table.rows.push_back(std::move(row));
  }
  if (!have_header) throw ValidationError(source + ": empty CSV");
  return table;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Table read_table(const std::filesystem::path& path) {
  return parse_table(read_text(path), path.string());
}

void write_table(const std::filesystem::path& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows) {
  std::string out;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c) out += ',';
    out += header[c];
  }
  out += '\n';
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += format_double(row[c]);
    }
    out += '\n';
  }
  write_text(path, out);
}

Dataset dataset_from_table(const Table& table, const std::string& source) {
  const std::size_t width = table.header.size();
  if (width < 2 || width % 2 != 0) {
    throw ValidationError(source + ": dataset needs an even number (>= 2) of columns X1..Xn,Y1..Yn");
  }
  if (table.rows.empty()) throw ValidationError(source + ": dataset has no rows");
  const std::size_t n = width / 2;
  const auto m = static_cast<Eigen::Index>(table.rows.size());
  Matrix x(m, static_cast<Eigen::Index>(n));
  Matrix y(m, static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < n; ++j) {
      x(i, static_cast<Eigen::Index>(j)) = row[j];
      y(i, static_cast<Eigen::Index>(j)) = row[n + j];
    }
  }
  std::vector<std::string> features(table.header.begin(), table.header.begin() + static_cast<std::ptrdiff_t>(n));
  std::vector<std::string> targets(table.header.begin() + static_cast<std::ptrdiff_t>(n), table.header.end());
  return Dataset(std::move(x), std::move(y), std::move(features), std::move(targets));
}

Dataset read_dataset(const std::filesystem::path& path) {
  return dataset_from_table(read_table(path), path.string());
}

void write_dataset(const std::filesystem::path& path, const Dataset& dataset) {
  std::vector<std::string> header = dataset.feature_names();
  header.insert(header.end(), dataset.target_names().begin(), dataset.target_names().end());
  std::vector<std::vector<double>> rows(dataset.rows());
  const auto n = static_cast<Eigen::Index>(dataset.n_targets());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (Eigen::Index j = 0; j < n; ++j) rows[i].push_back(dataset.examples()(r, j));
    for (Eigen::Index j = 0; j < n; ++j) rows[i].push_back(dataset.targets()(r, j));
  }
  write_table(path, header, rows);
}

}  // namespace priorboost::csv
