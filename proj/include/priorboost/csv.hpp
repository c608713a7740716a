#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "priorboost/core.hpp"

namespace priorboost::csv {

// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

// Parses a numeric CSV with a header row. Ragged rows and non-numeric cells
// are rejected with row/column diagnostics (ValidationError); unreadable files
// raise IoError.
Table read_table(const std::filesystem::path& path);
Table parse_table(const std::string& text, const std::string& source = "<memory>");

void write_table(const std::filesystem::path& path, const std::vector<std::string>& header,
                 const std::vector<std::vector<double>>& rows);

// Dataset layout: X1..Xn,Y1..Yn with one example per row.
Dataset read_dataset(const std::filesystem::path& path);
Dataset dataset_from_table(const Table& table, const std::string& source = "<memory>");
void write_dataset(const std::filesystem::path& path, const Dataset& dataset);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace priorboost::csv
