#pragma once

// Result serialization: CSV with metadata headers, JSON documents, minimal SVG
// plots, and atomic file writes.

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace jjepr {

inline constexpr const char* kVersion = "jjepr 1.0.0";

/// %.17g, with "nan", "inf" and "-inf" spelled out.
std::string format_double(double x);

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> cells);
};

/// Cells for add_row.
std::string cell(double x);
std::string cell(long x);
std::string cell(const std::string& s);  // quoted when it holds a comma, quote or newline

/// `#`-prefixed version, command and compact config lines, then the table.
std::string render_csv(const CsvTable& table, const std::string& command, const nlohmann::json& config);

/// Matrix with the row axis as the first column and the column axis as the header row.
std::string render_matrix_csv(const Eigen::VectorXd& row_axis, const Eigen::VectorXd& col_axis,
                              const Eigen::MatrixXd& values, const std::string& row_name, const std::string& col_name,
                              const std::string& command, const nlohmann::json& config);

/// {"version", "command", "config", "result"}, indented by two spaces.
std::string render_json(const std::string& command, const nlohmann::json& config, const nlohmann::json& result);

/// NaN and infinities become null.
nlohmann::json json_number(double x);

/// Writes to a sibling temporary file and renames it over `path`; creates
/// missing parent directories. Throws IoError.
void write_atomic(const std::filesystem::path& path, const std::string& content);

struct SvgSeries {
  std::string label;
  std::vector<double> x, y;
};

std::string svg_lines(const std::vector<SvgSeries>& series, const std::string& title, const std::string& x_label,
                      const std::string& y_label, const std::string& metadata);

/// Diverging colour map symmetric about zero; rows map to x, columns to y.
std::string svg_heatmap(const Eigen::VectorXd& x_axis, const Eigen::VectorXd& y_axis, const Eigen::MatrixXd& values,
                        const std::string& title, const std::string& x_label, const std::string& y_label,
                        const std::string& metadata);

}  // namespace jjepr
