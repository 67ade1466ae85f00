#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "snmap/spectral.hpp"

namespace snmap {

/// 12 significant digits, the precision of every emitted number.
std::string format_number(double v);

/// Numeric table, optionally led by one text column (`labels`, one per row).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> labels;
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

/// Columns x, w_ij (row-major), wrow_j, zrow_j, z_ij, u_j on the table grid
/// up to x_end (the whole grid by default); indices 1-based.
CsvTable scale_csv(const ScaleTable& table, double x_end = -1.0);

struct Series {
  std::string name;
  std::vector<double> x, y;
};

/// Minimal standalone SVG line chart with axes, ticks and a zero line.
std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::vector<Series>& series);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace snmap
