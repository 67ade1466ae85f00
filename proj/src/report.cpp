#include "snmap/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "snmap/errors.hpp"

namespace snmap {

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw InvalidConfig("cannot write " + path.string());
  for (std::size_t k = 0; k < table.header.size(); ++k) out << (k ? "," : "") << table.header[k];
  out << '\n';
  const bool labelled = !table.labels.empty();
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (labelled) out << table.labels[r];
    const auto& row = table.rows[r];
    for (std::size_t k = 0; k < row.size(); ++k) out << (k || labelled ? "," : "") << format_number(row[k]);
    out << '\n';
  }
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidConfig("cannot read " + path.string());
  CsvTable t;
  std::string line, cell;
  if (std::getline(in, line)) {
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) t.header.push_back(cell);
  }
  bool first = true, labelled = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::vector<double> row;
    bool lead = true;
    while (std::getline(ss, cell, ',')) {
      if (lead && first) {
        char* end = nullptr;
        std::strtod(cell.c_str(), &end);
        labelled = end == cell.c_str();
      }
      if (lead && labelled) {
        t.labels.push_back(cell);
      } else {
        row.push_back(std::stod(cell));
      }
      lead = false;
    }
    first = false;
    t.rows.push_back(std::move(row));
  }
  return t;
}

CsvTable scale_csv(const ScaleTable& table, double x_end) {
  const int n = table.states();
  CsvTable t;
  t.header.push_back("x");
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) t.header.push_back("w_" + std::to_string(i) + std::to_string(j));
  for (int j = 1; j <= n; ++j) t.header.push_back("wrow_" + std::to_string(j));
  for (int j = 1; j <= n; ++j) t.header.push_back("zrow_" + std::to_string(j));
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= n; ++j) t.header.push_back("z_" + std::to_string(i) + std::to_string(j));
  for (int j = 1; j <= n; ++j) t.header.push_back("u_" + std::to_string(j));
  const double q = table.q();
  for (std::size_t k = 0; k < table.size(); ++k) {
    const double x = table.grid()[k];
    if (x_end >= 0.0 && x > x_end + 1e-12) break;
    std::vector<double> row{x};
    const Matrix& w = table.w_at(k);
    const Matrix& z = table.z_at(k);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) row.push_back(w(i, j));
    for (int j = 0; j < n; ++j) row.push_back(table.w_row_at(k)(j));
    for (int j = 0; j < n; ++j) row.push_back(table.z_row_at(k)(j));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) row.push_back(z(i, j));
    for (int j = 0; j < n; ++j) row.push_back(table.z_row_at(k)(j) - q * table.w_row_at(k)(j));
    t.rows.push_back(std::move(row));
  }
  return t;
}

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

// roughly five round tick values covering [lo, hi]
std::vector<double> ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  std::vector<double> t;
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * span; v += step) t.push_back(std::abs(v) < 1e-12 * span ? 0.0 : v);
  return t;
}

}  // namespace

std::string svg_line_chart(const std::string& title, const std::string& x_label, const std::vector<Series>& series) {
  const double width = 640, height = 420, left = 70, right = 20, top = 40, bottom = 50;
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& s : series)
    for (std::size_t k = 0; k < s.x.size(); ++k) {
      x0 = std::min(x0, s.x[k]);
      x1 = std::max(x1, s.x[k]);
      y0 = std::min(y0, s.y[k]);
      y1 = std::max(y1, s.y[k]);
    }
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  const double pw = width - left - right, ph = height - top - bottom;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title) << "</text>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (double t : ticks(x0, x1))
    o << "<line x1=\"" << px(t) << "\" y1=\"" << top + ph << "\" x2=\"" << px(t) << "\" y2=\"" << top + ph + 5
      << "\" stroke=\"black\"/><text x=\"" << px(t) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
      << format_number(t) << "</text>\n";
  for (double t : ticks(y0, y1))
    o << "<line x1=\"" << left - 5 << "\" y1=\"" << py(t) << "\" x2=\"" << left << "\" y2=\"" << py(t)
      << "\" stroke=\"black\"/><text x=\"" << left - 8 << "\" y=\"" << py(t) + 4 << "\" text-anchor=\"end\">"
      << format_number(t) << "</text>\n";
  if (y0 < 0.0 && y1 > 0.0)
    o << "<line x1=\"" << left << "\" y1=\"" << py(0.0) << "\" x2=\"" << left + pw << "\" y2=\"" << py(0.0)
      << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\">" << escape(x_label)
    << "</text>\n";
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  for (std::size_t s = 0; s < series.size(); ++s) {
    o << "<polyline fill=\"none\" stroke-width=\"1.5\" stroke=\"" << colors[s % 4] << "\" points=\"";
    for (std::size_t k = 0; k < series[s].x.size(); ++k) o << px(series[s].x[k]) << ',' << py(series[s].y[k]) << ' ';
    o << "\"/>\n";
    o << "<text x=\"" << left + 10 << "\" y=\"" << top + 16 + 14 * static_cast<double>(s) << "\" fill=\"" << colors[s % 4]
      << "\">" << escape(series[s].name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InvalidConfig("cannot write " + path.string());
  out << text;
}

}  // namespace snmap
