#include "jjepr/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

#include <unistd.h>

#include "jjepr/error.hpp"

namespace jjepr {

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// "--" may not appear inside an XML comment
std::string comment_safe(std::string s) {
  for (std::size_t pos = s.find("--"); pos != std::string::npos; pos = s.find("--", pos)) s.replace(pos, 2, "- -");
  return s;
}

std::string fixed(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string tick(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

constexpr double kWidth = 640, kHeight = 420, kLeft = 70, kRight = 20, kTop = 40, kBottom = 55;

struct Frame {
  double x0, x1, y0, y1;
  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

void open_svg(std::ostringstream& o, const std::string& title, const std::string& metadata) {
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<!-- " << comment_safe(metadata) << " -->\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(title)
    << "</text>\n";
}

void axes(std::ostringstream& o, const Frame& f, const std::string& x_label, const std::string& y_label) {
  o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kWidth - kLeft - kRight << "\" height=\""
    << kHeight - kTop - kBottom << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double x = f.x0 + (f.x1 - f.x0) * i / 4.0, y = f.y0 + (f.y1 - f.y0) * i / 4.0;
    o << "<text x=\"" << fixed(f.px(x)) << "\" y=\"" << kHeight - kBottom + 16 << "\" text-anchor=\"middle\">"
      << tick(x) << "</text>\n";
    o << "<text x=\"" << kLeft - 6 << "\" y=\"" << fixed(f.py(y) + 4) << "\" text-anchor=\"end\">" << tick(y)
      << "</text>\n";
  }
  o << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">"
    << xml_escape(x_label) << "</text>\n";
  o << "<text x=\"16\" y=\"" << (kTop + kHeight - kBottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << (kTop + kHeight - kBottom) / 2 << ")\">" << xml_escape(y_label) << "</text>\n";
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) x = 0.0;  // no "-0"
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void CsvTable::add_row(std::vector<std::string> cells) {
  require(cells.size() == columns.size(), "csv: row width does not match the header");
  rows.push_back(std::move(cells));
}

std::string cell(double x) { return format_double(x); }
std::string cell(long x) { return std::to_string(x); }
std::string cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

static std::string csv_preamble(const std::string& command, const nlohmann::json& config) {
  return "# version: " + std::string(kVersion) + "\n# command: " + command + "\n# config: " + config.dump() + "\n";
}

std::string render_csv(const CsvTable& table, const std::string& command, const nlohmann::json& config) {
  std::string out = csv_preamble(command, config);
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  std::vector<std::string> header;
  for (const auto& c : table.columns) header.push_back(cell(c));
  line(header);
  for (const auto& r : table.rows) line(r);
  return out;
}

std::string render_matrix_csv(const Eigen::VectorXd& row_axis, const Eigen::VectorXd& col_axis,
                              const Eigen::MatrixXd& values, const std::string& row_name, const std::string& col_name,
                              const std::string& command, const nlohmann::json& config) {
  require(values.rows() == row_axis.size() && values.cols() == col_axis.size(), "csv: matrix and axes disagree");
  std::string out = csv_preamble(command, config);
  out += "# rows: " + row_name + ", columns: " + col_name + "\n";
  out += row_name + "\\" + col_name;
  for (Eigen::Index j = 0; j < col_axis.size(); ++j) out += "," + format_double(col_axis[j]);
  out += '\n';
  for (Eigen::Index i = 0; i < row_axis.size(); ++i) {
    out += format_double(row_axis[i]);
    for (Eigen::Index j = 0; j < col_axis.size(); ++j) out += "," + format_double(values(i, j));
    out += '\n';
  }
  return out;
}

std::string render_json(const std::string& command, const nlohmann::json& config, const nlohmann::json& result) {
  nlohmann::json doc;
  doc["version"] = kVersion;
  doc["command"] = command;
  doc["config"] = config;
  doc["result"] = result;
  return doc.dump(2) + "\n";
}

nlohmann::json json_number(double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); }

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      throw IoError("write to " + tmp.string() + " failed");
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

std::string svg_lines(const std::vector<SvgSeries>& series, const std::string& title, const std::string& x_label,
                      const std::string& y_label, const std::string& metadata) {
  static const char* colours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"};
  Frame f{1e300, -1e300, 1e300, -1e300};
  for (const auto& s : series) {
    require(s.x.size() == s.y.size(), "svg: series x and y lengths differ");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      f.x0 = std::min(f.x0, s.x[i]);
      f.x1 = std::max(f.x1, s.x[i]);
      f.y0 = std::min(f.y0, s.y[i]);
      f.y1 = std::max(f.y1, s.y[i]);
    }
  }
  if (f.x0 > f.x1) f = {0, 1, 0, 1};
  if (f.x1 == f.x0) f.x1 = f.x0 + 1;
  if (f.y1 == f.y0) f.y1 = f.y0 + 1;
  const double pad = 0.05 * (f.y1 - f.y0);
  f.y0 -= pad;
  f.y1 += pad;

  std::ostringstream o;
  open_svg(o, title, metadata);
  axes(o, f, x_label, y_label);
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* colour = colours[k % 6];
    o << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) o << fixed(f.px(s.x[i])) << ',' << fixed(f.py(s.y[i])) << ' ';
    o << "\"/>\n";
    const double ly = kTop + 14 + 16 * static_cast<double>(k);
    o << "<line x1=\"" << kWidth - kRight - 150 << "\" y1=\"" << ly - 4 << "\" x2=\"" << kWidth - kRight - 130
      << "\" y2=\"" << ly - 4 << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << kWidth - kRight - 125 << "\" y=\"" << ly << "\">" << xml_escape(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string svg_heatmap(const Eigen::VectorXd& x_axis, const Eigen::VectorXd& y_axis, const Eigen::MatrixXd& values,
                        const std::string& title, const std::string& x_label, const std::string& y_label,
                        const std::string& metadata) {
  require(values.rows() == x_axis.size() && values.cols() == y_axis.size(), "svg: heatmap and axes disagree");
  require(x_axis.size() >= 2 && y_axis.size() >= 2, "svg: heatmap needs two points per axis");
  const Frame f{x_axis[0], x_axis[x_axis.size() - 1], y_axis[0], y_axis[y_axis.size() - 1]};
  const double scale = std::max(values.cwiseAbs().maxCoeff(), 1e-300);
  // at most ~160 cells per axis
  const Eigen::Index sx = std::max<Eigen::Index>(1, x_axis.size() / 160);
  const Eigen::Index sy = std::max<Eigen::Index>(1, y_axis.size() / 160);
  const double cw = (f.px(x_axis[x_axis.size() - 1]) - f.px(x_axis[0])) / static_cast<double>(x_axis.size() - 1) *
                    static_cast<double>(sx);
  const double ch = (f.py(y_axis[0]) - f.py(y_axis[y_axis.size() - 1])) / static_cast<double>(y_axis.size() - 1) *
                    static_cast<double>(sy);

  std::ostringstream o;
  open_svg(o, title, metadata);
  for (Eigen::Index i = 0; i < x_axis.size(); i += sx)
    for (Eigen::Index j = 0; j < y_axis.size(); j += sy) {
      const double v = std::clamp(values(i, j) / scale, -1.0, 1.0);
      const int fade = static_cast<int>(std::lround(255.0 * (1.0 - std::abs(v))));
      const int r = v >= 0 ? 255 : fade, b = v >= 0 ? fade : 255;
      o << "<rect x=\"" << fixed(f.px(x_axis[i]) - cw / 2) << "\" y=\"" << fixed(f.py(y_axis[j]) - ch / 2)
        << "\" width=\"" << fixed(cw + 0.5) << "\" height=\"" << fixed(ch + 0.5) << "\" fill=\"rgb(" << r << ','
        << fade << ',' << b << ")\"/>\n";
    }
  axes(o, f, x_label, y_label);
  o << "<text x=\"" << kWidth - kRight << "\" y=\"" << kTop - 6 << "\" text-anchor=\"end\">red &gt; 0, blue &lt; 0, |max| "
    << tick(scale) << "</text>\n";
  o << "</svg>\n";
  return o.str();
}

}  // namespace jjepr
