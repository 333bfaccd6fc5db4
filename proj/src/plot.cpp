#include "eegpref/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "eegpref/error.hpp"
#include "text.hpp"

namespace eegpref {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 630.0;  // legend lives to the right
constexpr double kTop = 30.0;
constexpr double kBottom = 360.0;

constexpr std::array<const char*, 8> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                              "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

void check_series(const std::vector<PlotSeries>& series) {
  if (series.empty()) throw Error(ErrorCode::InvalidArgument, "no series to plot");
  for (const auto& s : series) {
    if (s.points.empty()) throw Error(ErrorCode::InvalidArgument, "series '" + s.name + "' is empty");
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) {
        throw Error(ErrorCode::NonFinitePoint, "series '" + s.name + "' has a non-finite point");
      }
    }
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string coord(double v) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.2f", v);
  return buf.data();
}

std::string tick(double v) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.4g", v);
  return buf.data();
}

}  // namespace

std::string format_number(double value) { return text::format_double(value); }

std::string render_csv(const std::vector<PlotSeries>& series) {
  check_series(series);
  std::ostringstream out;
  out << "series,x,y\n";
  for (const auto& s : series) {
    const auto name = csv_field(s.name);
    for (const auto& [x, y] : s.points) out << name << ',' << format_number(x) << ',' << format_number(y) << '\n';
  }
  return out.str();
}

std::string render_svg(const std::vector<PlotSeries>& series, const std::string& title) {
  check_series(series);
  double x_min = std::numeric_limits<double>::infinity();
  double x_max = -x_min;
  double y_min = x_min;
  double y_max = -x_min;
  for (const auto& s : series) {
    for (const auto& [x, y] : s.points) {
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  }
  const double x_span = x_max > x_min ? x_max - x_min : 1.0;
  const double y_span = y_max > y_min ? y_max - y_min : 1.0;
  auto px = [&](double x) { return kLeft + (x - x_min) / x_span * (kRight - kLeft); };
  auto py = [&](double y) { return kBottom - (y - y_min) / y_span * (kBottom - kTop); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << kWidth << ' ' << kHeight
      << "\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  if (!title.empty()) {
    out << "<text x=\"" << coord((kLeft + kRight) / 2) << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\">"
        << xml_escape(title) << "</text>\n";
  }
  out << "<g class=\"axes\" stroke=\"black\" stroke-width=\"1\">\n"
      << "<line x1=\"" << coord(kLeft) << "\" y1=\"" << coord(kBottom) << "\" x2=\"" << coord(kRight)
      << "\" y2=\"" << coord(kBottom) << "\"/>\n"
      << "<line x1=\"" << coord(kLeft) << "\" y1=\"" << coord(kTop) << "\" x2=\"" << coord(kLeft)
      << "\" y2=\"" << coord(kBottom) << "\"/>\n"
      << "</g>\n";
  out << "<g class=\"ticks\">\n"
      << "<text x=\"" << coord(kLeft) << "\" y=\"" << coord(kBottom + 16) << "\" text-anchor=\"start\">"
      << tick(x_min) << "</text>\n"
      << "<text x=\"" << coord(kRight) << "\" y=\"" << coord(kBottom + 16) << "\" text-anchor=\"end\">"
      << tick(x_max) << "</text>\n"
      << "<text x=\"" << coord(kLeft - 6) << "\" y=\"" << coord(kBottom) << "\" text-anchor=\"end\">"
      << tick(y_min) << "</text>\n"
      << "<text x=\"" << coord(kLeft - 6) << "\" y=\"" << coord(kTop + 10) << "\" text-anchor=\"end\">"
      << tick(y_max) << "</text>\n"
      << "</g>\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const char* color = kPalette[i % kPalette.size()];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.2\" points=\"";
    bool first = true;
    for (const auto& [x, y] : series[i].points) {
      out << (first ? "" : " ") << coord(px(x)) << ',' << coord(py(y));
      first = false;
    }
    out << "\"/>\n";
  }
  out << "<g class=\"legend\">\n";
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double y = kTop + 10.0 + 18.0 * static_cast<double>(i);
    out << "<line x1=\"645\" y1=\"" << coord(y) << "\" x2=\"665\" y2=\"" << coord(y) << "\" stroke=\""
        << kPalette[i % kPalette.size()] << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"670\" y=\"" << coord(y + 4) << "\">" << xml_escape(series[i].name) << "</text>\n";
  }
  out << "</g>\n</svg>\n";
  return out.str();
}

void emit_plot(const std::vector<PlotSeries>& series, PlotFormat format, const std::filesystem::path& path,
               const std::string& title) {
  const auto body = format == PlotFormat::Csv ? render_csv(series) : render_svg(series, title);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  out << body;
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

}  // namespace eegpref
