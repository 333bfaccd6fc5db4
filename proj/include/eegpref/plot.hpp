#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace eegpref {

struct PlotSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

enum class PlotFormat { Csv, Svg };

// Shortest representation that parses back to the same double.
std::string format_number(double value);

// `series,x,y` header then one row per point.
std::string render_csv(const std::vector<PlotSeries>& series);

// 800x400 viewBox, one polyline per series, min/max tick labels on both axes,
// and a legend.
std::string render_svg(const std::vector<PlotSeries>& series, const std::string& title = {});

// Validates first (non-empty, all points finite) so nothing is written on error.
void emit_plot(const std::vector<PlotSeries>& series, PlotFormat format,
               const std::filesystem::path& path, const std::string& title = {});

}  // namespace eegpref
