#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace iirl::cli {

/// Shortest round-trip-safe text for a double; "nan"/"inf" spelled out.
std::string format_number(double v);

/// Comma-separated table with '#'-prefixed comment lines on top. Rows are
/// written in insertion order, so identical runs give identical bytes.
struct CsvDocument {
  std::vector<std::string> comments;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row) { rows.push_back(std::move(row)); }
  std::string render() const;
  /// The rows and header only, without comments.
  std::string render_body() const;
};

void write_text_file(const std::filesystem::path& path, const std::string& content);

struct PlotSeries {
  std::vector<double> x;
  /// NaN entries are gaps: the polyline breaks there.
  std::vector<double> y;
  std::string title;
  std::string x_label;
  std::string y_label;
};

/// Self-contained SVG line chart: axes, ticks, labels, one marker per point.
std::string render_svg_plot(const PlotSeries& s);
void emit_plot(const PlotSeries& s, const std::filesystem::path& path);

}  // namespace iirl::cli
