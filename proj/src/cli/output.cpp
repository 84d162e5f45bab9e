#include "iirl/cli/output.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "iirl/errors.hpp"

namespace iirl::cli {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  for (int precision = 6; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::string CsvDocument::render_body() const {
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out.str();
}

std::string CsvDocument::render() const {
  std::ostringstream out;
  for (const auto& c : comments) out << "# " << c << '\n';
  out << render_body();
  return out.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cli.output", "cannot open '" + path.string() + "' for writing");
  out << content;
  if (!out) throw IoError("cli.output", "write to '" + path.string() + "' failed");
}

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string px(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string render_svg_plot(const PlotSeries& s) {
  if (s.x.empty() || s.x.size() != s.y.size())
    throw ConfigError("cli.emit_plot", "series must be nonempty with matching x and y");
  constexpr double W = 640, H = 420, left = 70, right = 20, top = 40, bottom = 60;
  double x0 = *std::min_element(s.x.begin(), s.x.end());
  double x1 = *std::max_element(s.x.begin(), s.x.end());
  double y0 = 0.0, y1 = 0.0;
  bool any = false;
  for (double y : s.y) {
    if (!std::isfinite(y)) continue;
    y0 = any ? std::min(y0, y) : y;
    y1 = any ? std::max(y1, y) : y;
    any = true;
  }
  y0 = std::min(y0, 0.0);
  if (x1 == x0) x1 = x0 + 1.0;
  if (y1 == y0) y1 = y0 + 1.0;
  const double pw = W - left - right, ph = H - top - bottom;
  auto X = [&](double v) { return left + (v - x0) / (x1 - x0) * pw; };
  auto Y = [&](double v) { return top + ph - (v - y0) / (y1 - y0) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << px(W / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << escape(s.title)
    << "</text>\n";
  o << "<line x1=\"" << px(left) << "\" y1=\"" << px(top + ph) << "\" x2=\"" << px(left + pw) << "\" y2=\""
    << px(top + ph) << "\" stroke=\"black\"/>\n";
  o << "<line x1=\"" << px(left) << "\" y1=\"" << px(top) << "\" x2=\"" << px(left) << "\" y2=\"" << px(top + ph)
    << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = x0 + (x1 - x0) * i / 5.0, yv = y0 + (y1 - y0) * i / 5.0;
    o << "<line x1=\"" << px(X(xv)) << "\" y1=\"" << px(top + ph) << "\" x2=\"" << px(X(xv)) << "\" y2=\""
      << px(top + ph + 5) << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << px(X(xv)) << "\" y=\"" << px(top + ph + 18) << "\" text-anchor=\"middle\">"
      << format_number(std::round(xv * 1e4) / 1e4) << "</text>\n";
    o << "<line x1=\"" << px(left - 5) << "\" y1=\"" << px(Y(yv)) << "\" x2=\"" << px(left) << "\" y2=\""
      << px(Y(yv)) << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << px(left - 8) << "\" y=\"" << px(Y(yv) + 4) << "\" text-anchor=\"end\">"
      << format_number(std::round(yv * 1e4) / 1e4) << "</text>\n";
  }
  o << "<text x=\"" << px(left + pw / 2) << "\" y=\"" << px(H - 15) << "\" text-anchor=\"middle\">"
    << escape(s.x_label) << "</text>\n";
  o << "<text x=\"18\" y=\"" << px(top + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
    << px(top + ph / 2) << ")\">" << escape(s.y_label) << "</text>\n";

  // One polyline per run of finite points.
  std::vector<std::string> segment;
  auto flush = [&] {
    if (segment.size() >= 2) {
      o << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
      for (std::size_t i = 0; i < segment.size(); ++i) o << (i ? " " : "") << segment[i];
      o << "\"/>\n";
    }
    segment.clear();
  };
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    if (!std::isfinite(s.y[i])) {
      flush();
      continue;
    }
    segment.push_back(px(X(s.x[i])) + "," + px(Y(s.y[i])));
  }
  flush();
  for (std::size_t i = 0; i < s.x.size(); ++i)
    if (std::isfinite(s.y[i]))
      o << "<circle cx=\"" << px(X(s.x[i])) << "\" cy=\"" << px(Y(s.y[i])) << "\" r=\"3\" fill=\"steelblue\"/>\n";
  o << "</svg>\n";
  return o.str();
}

void emit_plot(const PlotSeries& s, const std::filesystem::path& path) {
  write_text_file(path, render_svg_plot(s));
}

}  // namespace iirl::cli
