#include "cli/output.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <limits>

namespace gaplab::cli {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

CsvWriter::CsvWriter(std::filesystem::path path, std::vector<std::string> header, std::string hash)
    : path_(std::move(path)), hash_(std::move(hash)), columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) body_ += ',';
    body_ += header[i];
  }
  body_ += '\n';
}

void CsvWriter::row(const std::vector<std::string>& fields) {
  if (fields.size() != columns_) {
    throw std::logic_error("CsvWriter: row width " + std::to_string(fields.size()) + " != " +
                           std::to_string(columns_) + " for " + path_.string());
  }
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) body_ += ',';
    body_ += csv_field(fields[i]);
  }
  body_ += '\n';
}

std::filesystem::path CsvWriter::close() {
  std::ofstream out(path_, std::ios::binary | std::ios::trunc);
  if (!out) throw OutputError("cannot write " + path_.string());
  out << body_ << "# manifest=" << hash_ << '\n';
  if (!out) throw OutputError("write failed for " + path_.string());
  return path_;
}

// ---------------------------------------------------------------------------
// SVG

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kMargin = 50.0;

std::string fixed2(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
  return std::string(buf, res.ptr);
}

std::string escape_xml(const std::string& s) {
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

std::string svg_open(const std::string& title, const std::string& hash) {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed2(kWidth) +
                  "\" height=\"" + fixed2(kHeight) + "\">\n";
  s += "<!-- manifest=" + hash + " -->\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + fixed2(kWidth) + "\" height=\"" + fixed2(kHeight) +
       "\" fill=\"white\"/>\n";
  s += "<text x=\"" + fixed2(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" +
       escape_xml(title) + "</text>\n";
  // axes
  s += "<line x1=\"" + fixed2(kMargin) + "\" y1=\"" + fixed2(kHeight - kMargin) + "\" x2=\"" +
       fixed2(kWidth - kMargin) + "\" y2=\"" + fixed2(kHeight - kMargin) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + fixed2(kMargin) + "\" y1=\"" + fixed2(kMargin) + "\" x2=\"" + fixed2(kMargin) +
       "\" y2=\"" + fixed2(kHeight - kMargin) + "\" stroke=\"black\"/>\n";
  return s;
}

std::string axis_labels(double xmin, double xmax, double ymin, double ymax) {
  std::string s;
  const double base = kHeight - kMargin;
  s += "<text x=\"" + fixed2(kMargin) + "\" y=\"" + fixed2(base + 16) + "\" font-size=\"10\">" +
       escape_xml(format_double(xmin)) + "</text>\n";
  s += "<text x=\"" + fixed2(kWidth - kMargin) + "\" y=\"" + fixed2(base + 16) +
       "\" text-anchor=\"end\" font-size=\"10\">" + escape_xml(format_double(xmax)) + "</text>\n";
  s += "<text x=\"" + fixed2(kMargin - 4) + "\" y=\"" + fixed2(base) +
       "\" text-anchor=\"end\" font-size=\"10\">" + escape_xml(format_double(ymin)) + "</text>\n";
  s += "<text x=\"" + fixed2(kMargin - 4) + "\" y=\"" + fixed2(kMargin + 10) +
       "\" text-anchor=\"end\" font-size=\"10\">" + escape_xml(format_double(ymax)) + "</text>\n";
  return s;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw OutputError("cannot write " + path.string());
  out << text;
  if (!out) throw OutputError("write failed for " + path.string());
}

std::string bars(const std::vector<double>& heights) {
  std::string s;
  const double top = heights.empty() ? 1.0 : std::max(1e-300, *std::max_element(heights.begin(), heights.end()));
  const double plot_w = kWidth - 2 * kMargin;
  const double plot_h = kHeight - 2 * kMargin;
  const double bar_w = heights.empty() ? 0.0 : plot_w / static_cast<double>(heights.size());
  for (std::size_t i = 0; i < heights.size(); ++i) {
    const double h = heights[i] / top * plot_h;
    s += "<rect x=\"" + fixed2(kMargin + bar_w * static_cast<double>(i)) + "\" y=\"" +
         fixed2(kHeight - kMargin - h) + "\" width=\"" + fixed2(std::max(0.0, bar_w - 1.0)) +
         "\" height=\"" + fixed2(h) + "\" fill=\"steelblue\"/>\n";
  }
  return s;
}

}  // namespace

void write_histogram_svg(const std::filesystem::path& path, const std::vector<double>& values,
                         std::size_t bins, const std::string& title, const std::string& hash) {
  bins = std::max<std::size_t>(1, bins);
  std::vector<double> counts(bins, 0.0);
  double lo = 0.0;
  double hi = 1.0;
  if (!values.empty()) {
    lo = *std::min_element(values.begin(), values.end());
    hi = *std::max_element(values.begin(), values.end());
    if (hi <= lo) hi = lo + 1.0;
    for (double v : values) {
      auto b = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
      counts[std::min(b, bins - 1)] += 1.0;
    }
  }
  const double top = *std::max_element(counts.begin(), counts.end());
  write_text(path, svg_open(title, hash) + bars(counts) + axis_labels(lo, hi, 0.0, top) + "</svg>\n");
}

void write_bars_svg(const std::filesystem::path& path, const std::vector<double>& heights,
                    const std::string& title, const std::string& hash) {
  const double top = heights.empty() ? 0.0 : *std::max_element(heights.begin(), heights.end());
  write_text(path, svg_open(title, hash) + bars(heights) +
                       axis_labels(0.0, static_cast<double>(heights.size()), 0.0, top) + "</svg>\n");
}

void write_polyline_svg(const std::filesystem::path& path, const std::vector<Series>& series,
                        const std::string& title, const std::string& hash) {
  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -xmin;
  double ymin = xmin;
  double ymax = -xmin;
  for (const Series& s : series) {
    for (double x : s.x) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
    }
    for (double y : s.y) {
      if (!std::isfinite(y)) continue;
      ymin = std::min(ymin, y);
      ymax = std::max(ymax, y);
    }
  }
  if (!(xmin < xmax)) {
    xmin = std::isfinite(xmin) ? xmin - 0.5 : 0.0;
    xmax = xmin + 1.0;
  }
  if (!(ymin < ymax)) {
    ymin = std::isfinite(ymin) ? ymin - 0.5 : 0.0;
    ymax = ymin + 1.0;
  }
  static const char* colors[] = {"steelblue", "darkorange", "seagreen", "crimson"};
  std::string body = svg_open(title, hash);
  const double plot_w = kWidth - 2 * kMargin;
  const double plot_h = kHeight - 2 * kMargin;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const Series& s = series[k];
    body += "<polyline fill=\"none\" stroke=\"" + std::string(colors[k % 4]) + "\" points=\"";
    const std::size_t count = std::min(s.x.size(), s.y.size());
    for (std::size_t i = 0; i < count; ++i) {
      if (!std::isfinite(s.y[i])) continue;
      const double px = kMargin + (s.x[i] - xmin) / (xmax - xmin) * plot_w;
      const double py = kHeight - kMargin - (s.y[i] - ymin) / (ymax - ymin) * plot_h;
      body += fixed2(px) + "," + fixed2(py) + " ";
    }
    body += "\"/>\n";
  }
  write_text(path, body + axis_labels(xmin, xmax, ymin, ymax) + "</svg>\n");
}

// ---------------------------------------------------------------------------

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const std::filesystem::path& path, const Manifest& m) {
  nlohmann::ordered_json j;
  j["version"] = m.version;
  j["subcommand"] = m.subcommand;
  j["hash"] = m.hash;
  j["master_seed"] = m.master_seed;
  j["started_utc"] = m.started_utc;
  j["finished_utc"] = m.finished_utc;
  j["status"] = {{"ok", m.status.ok}, {"failed", m.status.failed}, {"indeterminate", m.status.indeterminate}};
  j["files"] = m.files;
  j["config"] = m.config;
  write_text(path, j.dump(2) + "\n");
}

}  // namespace gaplab::cli
