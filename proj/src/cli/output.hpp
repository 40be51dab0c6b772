#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace gaplab::cli {

/// Raised when an output file cannot be written; the message carries the path.
class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest round-trip decimal form; never depends on the C locale.
std::string format_double(double v);

/// Quotes a field when it contains a comma, quote or newline.
std::string csv_field(const std::string& text);

/**
 * Writes a CSV table: the header first, then one line per row, then a
 * trailing `# manifest=<hash>` line. Rows are buffered and flushed by
 * close(), so an empty table still yields the header line.
 */
class CsvWriter {
 public:
  CsvWriter(std::filesystem::path path, std::vector<std::string> header, std::string hash);

  void row(const std::vector<std::string>& fields);
  /// Writes the file and returns its path.
  std::filesystem::path close();

 private:
  std::filesystem::path path_;
  std::string hash_;
  std::size_t columns_;
  std::string body_;
};

struct Series {
  std::vector<double> x;
  std::vector<double> y;
};

/// Hand-written SVG bar chart of `values` binned into `bins` equal bins.
void write_histogram_svg(const std::filesystem::path& path, const std::vector<double>& values,
                         std::size_t bins, const std::string& title, const std::string& hash);

/// Bar chart with one bar per category (e.g. counts indexed by integer).
void write_bars_svg(const std::filesystem::path& path, const std::vector<double>& heights,
                    const std::string& title, const std::string& hash);

/// Polyline plot of one or more series on shared axes.
void write_polyline_svg(const std::filesystem::path& path, const std::vector<Series>& series,
                        const std::string& title, const std::string& hash);

struct StatusCounts {
  std::size_t ok = 0;
  std::size_t failed = 0;
  std::size_t indeterminate = 0;
};

struct Manifest {
  std::string version;
  std::string subcommand;
  std::string hash;
  std::uint64_t master_seed = 0;
  std::string started_utc;
  std::string finished_utc;
  StatusCounts status;
  std::vector<std::string> files;
  nlohmann::ordered_json config;
};

std::string utc_now();
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

}  // namespace gaplab::cli
