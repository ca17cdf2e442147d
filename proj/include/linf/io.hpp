#pragma once

// Output files: JSON documents, CSV tables, SVG line plots and field
// snapshots (binary: uint32 n, uint32 N, then row-major doubles; or CSV).

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "linf/torus.hpp"

namespace linf {

/// Shortest round-trip decimal form; identical input gives identical text.
std::string format_double(double x);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  void add_row(const std::vector<std::string>& cells);
  void add_row(const std::vector<double>& values);
  std::size_t rows() const noexcept { return rows_.size(); }
  std::string str() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

CsvTable profile_table(const LevelSetProfile& p);

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
  bool markers = true;
};

struct PlotLine {
  std::string label;
  double y = 0.0;
};

struct PlotSpec {
  std::string title, xlabel, ylabel;
  bool log_x = false;
  bool log_y = false;
  std::vector<PlotSeries> series;
  std::vector<PlotLine> hlines;
};

std::string render_svg(const PlotSpec& spec);
void write_svg(const std::filesystem::path& path, const PlotSpec& spec);

void write_snapshot_bin(const std::filesystem::path& path, const TorusGrid& grid,
                        const ScalarField& field);
void write_snapshot_csv(const std::filesystem::path& path, const TorusGrid& grid,
                        const ScalarField& field);

struct Snapshot {
  std::uint32_t n = 0, N = 0;
  ScalarField data;
};

Snapshot read_snapshot_bin(const std::filesystem::path& path);

}  // namespace linf
