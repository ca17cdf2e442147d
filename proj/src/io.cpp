#include "linf/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "linf/error.hpp"

namespace linf {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

std::string xml_escape(const std::string& s) {
  std::string o;
  for (char c : s) {
    switch (c) {
      case '<': o += "&lt;"; break;
      case '>': o += "&gt;"; break;
      case '&': o += "&amp;"; break;
      case '"': o += "&quot;"; break;
      default: o += c;
    }
  }
  return o;
}

std::string fmt(double x, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << x;
  return s.str();
}

}  // namespace

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) throw Error("write failed: " + path.string());
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != header_.size()) throw DomainError("CSV row width differs from the header");
  rows_.push_back(cells);
}

void CsvTable::add_row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_double(v));
  add_row(cells);
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += csv_cell(cells[i]);
    }
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

void CsvTable::write(const std::filesystem::path& path) const { write_text(path, str()); }

CsvTable profile_table(const LevelSetProfile& p) {
  CsvTable t({"s", "phi", "A"});
  for (std::size_t i = 0; i < p.s_grid.size(); ++i) {
    t.add_row(std::vector<double>{p.s_grid[i], p.phi_of_s[i],
                                  i < p.A_of_s.size() ? p.A_of_s[i] : std::nan("")});
  }
  return t;
}

std::string render_svg(const PlotSpec& spec) {
  constexpr double W = 640, H = 420, L = 80, Rm = 170, T = 40, B = 60;
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  auto tx = [&](double x) { return spec.log_x ? std::log10(x) : x; };
  auto ty = [&](double y) { return spec.log_y ? std::log10(y) : y; };
  auto usable = [&](double x, double y) {
    return std::isfinite(tx(x)) && std::isfinite(ty(y)) && (!spec.log_x || x > 0) &&
           (!spec.log_y || y > 0);
  };

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : spec.series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      x0 = std::min(x0, tx(s.x[i]));
      x1 = std::max(x1, tx(s.x[i]));
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  }
  for (const auto& l : spec.hlines) {
    if (!std::isfinite(ty(l.y))) continue;
    y0 = std::min(y0, ty(l.y));
    y1 = std::max(y1, ty(l.y));
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1;
  if (!std::isfinite(y0)) y0 = 0, y1 = 1;
  if (x1 - x0 <= 0) x0 -= 0.5, x1 += 0.5;
  if (y1 - y0 <= 0) y0 -= 0.5, y1 += 0.5;
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;
  auto px = [&](double x) { return L + (tx(x) - x0) / (x1 - x0) * (W - L - Rm); };
  auto py = [&](double y) { return H - B - (ty(y) - y0) / (y1 - y0) * (H - T - B); };
  auto pyt = [&](double t) { return H - B - (t - y0) / (y1 - y0) * (H - T - B); };
  auto pxt = [&](double t) { return L + (t - x0) / (x1 - x0) * (W - L - Rm); };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
    << xml_escape(spec.title) << "</text>\n";
  o << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - Rm << "\" height=\""
    << H - T - B << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double tv = x0 + (x1 - x0) * k / 4.0, uv = y0 + (y1 - y0) * k / 4.0;
    const double xv = spec.log_x ? std::pow(10.0, tv) : tv;
    const double yv = spec.log_y ? std::pow(10.0, uv) : uv;
    o << "<text x=\"" << pxt(tv) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">"
      << fmt(xv, 3) << "</text>\n";
    o << "<text x=\"" << L - 6 << "\" y=\"" << pyt(uv) + 4 << "\" text-anchor=\"end\">"
      << fmt(yv, 3) << "</text>\n";
  }
  o << "<text x=\"" << (L + W - Rm) / 2 << "\" y=\"" << H - 18 << "\" text-anchor=\"middle\">"
    << xml_escape(spec.xlabel) << "</text>\n";
  o << "<text x=\"18\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
    << (T + H - B) / 2 << ")\">" << xml_escape(spec.ylabel) << "</text>\n";

  int legend = 0;
  auto legend_entry = [&](const std::string& label, const char* color, bool dashed) {
    const double ly = T + 14 + 18 * legend++;
    o << "<line x1=\"" << W - Rm + 12 << "\" y1=\"" << ly << "\" x2=\"" << W - Rm + 36 << "\" y2=\""
      << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\""
      << (dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n";
    o << "<text x=\"" << W - Rm + 42 << "\" y=\"" << ly + 4 << "\">" << xml_escape(label)
      << "</text>\n";
  };
  std::size_t ci = 0;
  for (const auto& s : spec.series) {
    const char* c = colors[ci++ % 6];
    std::ostringstream pts;
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      pts << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
      if (s.markers) {
        o << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"3\" fill=\"" << c
          << "\"/>\n";
      }
    }
    o << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"2\" points=\"" << pts.str()
      << "\"/>\n";
    legend_entry(s.label, c, false);
  }
  for (const auto& l : spec.hlines) {
    const char* c = colors[ci++ % 6];
    if (!std::isfinite(ty(l.y))) continue;
    o << "<line x1=\"" << L << "\" y1=\"" << py(l.y) << "\" x2=\"" << W - Rm << "\" y2=\"" << py(l.y)
      << "\" stroke=\"" << c << "\" stroke-width=\"2\" stroke-dasharray=\"6 4\"/>\n";
    legend_entry(l.label, c, true);
  }
  o << "</svg>\n";
  return o.str();
}

void write_svg(const std::filesystem::path& path, const PlotSpec& spec) {
  write_text(path, render_svg(spec));
}

void write_snapshot_bin(const std::filesystem::path& path, const TorusGrid& grid,
                        const ScalarField& field) {
  if (field.size() != grid.nodes()) throw DomainError("field does not match the grid");
  auto out = open_out(path, true);
  const std::uint32_t hdr[2] = {static_cast<std::uint32_t>(grid.n()),
                                static_cast<std::uint32_t>(grid.N())};
  out.write(reinterpret_cast<const char*>(hdr), sizeof hdr);
  out.write(reinterpret_cast<const char*>(field.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(field.size())));
  if (!out) throw Error("write failed: " + path.string());
}

void write_snapshot_csv(const std::filesystem::path& path, const TorusGrid& grid,
                        const ScalarField& field) {
  if (field.size() != grid.nodes()) throw DomainError("field does not match the grid");
  auto out = open_out(path);
  out << "node";
  for (int a = 0; a < grid.axes(); ++a) out << (a % 2 ? ",y" : ",x") << a / 2 + 1;
  out << ",value\n";
  for (std::int64_t i = 0; i < grid.nodes(); ++i) {
    out << i;
    for (int a = 0; a < grid.axes(); ++a) out << ',' << format_double(grid.coord(i, a) * grid.h());
    out << ',' << format_double(field[i]) << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

Snapshot read_snapshot_bin(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  Snapshot s;
  std::uint32_t hdr[2];
  in.read(reinterpret_cast<char*>(hdr), sizeof hdr);
  if (!in) throw Error("truncated snapshot header");
  s.n = hdr[0];
  s.N = hdr[1];
  const TorusGrid grid(static_cast<int>(s.n), static_cast<int>(s.N));
  s.data.resize(grid.nodes());
  in.read(reinterpret_cast<char*>(s.data.data()),
          static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(grid.nodes())));
  if (!in) throw Error("truncated snapshot data");
  return s;
}

}  // namespace linf
