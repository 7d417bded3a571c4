#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "dfw/csv.hpp"
#include "dfw/error.hpp"

namespace dfw::plots {

namespace detail {

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860"};
  return colors[i % 6];
}

inline std::string num(double v) {
  std::ostringstream o;
  o.setf(std::ios::fixed);
  o.precision(2);
  o << v;
  return o.str();
}

inline std::vector<std::vector<std::string>> read_rows(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + p.string() + "'");
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    if (!csv::trim(line).empty()) rows.push_back(csv::split(line));
  }
  return rows;
}

inline double to_double(const std::string& s) {
  double v = 0.0;
  if (!csv::parse_double(s, v)) throw Error(ErrorCode::kSchema, "bad number '" + s + "'");
  return v;
}

struct Canvas {
  double width = 640, height = 400, left = 70, right = 150, top = 30, bottom = 50;
  std::ostringstream body;

  double plot_w() const { return width - left - right; }
  double plot_h() const { return height - top - bottom; }

  std::string finish(const std::string& title) const {
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << width / 2 << "\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">" << title
      << "</text>\n"
      << body.str() << "</svg>\n";
    return o.str();
  }
};

}  // namespace detail

/// Love plot: mean |SMD| per feature and scheme from smd.csv, with a
/// dashed line at 10.
inline std::string smd_svg(const std::filesystem::path& smd_csv) {
  const auto rows = detail::read_rows(smd_csv);
  std::vector<std::string> features, schemes;
  std::map<std::pair<std::string, std::string>, double> value;
  for (const auto& r : rows) {
    if (r.size() != 3) throw Error(ErrorCode::kSchema, "smd.csv: expected 3 fields");
    if (std::find(features.begin(), features.end(), r[0]) == features.end()) features.push_back(r[0]);
    if (std::find(schemes.begin(), schemes.end(), r[1]) == schemes.end()) schemes.push_back(r[1]);
    value[{r[0], r[1]}] = detail::to_double(r[2]);
  }
  double xmax = 10.0;
  for (const auto& [k, v] : value) xmax = std::max(xmax, v);
  xmax *= 1.05;

  detail::Canvas c;
  c.height = std::max(200.0, 40.0 + 28.0 * static_cast<double>(features.size()) + c.bottom);
  const double row_h = c.plot_h() / static_cast<double>(std::max<std::size_t>(features.size(), 1));
  const auto sx = [&](double v) { return c.left + c.plot_w() * v / xmax; };
  c.body << "<line x1=\"" << c.left << "\" y1=\"" << c.top + c.plot_h() << "\" x2=\"" << c.left + c.plot_w()
         << "\" y2=\"" << c.top + c.plot_h() << "\" stroke=\"black\"/>\n";
  c.body << "<line x1=\"" << sx(10) << "\" y1=\"" << c.top << "\" x2=\"" << sx(10) << "\" y2=\""
         << c.top + c.plot_h() << "\" stroke=\"grey\" stroke-dasharray=\"4 3\"/>\n";
  for (std::size_t f = 0; f < features.size(); ++f) {
    const double y = c.top + row_h * (static_cast<double>(f) + 0.5);
    c.body << "<text x=\"" << c.left - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">" << features[f]
           << "</text>\n";
    c.body << "<line x1=\"" << c.left << "\" y1=\"" << y << "\" x2=\"" << c.left + c.plot_w() << "\" y2=\"" << y
           << "\" stroke=\"#eeeeee\"/>\n";
    for (std::size_t s = 0; s < schemes.size(); ++s) {
      const auto it = value.find({features[f], schemes[s]});
      if (it == value.end()) continue;
      c.body << "<circle cx=\"" << detail::num(sx(it->second)) << "\" cy=\"" << detail::num(y) << "\" r=\"4\" fill=\""
             << detail::palette(s) << "\"/>\n";
    }
  }
  for (int i = 0; i <= 4; ++i) {
    const double v = xmax * i / 4.0;
    c.body << "<text x=\"" << detail::num(sx(v)) << "\" y=\"" << c.top + c.plot_h() + 16
           << "\" text-anchor=\"middle\">" << detail::num(v) << "</text>\n";
  }
  c.body << "<text x=\"" << c.left + c.plot_w() / 2 << "\" y=\"" << c.height - 10
         << "\" text-anchor=\"middle\">|SMD|</text>\n";
  for (std::size_t s = 0; s < schemes.size(); ++s) {
    const double y = c.top + 14.0 * static_cast<double>(s);
    c.body << "<circle cx=\"" << c.width - c.right + 20 << "\" cy=\"" << y << "\" r=\"4\" fill=\""
           << detail::palette(s) << "\"/><text x=\"" << c.width - c.right + 30 << "\" y=\"" << y + 4 << "\">"
           << schemes[s] << "</text>\n";
  }
  return c.finish("Covariate balance");
}

/// Step plots of the treated/control ECDFs of one feature, one panel per scheme.
inline std::map<std::string, std::string> ecdf_svgs(const std::filesystem::path& ecdf_csv) {
  const auto rows = detail::read_rows(ecdf_csv);
  // feature -> scheme -> group -> points
  std::map<std::string, std::vector<std::string>> scheme_order;
  std::map<std::string, std::map<std::string, std::map<std::string, std::vector<std::pair<double, double>>>>> data;
  std::vector<std::string> features;
  for (const auto& r : rows) {
    if (r.size() != 5) throw Error(ErrorCode::kSchema, "ecdf.csv: expected 5 fields");
    if (std::find(features.begin(), features.end(), r[0]) == features.end()) features.push_back(r[0]);
    auto& order = scheme_order[r[0]];
    if (std::find(order.begin(), order.end(), r[2]) == order.end()) order.push_back(r[2]);
    data[r[0]][r[2]][r[1]].emplace_back(detail::to_double(r[3]), detail::to_double(r[4]));
  }
  std::map<std::string, std::string> out;
  for (const auto& feature : features) {
    const auto& schemes = scheme_order[feature];
    double lo = 0.0, hi = 0.0;
    bool first = true;
    for (const auto& [s, groups] : data[feature]) {
      for (const auto& [g, pts] : groups) {
        for (const auto& p : pts) {
          lo = first ? p.first : std::min(lo, p.first);
          hi = first ? p.first : std::max(hi, p.first);
          first = false;
        }
      }
    }
    if (hi <= lo) hi = lo + 1.0;
    const double panel_w = 220, panel_h = 180, gap = 20;
    detail::Canvas c;
    c.left = 40;
    c.right = 20;
    c.width = c.left + c.right + static_cast<double>(schemes.size()) * (panel_w + gap);
    c.height = c.top + panel_h + c.bottom + 20;
    for (std::size_t s = 0; s < schemes.size(); ++s) {
      const double x0 = c.left + static_cast<double>(s) * (panel_w + gap);
      const double y0 = c.top + 20;
      const auto sx = [&](double v) { return x0 + panel_w * (v - lo) / (hi - lo); };
      const auto sy = [&](double v) { return y0 + panel_h * (1.0 - v); };
      c.body << "<rect x=\"" << x0 << "\" y=\"" << y0 << "\" width=\"" << panel_w << "\" height=\"" << panel_h
             << "\" fill=\"none\" stroke=\"black\"/>\n";
      c.body << "<text x=\"" << x0 + panel_w / 2 << "\" y=\"" << y0 - 6 << "\" text-anchor=\"middle\">"
             << schemes[s] << "</text>\n";
      std::size_t gi = 0;
      for (const char* group : {"treated", "control"}) {
        const auto& pts = data[feature][schemes[s]][group];
        std::ostringstream path;
        double prev = 0.0;
        path << "M" << detail::num(sx(lo)) << "," << detail::num(sy(0));
        for (const auto& p : pts) {
          path << " L" << detail::num(sx(p.first)) << "," << detail::num(sy(prev)) << " L"
               << detail::num(sx(p.first)) << "," << detail::num(sy(p.second));
          prev = p.second;
        }
        path << " L" << detail::num(sx(hi)) << "," << detail::num(sy(prev));
        c.body << "<path d=\"" << path.str() << "\" fill=\"none\" stroke=\"" << detail::palette(gi++) << "\"/>\n";
      }
    }
    c.body << "<text x=\"" << c.left << "\" y=\"" << c.height - 10 << "\"><tspan fill=\"" << detail::palette(0)
           << "\">treated</tspan> <tspan fill=\"" << detail::palette(1) << "\">control</tspan></text>\n";
    out[feature] = c.finish("ECDF of " + feature);
  }
  return out;
}

/// Histogram of CV(DFW) - CV(IPW) with a line at zero.
inline std::string cv_difference_svg(const std::vector<double>& differences, int bins = 60) {
  if (differences.empty()) throw Error(ErrorCode::kInsufficientData, "no CV differences to plot");
  const auto [mn_it, mx_it] = std::minmax_element(differences.begin(), differences.end());
  double lo = std::min(*mn_it, 0.0), hi = std::max(*mx_it, 0.0);
  if (hi <= lo) hi = lo + 1.0;
  std::vector<long long> counts(static_cast<std::size_t>(bins), 0);
  for (double d : differences) {
    auto b = static_cast<int>((d - lo) / (hi - lo) * bins);
    b = std::clamp(b, 0, bins - 1);
    ++counts[static_cast<std::size_t>(b)];
  }
  const long long peak = *std::max_element(counts.begin(), counts.end());
  detail::Canvas c;
  c.right = 30;
  const double bw = c.plot_w() / bins;
  for (int b = 0; b < bins; ++b) {
    const double h = c.plot_h() * static_cast<double>(counts[static_cast<std::size_t>(b)]) / static_cast<double>(peak);
    c.body << "<rect x=\"" << detail::num(c.left + bw * b) << "\" y=\"" << detail::num(c.top + c.plot_h() - h)
           << "\" width=\"" << detail::num(bw) << "\" height=\"" << detail::num(h) << "\" fill=\""
           << detail::palette(0) << "\"/>\n";
  }
  const double zx = c.left + c.plot_w() * (0.0 - lo) / (hi - lo);
  c.body << "<line x1=\"" << detail::num(zx) << "\" y1=\"" << c.top << "\" x2=\"" << detail::num(zx) << "\" y2=\""
         << c.top + c.plot_h() << "\" stroke=\"" << detail::palette(3) << "\" stroke-dasharray=\"4 3\"/>\n";
  c.body << "<text x=\"" << c.left << "\" y=\"" << c.top + c.plot_h() + 16 << "\">" << detail::num(lo) << "</text>\n";
  c.body << "<text x=\"" << c.left + c.plot_w() << "\" y=\"" << c.top + c.plot_h() + 16 << "\" text-anchor=\"end\">"
         << detail::num(hi) << "</text>\n";
  c.body << "<text x=\"" << c.left + c.plot_w() / 2 << "\" y=\"" << c.height - 10
         << "\" text-anchor=\"middle\">CV(DFW) - CV(IPW)</text>\n";
  return c.finish("Weight CV difference");
}

inline std::vector<double> read_cv_differences(const std::filesystem::path& p) {
  std::vector<double> out;
  for (const auto& r : detail::read_rows(p)) {
    if (r.size() != 2) throw Error(ErrorCode::kSchema, "cv differences: expected 2 fields");
    out.push_back(detail::to_double(r[1]));
  }
  return out;
}

/// Renders every plot whose source CSV exists in `dir`; returns written paths.
inline std::vector<std::filesystem::path> render_directory(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  if (std::filesystem::exists(dir / "smd.csv")) {
    csv::write_text((dir / "smd.svg").string(), smd_svg(dir / "smd.csv"));
    written.push_back(dir / "smd.svg");
  }
  if (std::filesystem::exists(dir / "ecdf.csv")) {
    for (const auto& [feature, svg] : ecdf_svgs(dir / "ecdf.csv")) {
      const auto p = dir / ("ecdf_" + feature + ".svg");
      csv::write_text(p.string(), svg);
      written.push_back(p);
    }
  }
  if (std::filesystem::exists(dir / "cv_differences.csv")) {
    csv::write_text((dir / "cv_differences.svg").string(),
                    cv_difference_svg(read_cv_differences(dir / "cv_differences.csv")));
    written.push_back(dir / "cv_differences.svg");
  }
  return written;
}

}  // namespace dfw::plots
