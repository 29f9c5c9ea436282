#include "graphflow/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace graphflow {

namespace {

constexpr double kW = 760.0, kH = 420.0;
constexpr double kL = 78.0, kR = 24.0, kT = 34.0, kB = 56.0;

struct Axes {
  double x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;

  double px(double x) const {
    return kL + (x - x0) / (x1 - x0) * (kW - kL - kR);
  }
  double py(double y) const {
    return kH - kB - (y - y0) / (y1 - y0) * (kH - kT - kB);
  }
};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string pt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// 1/2/5 ladder step covering the range with about `target` ticks.
double nice_step(double range, int target) {
  const double raw = range / std::max(target, 1);
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (raw <= m * mag * (1.0 + 1e-12)) return m * mag;
  }
  return 10.0 * mag;
}

void pad_range(double& lo, double& hi) {
  if (!(hi > lo)) {
    const double c = lo;
    lo = c - 1.0;
    hi = c + 1.0;
    return;
  }
  const double pad = 0.04 * (hi - lo);
  lo -= pad;
  hi += pad;
}

void open_svg(std::ofstream& out) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << kW
      << " " << kH << "\" font-family=\"sans-serif\" font-size=\"13\">\n"
      << "<rect width=\"" << kW << "\" height=\"" << kH
      << "\" fill=\"white\"/>\n";
}

void draw_frame(std::ofstream& out, const Axes& ax, const std::string& xlabel,
                const std::string& ylabel) {
  out << "<rect x=\"" << pt(kL) << "\" y=\"" << pt(kT) << "\" width=\""
      << pt(kW - kL - kR) << "\" height=\"" << pt(kH - kT - kB)
      << "\" fill=\"none\" stroke=\"#444\"/>\n";

  const double sx = nice_step(ax.x1 - ax.x0, 6);
  for (double x = std::ceil(ax.x0 / sx) * sx; x <= ax.x1 + 1e-9 * sx; x += sx) {
    const double p = ax.px(x);
    out << "<line x1=\"" << pt(p) << "\" y1=\"" << pt(kH - kB) << "\" x2=\""
        << pt(p) << "\" y2=\"" << pt(kH - kB + 6) << "\" stroke=\"#444\"/>\n"
        << "<text x=\"" << pt(p) << "\" y=\"" << pt(kH - kB + 22)
        << "\" text-anchor=\"middle\">" << num(x) << "</text>\n";
  }
  const double sy = nice_step(ax.y1 - ax.y0, 6);
  for (double y = std::ceil(ax.y0 / sy) * sy; y <= ax.y1 + 1e-9 * sy; y += sy) {
    const double p = ax.py(y);
    out << "<line x1=\"" << pt(kL - 6) << "\" y1=\"" << pt(p) << "\" x2=\""
        << pt(kL) << "\" y2=\"" << pt(p) << "\" stroke=\"#444\"/>\n"
        << "<text x=\"" << pt(kL - 10) << "\" y=\"" << pt(p + 4)
        << "\" text-anchor=\"end\">" << num(y) << "</text>\n";
  }
  out << "<text x=\"" << pt(kL + (kW - kL - kR) / 2) << "\" y=\""
      << pt(kH - 12) << "\" text-anchor=\"middle\">" << xlabel << "</text>\n"
      << "<text x=\"18\" y=\"" << pt(kT + (kH - kT - kB) / 2)
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
      << pt(kT + (kH - kT - kB) / 2) << ")\">" << ylabel << "</text>\n";
}

void polyline(std::ofstream& out, const Axes& ax, const std::vector<double>& t,
              const std::vector<double>& v, const std::string& color) {
  out << "<polyline fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"1.6\" points=\"";
  for (std::size_t i = 0; i < t.size(); ++i) {
    out << pt(ax.px(t[i])) << "," << pt(ax.py(v[i])) << " ";
  }
  out << "\"/>\n";
}

void legend(std::ofstream& out, double x, double y, const std::string& color,
            const std::string& label) {
  out << "<line x1=\"" << pt(x) << "\" y1=\"" << pt(y) << "\" x2=\""
      << pt(x + 26) << "\" y2=\"" << pt(y) << "\" stroke=\"" << color
      << "\" stroke-width=\"1.6\"/>\n"
      << "<text x=\"" << pt(x + 32) << "\" y=\"" << pt(y + 4) << "\">" << label
      << "</text>\n";
}

void annotate_stop(std::ofstream& out, Termination term) {
  if (term != Termination::SpacelikeGuard &&
      term != Termination::NumericFailure) {
    return;
  }
  out << "<text x=\"" << pt(kW - kR - 6) << "\" y=\"" << pt(kT + 16)
      << "\" text-anchor=\"end\" fill=\"#b00\">run truncated: "
      << to_string(term) << "</text>\n";
}

double log_floor(double v) {
  return std::log10(std::max(v, 1e-16));
}

void write_decay(const std::vector<DiagnosticsRecord>& recs, Termination term,
                 const std::string& path) {
  std::vector<double> t, angle, normb;
  for (const DiagnosticsRecord& r : recs) {
    t.push_back(r.t);
    angle.push_back(log_floor(r.max_cosh_theta - 1.0));
    normb.push_back(log_floor(std::sqrt(std::max(r.max_B2, 0.0))));
  }
  Axes ax;
  ax.x0 = t.front();
  ax.x1 = t.back();
  ax.y0 = std::min(*std::min_element(angle.begin(), angle.end()),
                   *std::min_element(normb.begin(), normb.end()));
  ax.y1 = std::max(*std::max_element(angle.begin(), angle.end()),
                   *std::max_element(normb.begin(), normb.end()));
  pad_range(ax.x0, ax.x1);
  pad_range(ax.y0, ax.y1);

  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  open_svg(out);
  draw_frame(out, ax, "t", "log10 of decay quantities");
  polyline(out, ax, t, angle, "#1a6fb4");
  polyline(out, ax, t, normb, "#c4571a");
  legend(out, kL + 14, kT + 16, "#1a6fb4", "max cosh(theta) - 1");
  legend(out, kL + 14, kT + 34, "#c4571a", "max ||B||");
  annotate_stop(out, term);
  out << "</svg>\n";
}

void write_volume(const std::vector<DiagnosticsRecord>& recs, Termination term,
                  const std::string& path) {
  std::vector<double> t, vol, up, dn;
  const double vol0 = recs.front().volume;
  for (const DiagnosticsRecord& r : recs) {
    t.push_back(r.t);
    vol.push_back(r.volume);
    up.push_back(r.volume + vol0 * r.volume_law_residual);
    dn.push_back(r.volume - vol0 * r.volume_law_residual);
  }
  Axes ax;
  ax.x0 = t.front();
  ax.x1 = t.back();
  ax.y0 = *std::min_element(dn.begin(), dn.end());
  ax.y1 = *std::max_element(up.begin(), up.end());
  pad_range(ax.x0, ax.x1);
  pad_range(ax.y0, ax.y1);

  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  open_svg(out);
  draw_frame(out, ax, "t", "volume");

  // Law-residual band around the trace.
  out << "<polygon fill=\"#1a6fb422\" stroke=\"none\" points=\"";
  for (std::size_t i = 0; i < t.size(); ++i) {
    out << pt(ax.px(t[i])) << "," << pt(ax.py(up[i])) << " ";
  }
  for (std::size_t i = t.size(); i-- > 0;) {
    out << pt(ax.px(t[i])) << "," << pt(ax.py(dn[i])) << " ";
  }
  out << "\"/>\n";
  polyline(out, ax, t, vol, "#1a6fb4");
  legend(out, kL + 14, kT + 16, "#1a6fb4", "volume (band: law residual)");
  annotate_stop(out, term);
  out << "</svg>\n";
}

}  // namespace

void emit_plots(const std::vector<DiagnosticsRecord>& recs, Termination term,
                const std::string& out_dir) {
  if (recs.size() < 2) throw DataError("plots need at least two records");
  std::filesystem::create_directories(out_dir);
  write_decay(recs, term, out_dir + "/decay.svg");
  write_volume(recs, term, out_dir + "/volume.svg");
}

}  // namespace graphflow
