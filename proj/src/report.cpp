#include "ghzrep/report.hpp"

#include "ghzrep/fock_space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace ghzrep {

ReportKind report_kind_from_string(const std::string& s) {
  if (s == "heatmap") return ReportKind::Heatmap;
  if (s == "curve") return ReportKind::Curve;
  if (s == "tradeoff") return ReportKind::Tradeoff;
  throw ConfigError("unknown report kind '" + s + "' (heatmap, curve, tradeoff)");
}

std::string to_string(ReportKind k) {
  switch (k) {
    case ReportKind::Heatmap:
      return "heatmap";
    case ReportKind::Curve:
      return "curve";
    case ReportKind::Tradeoff:
      return "tradeoff";
  }
  return "?";
}

int CsvTable::column(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

bool parse(const std::string& s, double& x) {
  if (s.empty()) return false;
  if (s == "inf") {
    x = INFINITY;
    return true;
  }
  char* e = nullptr;
  x = std::strtod(s.c_str(), &e);
  return *e == '\0' && !std::isnan(x);
}

std::string esc(const std::string& s) {
  std::string o;
  for (char c : s) {
    if (c == '&')
      o += "&amp;";
    else if (c == '<')
      o += "&lt;";
    else if (c == '>')
      o += "&gt;";
    else if (c == '"')
      o += "&quot;";
    else
      o += c;
  }
  return o;
}

std::string fmt(double x, int prec = 4) {
  char b[48];
  std::snprintf(b, sizeof b, "%.*g", prec, x);
  return b;
}

// Plot area with linear or log axes.
struct Frame {
  double x0 = 80, y0 = 40, w = 560, h = 380;
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool xlog = false, ylog = false;
  double tx(double x) const {
    const double a = xlog ? std::log10(x) : x, lo = xlog ? std::log10(xmin) : xmin, hi = xlog ? std::log10(xmax) : xmax;
    return x0 + (hi > lo ? (a - lo) / (hi - lo) : 0.5) * w;
  }
  double ty(double y) const {
    const double a = ylog ? std::log10(y) : y, lo = ylog ? std::log10(ymin) : ymin, hi = ylog ? std::log10(ymax) : ymax;
    return y0 + h - (hi > lo ? (a - lo) / (hi - lo) : 0.5) * h;
  }
};

void pad(double& lo, double& hi, bool log) {
  if (lo == hi) {
    if (log) {
      lo /= 2;
      hi *= 2;
    } else {
      lo -= 0.5;
      hi += 0.5;
    }
  }
}

void axes(std::ostringstream& o, const Frame& f, const std::string& xl, const std::string& yl) {
  o << "<rect x=\"" << f.x0 << "\" y=\"" << f.y0 << "\" width=\"" << f.w << "\" height=\"" << f.h
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    auto at = [&](double lo, double hi, bool lg) {
      return lg ? std::pow(10.0, std::log10(lo) + k * (std::log10(hi) - std::log10(lo)) / 4) : lo + k * (hi - lo) / 4;
    };
    const double xv = at(f.xmin, f.xmax, f.xlog), yv = at(f.ymin, f.ymax, f.ylog);
    o << "<text x=\"" << fmt(f.tx(xv)) << "\" y=\"" << f.y0 + f.h + 18 << "\" font-size=\"11\" text-anchor=\"middle\">"
      << fmt(xv, 3) << "</text>\n";
    o << "<text x=\"" << f.x0 - 6 << "\" y=\"" << fmt(f.ty(yv) + 4) << "\" font-size=\"11\" text-anchor=\"end\">"
      << fmt(yv, 3) << "</text>\n";
  }
  o << "<text x=\"" << f.x0 + f.w / 2 << "\" y=\"" << f.y0 + f.h + 38 << "\" font-size=\"13\" text-anchor=\"middle\">"
    << esc(xl) << "</text>\n";
  o << "<text x=\"20\" y=\"" << f.y0 + f.h / 2 << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
    << f.y0 + f.h / 2 << ")\">" << esc(yl) << "</text>\n";
}

const char* palette(size_t i) {
  static const char* c[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  return c[i % 8];
}

// dark blue -> teal -> yellow
std::string heat(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const double s[3][3] = {{68, 1, 84}, {33, 145, 140}, {253, 231, 37}};
  const int k = t < 0.5 ? 0 : 1;
  const double u = t < 0.5 ? t * 2 : (t - 0.5) * 2;
  char b[16];
  std::snprintf(b, sizeof b, "#%02x%02x%02x", static_cast<int>(std::lround(s[k][0] + u * (s[k + 1][0] - s[k][0]))),
                static_cast<int>(std::lround(s[k][1] + u * (s[k + 1][1] - s[k][1]))),
                static_cast<int>(std::lround(s[k][2] + u * (s[k + 1][2] - s[k][2]))));
  return b;
}

struct Point {
  size_t row = 0;
  double x = 0, y = 0;
};

std::string data_attrs(const CsvTable& t, size_t row, const std::vector<std::string>& cols) {
  std::string s = " data-row=\"" + std::to_string(row + 1) + "\"";
  for (const auto& c : cols) s += " data-" + c + "=\"" + esc(t.rows[row][t.column(c)]) + "\"";
  return s;
}

}  // namespace

CsvTable read_csv(std::istream& in, const std::string& source) {
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(source + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  t.header = split_line(line);
  int no = 1;
  while (std::getline(in, line)) {
    ++no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto r = split_line(line);
    if (r.size() != t.header.size())
      throw ConfigError(source + ":" + std::to_string(no) + ": expected " + std::to_string(t.header.size()) +
                        " fields, found " + std::to_string(r.size()));
    t.rows.push_back(std::move(r));
  }
  return t;
}

CsvTable load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  return read_csv(in, path);
}

std::vector<std::string> required_columns(ReportKind k) {
  switch (k) {
    case ReportKind::Heatmap:
      return {"L_km", "T_coh_s", "fidelity"};
    case ReportKind::Curve:
      return {"scheme", "n", "L_km", "T_coh_s", "fidelity"};
    case ReportKind::Tradeoff:
      return {"T_coh_s", "tau_filter_s", "fidelity", "T_gen_s"};
  }
  return {};
}

std::string render_report(const CsvTable& t, ReportKind k, const std::string& source) {
  std::vector<std::string> missing;
  for (const auto& c : required_columns(k))
    if (t.column(c) < 0) missing.push_back(c);
  if (!missing.empty()) {
    std::string m = source + ": missing columns for a " + to_string(k) + " report:";
    for (const auto& c : missing) m += " " + c;
    throw ConfigError(m);
  }
  auto num = [&](size_t row, const std::string& c, double& x) { return parse(t.rows[row][t.column(c)], x); };
  const auto cols = required_columns(k);

  std::ostringstream body;
  std::ostringstream o;
  size_t used = 0;
  Frame f;

  if (k == ReportKind::Heatmap) {
    std::vector<double> xs, ys;
    std::map<std::pair<double, double>, std::pair<size_t, double>> cell;  // first row per cell
    for (size_t r = 0; r < t.rows.size(); ++r) {
      double L, T, F;
      if (!num(r, "L_km", L) || !num(r, "T_coh_s", T) || !num(r, "fidelity", F)) continue;
      if (cell.emplace(std::make_pair(L, T), std::make_pair(r, F)).second) {
        xs.push_back(L);
        ys.push_back(T);
      }
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
    double fmin = 1, fmax = 0;
    for (const auto& [key, v] : cell) {
      fmin = std::min(fmin, v.second);
      fmax = std::max(fmax, v.second);
    }
    if (fmax < fmin) fmin = 0, fmax = 1;
    if (fmax == fmin) fmax = fmin + 1e-12;
    const double cw = xs.empty() ? 0 : f.w / xs.size(), ch = ys.empty() ? 0 : f.h / ys.size();
    // infinite coherence times are drawn as the top row
    for (const auto& [key, v] : cell) {
      const size_t i = std::lower_bound(xs.begin(), xs.end(), key.first) - xs.begin();
      const size_t j = std::lower_bound(ys.begin(), ys.end(), key.second) - ys.begin();
      body << "<rect x=\"" << fmt(f.x0 + i * cw, 6) << "\" y=\"" << fmt(f.y0 + f.h - (j + 1) * ch, 6) << "\" width=\""
           << fmt(cw, 6) << "\" height=\"" << fmt(ch, 6) << "\" fill=\"" << heat((v.second - fmin) / (fmax - fmin))
           << "\"" << data_attrs(t, v.first, cols) << "/>\n";
      ++used;
    }
    o << "<rect x=\"" << f.x0 << "\" y=\"" << f.y0 << "\" width=\"" << f.w << "\" height=\"" << f.h
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (size_t i = 0; i < xs.size(); ++i)
      o << "<text x=\"" << fmt(f.x0 + (i + 0.5) * cw, 6) << "\" y=\"" << f.y0 + f.h + 16
        << "\" font-size=\"10\" text-anchor=\"middle\">" << fmt(xs[i]) << "</text>\n";
    for (size_t j = 0; j < ys.size(); ++j)
      o << "<text x=\"" << f.x0 - 6 << "\" y=\"" << fmt(f.y0 + f.h - (j + 0.5) * ch + 4, 6)
        << "\" font-size=\"10\" text-anchor=\"end\">" << fmt(ys[j]) << "</text>\n";
    o << "<text x=\"" << f.x0 + f.w / 2 << "\" y=\"" << f.y0 + f.h + 38
      << "\" font-size=\"13\" text-anchor=\"middle\">L (km)</text>\n";
    o << "<text x=\"20\" y=\"" << f.y0 + f.h / 2 << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
      << f.y0 + f.h / 2 << ")\">T_coh (s)</text>\n";
    for (int s = 0; s <= 10; ++s)
      o << "<rect x=\"" << f.x0 + f.w + 20 << "\" y=\"" << fmt(f.y0 + f.h - (s + 1) * f.h / 11, 6)
        << "\" width=\"16\" height=\"" << fmt(f.h / 11, 6) << "\" fill=\"" << heat(s / 10.0) << "\"/>\n";
    o << "<text x=\"" << f.x0 + f.w + 40 << "\" y=\"" << f.y0 + 10 << "\" font-size=\"11\">F " << fmt(fmax) << "</text>\n";
    o << "<text x=\"" << f.x0 + f.w + 40 << "\" y=\"" << f.y0 + f.h << "\" font-size=\"11\">F " << fmt(fmin)
      << "</text>\n";
  } else {
    const bool curve = k == ReportKind::Curve;
    const std::string xc = curve ? "L_km" : "T_gen_s";
    std::map<std::string, std::vector<Point>> groups;
    std::map<std::string, double> order_key;
    for (size_t r = 0; r < t.rows.size(); ++r) {
      double x = 0, y = 0, T = 0;
      if (!num(r, xc, x) || !num(r, "fidelity", y) || !num(r, "T_coh_s", T)) continue;
      std::string g = "T_coh=" + t.rows[r][t.column("T_coh_s")] + " s";
      if (curve) g = t.rows[r][t.column("scheme")] + ", " + g;
      double sort_x = x;
      if (!curve) {
        double tau;
        if (!num(r, "tau_filter_s", tau)) continue;
        sort_x = tau;
      }
      groups[g].push_back({r, x, y});
      order_key[g + "#" + std::to_string(r)] = sort_x;
    }
    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (auto& [g, pts] : groups) {
      std::stable_sort(pts.begin(), pts.end(), [&](const Point& a, const Point& b) {
        return order_key[g + "#" + std::to_string(a.row)] < order_key[g + "#" + std::to_string(b.row)];
      });
      for (const auto& p : pts) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
      }
    }
    if (groups.empty()) xmin = 1, xmax = 10, ymin = 0, ymax = 1;
    f.xlog = !curve && xmin > 0;
    pad(xmin, xmax, f.xlog);
    pad(ymin, ymax, false);
    f.xmin = xmin;
    f.xmax = xmax;
    f.ymin = ymin;
    f.ymax = ymax;
    axes(o, f, curve ? "L (km)" : "T (s)", "F");
    size_t gi = 0;
    for (const auto& [g, pts] : groups) {
      const char* col = palette(gi);
      body << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
      for (size_t i = 0; i < pts.size(); ++i) body << (i ? " " : "") << fmt(f.tx(pts[i].x), 6) << "," << fmt(f.ty(pts[i].y), 6);
      body << "\"/>\n";
      std::string prev_n;
      for (size_t i = 0; i < pts.size(); ++i) {
        const auto& p = pts[i];
        bool transition = false;
        if (curve) {
          const auto& n = t.rows[p.row][t.column("n")];
          transition = i > 0 && n != prev_n;
          prev_n = n;
        }
        // nesting level changes are drawn as open circles
        body << "<circle cx=\"" << fmt(f.tx(p.x), 6) << "\" cy=\"" << fmt(f.ty(p.y), 6) << "\" r=\""
             << (transition ? 6 : 2.5) << "\" fill=\"" << (transition ? "none" : col) << "\" stroke=\"" << col << "\""
             << (transition ? " class=\"transition\"" : "") << data_attrs(t, p.row, cols) << "/>\n";
        ++used;
      }
      o << "<text x=\"" << f.x0 + f.w + 12 << "\" y=\"" << f.y0 + 14 + 16 * gi << "\" font-size=\"11\" fill=\"" << col
        << "\">" << esc(g) << "</text>\n";
      ++gi;
    }
  }

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"820\" height=\"480\" viewBox=\"0 0 820 480\">\n";
  std::string src = source;
  for (size_t p; (p = src.find("--")) != std::string::npos;) src.replace(p, 2, "- -");
  svg << "<!-- data: " << src << "; kind: " << to_string(k) << "; rows plotted: " << used << " of " << t.rows.size()
      << "; columns:";
  for (const auto& c : cols) svg << " " << c;
  svg << "; values are copied verbatim into data-* attributes, data-row counts data lines from 1 -->\n";
  svg << "<rect width=\"820\" height=\"480\" fill=\"white\"/>\n";
  svg << body.str() << o.str() << "</svg>\n";
  return svg.str();
}

}  // namespace ghzrep
