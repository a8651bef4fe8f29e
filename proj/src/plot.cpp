#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "flexdome/errors.hpp"
#include "flexdome/experiment.hpp"

namespace flexdome {

namespace {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> cols;

  int col(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return static_cast<int>(i);
    throw ConfigError("aggregation: column '" + name + "' missing");
  }
};

CsvTable read_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("aggregation: cannot open " + path);
  CsvTable t;
  std::string line;
  if (!std::getline(f, line)) throw ConfigError("aggregation: empty " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) t.header.push_back(cell);
  t.cols.resize(t.header.size());
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    if (line.back() == '\r') line.pop_back();
    std::size_t pos = 0, idx = 0;
    while (idx < t.cols.size()) {
      const std::size_t next = line.find(',', pos);
      t.cols[idx].push_back(std::strtod(line.c_str() + pos, nullptr));
      ++idx;
      if (next == std::string::npos) break;
      pos = next + 1;
    }
    if (idx != t.cols.size())
      throw ConfigError("aggregation: ragged row in " + path);
  }
  return t;
}

struct SeriesStat {
  std::vector<double> mean, err;  // err = sd / sqrt(n); zero for one seed
};

SeriesStat across_seeds(const std::vector<const std::vector<double>*>& runs) {
  SeriesStat st;
  const std::size_t n = runs.size(), len = runs[0]->size();
  st.mean.resize(len);
  st.err.resize(len, 0.0);
  for (std::size_t k = 0; k < len; ++k) {
    double sum = 0.0;
    for (const auto* r : runs) sum += (*r)[k];
    const double mean = sum / n;
    st.mean[k] = mean;
    if (n >= 2) {
      double ss = 0.0;
      for (const auto* r : runs) {
        const double d = (*r)[k] - mean;
        ss += d * d;
      }
      st.err[k] = std::sqrt(ss / (n - 1)) / std::sqrt(static_cast<double>(n));
    }
  }
  return st;
}

void moving_average(std::vector<double>& v, int window) {
  if (window <= 1) return;
  std::vector<double> out(v.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    acc += v[i];
    if (i >= static_cast<std::size_t>(window)) acc -= v[i - window];
    out[i] = acc / std::min<std::size_t>(i + 1, window);
  }
  v.swap(out);
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

struct PanelSeries {
  std::string label;
  std::string color;
  std::vector<double> x, mean, lo, hi;
};

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

// One panel with axes, an optional stderr band per series, and a legend.
void render_panel(std::string& svg, double px, double py, double pw, double ph,
                  const std::string& title, std::vector<PanelSeries> series,
                  bool logy) {
  const double ml = 64, mr = 12, mt = 30, mb = 34;  // panel-local margins
  const double x0 = px + ml, y0 = py + mt;
  const double w = pw - ml - mr, h = ph - mt - mb;

  if (logy) {
    double floor_pos = std::numeric_limits<double>::infinity();
    for (const auto& s : series)
      for (double v : s.mean)
        if (v > 0.0) floor_pos = std::min(floor_pos, v);
    if (!std::isfinite(floor_pos)) {
      logy = false;  // nothing positive to show on a log axis
    } else {
      const double fl = floor_pos / 10.0;
      for (auto& s : series) {
        for (double& v : s.mean) v = std::log10(std::max(v, fl));
        for (double& v : s.lo) v = std::log10(std::max(v, fl));
        for (double& v : s.hi) v = std::log10(std::max(v, fl));
      }
    }
  }

  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool first = true;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double lo = s.lo.empty() ? s.mean[i] : s.lo[i];
      const double hi = s.hi.empty() ? s.mean[i] : s.hi[i];
      if (first) {
        xmin = xmax = s.x[i];
        ymin = lo;
        ymax = hi;
        first = false;
      } else {
        xmin = std::min(xmin, s.x[i]);
        xmax = std::max(xmax, s.x[i]);
        ymin = std::min(ymin, lo);
        ymax = std::max(ymax, hi);
      }
    }
  }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) {
    ymax = ymin + 1;
    ymin -= 1;
  }
  const double ypad = 0.05 * (ymax - ymin);
  ymin -= ypad;
  ymax += ypad;

  auto X = [&](double v) { return x0 + (v - xmin) / (xmax - xmin) * w; };
  auto Y = [&](double v) { return y0 + h - (v - ymin) / (ymax - ymin) * h; };

  svg += "<rect x='" + fmt(px) + "' y='" + fmt(py) + "' width='" + fmt(pw) +
         "' height='" + fmt(ph) + "' fill='white' stroke='none'/>\n";
  svg += "<text x='" + fmt(px + pw / 2) + "' y='" + fmt(py + 18) +
         "' text-anchor='middle' font-size='14' fill='#222'>" + title +
         "</text>\n";

  // axes + ticks
  svg += "<line x1='" + fmt(x0) + "' y1='" + fmt(y0 + h) + "' x2='" +
         fmt(x0 + w) + "' y2='" + fmt(y0 + h) + "' stroke='#444'/>\n";
  svg += "<line x1='" + fmt(x0) + "' y1='" + fmt(y0) + "' x2='" + fmt(x0) +
         "' y2='" + fmt(y0 + h) + "' stroke='#444'/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = xmin + (xmax - xmin) * k / 4.0;
    const double gx = X(fx);
    svg += "<line x1='" + fmt(gx) + "' y1='" + fmt(y0 + h) + "' x2='" +
           fmt(gx) + "' y2='" + fmt(y0 + h + 4) + "' stroke='#444'/>\n";
    svg += "<text x='" + fmt(gx) + "' y='" + fmt(y0 + h + 16) +
           "' text-anchor='middle' font-size='10' fill='#444'>" + fmt(fx) +
           "</text>\n";
    const double fy = ymin + (ymax - ymin) * k / 4.0;
    const double gy = Y(fy);
    svg += "<line x1='" + fmt(x0 - 4) + "' y1='" + fmt(gy) + "' x2='" +
           fmt(x0) + "' y2='" + fmt(gy) + "' stroke='#444'/>\n";
    const std::string ylab = logy ? ("1e" + fmt(fy)) : fmt(fy);
    svg += "<text x='" + fmt(x0 - 6) + "' y='" + fmt(gy + 3) +
           "' text-anchor='end' font-size='10' fill='#444'>" + ylab +
           "</text>\n";
  }

  for (const auto& s : series) {
    if (!s.lo.empty()) {
      std::string pts;
      for (std::size_t i = 0; i < s.x.size(); ++i)
        pts += fmt(X(s.x[i])) + "," + fmt(Y(s.hi[i])) + " ";
      for (std::size_t i = s.x.size(); i-- > 0;)
        pts += fmt(X(s.x[i])) + "," + fmt(Y(s.lo[i])) + " ";
      svg += "<polygon points='" + pts + "' fill='" + s.color +
             "' opacity='0.15' stroke='none'/>\n";
    }
    std::string pts;
    for (std::size_t i = 0; i < s.x.size(); ++i)
      pts += fmt(X(s.x[i])) + "," + fmt(Y(s.mean[i])) + " ";
    svg += "<polyline points='" + pts + "' fill='none' stroke='" + s.color +
           "' stroke-width='1.5'/>\n";
  }

  double ly = y0 + 12;
  for (const auto& s : series) {
    svg += "<line x1='" + fmt(x0 + 8) + "' y1='" + fmt(ly - 3) + "' x2='" +
           fmt(x0 + 28) + "' y2='" + fmt(ly - 3) + "' stroke='" + s.color +
           "' stroke-width='2'/>\n";
    svg += "<text x='" + fmt(x0 + 33) + "' y='" + fmt(ly) +
           "' font-size='11' fill='#222'>" + s.label + "</text>\n";
    ly += 14;
  }
}

struct AlgData {
  std::vector<std::uint64_t> seeds;
  std::vector<CsvTable> tables;
};

void write_svg(const std::string& path, const std::string& heading,
               const std::vector<std::string>& algs,
               const std::map<std::string, AlgData>& data,
               const std::vector<double>& xgrid, bool log_scale, int window) {
  struct PanelDef {
    const char* column;
    const char* title;
    bool smooth;
    bool logy;
  };
  const PanelDef panels[] = {
      {"inst_gap", "instantaneous gap", true, false},
      {"inst_violation_0", "instantaneous violation", true, false},
      {"cum_strong_regret", "cumulative strong regret", false, log_scale},
      {"cum_strong_violation", "cumulative strong violation", false, log_scale},
  };

  const double pw = 560, ph = 380;
  const std::size_t stride = std::max<std::size_t>(1, xgrid.size() / 1200);

  std::string svg;
  svg += "<svg xmlns='http://www.w3.org/2000/svg' width='1140' height='810' "
         "font-family='sans-serif'>\n";
  svg += "<rect width='1140' height='810' fill='white'/>\n";
  svg += "<text x='570' y='24' text-anchor='middle' font-size='16' "
         "fill='#111'>" + heading + "</text>\n";

  for (int p = 0; p < 4; ++p) {
    std::vector<PanelSeries> series;
    int color = 0;
    for (const auto& name : algs) {
      const AlgData& ad = data.at(name);
      std::vector<const std::vector<double>*> runs;
      std::vector<std::vector<double>> smoothed(ad.tables.size());
      for (std::size_t r = 0; r < ad.tables.size(); ++r) {
        const CsvTable& t = ad.tables[r];
        smoothed[r] = t.cols[t.col(panels[p].column)];
        if (panels[p].smooth) moving_average(smoothed[r], window);
        runs.push_back(&smoothed[r]);
      }
      SeriesStat st = across_seeds(runs);
      PanelSeries s;
      s.label = name;
      s.color = kPalette[color++ % 8];
      for (std::size_t k = 0; k < xgrid.size(); k += stride) {
        s.x.push_back(xgrid[k]);
        s.mean.push_back(st.mean[k]);
        s.lo.push_back(st.mean[k] - st.err[k]);
        s.hi.push_back(st.mean[k] + st.err[k]);
      }
      series.push_back(std::move(s));
    }
    const double px = 10 + (p % 2) * 565, py = 36 + (p / 2) * 385;
    render_panel(svg, px, py, pw, ph, panels[p].title, std::move(series),
                 panels[p].logy);
  }
  svg += "</svg>\n";

  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("aggregation: cannot write " + path);
  f << svg;
}

}  // namespace

void aggregate_and_plot(const std::string& run_dir, bool log_scale,
                        int window) {
  nlohmann::json manifest;
  {
    std::ifstream f(run_dir + "/manifest.json", std::ios::binary);
    if (!f)
      throw ConfigError("aggregation: no manifest.json in " + run_dir);
    try {
      f >> manifest;
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(std::string("aggregation: bad manifest: ") + e.what());
    }
  }

  std::vector<std::string> algs;  // in first-seen order
  std::map<std::string, AlgData> data;
  std::vector<double> xgrid;
  try {
    for (const auto& run : manifest.at("runs")) {
      const std::string name = run.at("algorithm").get<std::string>();
      CsvTable t = read_csv(run_dir + "/" + run.at("csv").get<std::string>());
      const auto& episode = t.cols[t.col("episode")];
      if (xgrid.empty())
        xgrid = episode;
      else if (episode != xgrid)
        throw ConfigError(
            "aggregation: runs disagree on the episode grid (mixed lengths?)");
      if (!data.count(name)) algs.push_back(name);
      data[name].seeds.push_back(run.at("seed").get<std::uint64_t>());
      data[name].tables.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("aggregation: bad manifest: ") + e.what());
  }
  if (algs.empty()) throw ConfigError("aggregation: manifest lists no runs");

  const std::string mode =
      manifest["config"].value("threshold_mode", std::string("?"));
  const std::string heading =
      "threshold mode: " + mode + ", episodes: " + fmt(xgrid.back()) +
      ", seeds per arm: " + std::to_string(data[algs[0]].seeds.size());
  write_svg(run_dir + "/plots.svg", heading, algs, data, xgrid, log_scale,
            window);

  std::vector<std::string> ablation;
  for (const auto& a : algs)
    if (a.rfind("flexdome", 0) == 0) ablation.push_back(a);
  if (ablation.size() >= 2)
    write_svg(run_dir + "/ablation.svg", heading + " (variants)", ablation,
              data, xgrid, log_scale, window);

  nlohmann::json summary;
  for (const auto& name : algs) {
    const AlgData& ad = data.at(name);
    nlohmann::json per;
    const char* final_cols[] = {"inst_gap", "inst_violation_0",
                                "cum_strong_regret", "cum_strong_violation",
                                "cum_weak_regret"};
    for (const char* cname : final_cols) {
      std::vector<double> finals;
      for (const auto& t : ad.tables)
        finals.push_back(t.cols[t.col(cname)].back());
      double mean = 0.0;
      for (double v : finals) mean += v;
      mean /= finals.size();
      double sd = 0.0;
      if (finals.size() >= 2) {
        for (double v : finals) sd += (v - mean) * (v - mean);
        sd = std::sqrt(sd / (finals.size() - 1));
      }
      per[cname] = {{"mean", mean}, {"sd", sd}, {"per_seed", finals}};
    }
    per["seeds"] = ad.seeds;
    summary[name] = std::move(per);
  }
  std::ofstream sf(run_dir + "/summary.json", std::ios::binary);
  if (!sf) throw ConfigError("aggregation: cannot write summary.json");
  sf << summary.dump(2) << "\n";
}

}  // namespace flexdome
