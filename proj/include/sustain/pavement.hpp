#pragma once

// Flexible-pavement case study: mix-design table, thickness reductions, and
// the two-factor (RAP, VA) diffusion scenarios.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sustain/csv.hpp"
#include "sustain/error.hpp"
#include "sustain/fd_solver.hpp"

namespace sustain::pavement {

// One row of the flexible-pavement design table. Thicknesses in mm.
struct MixDesign {
  std::string label;
  double ac_mm = 0.0;
  std::optional<double> drainage_mm;  // absent in the conventional section
  double subbase_mm = 0.0;
  double base_mm = 0.0;
  double total_mm = 0.0;
  double base_mr_mpa = 0.0;
  std::string reference;

  double layer_sum() const { return ac_mm + drainage_mm.value_or(0.0) + subbase_mm + base_mm; }

  void validate() const {
    for (double t : {ac_mm, drainage_mm.value_or(0.0), subbase_mm, base_mm}) {
      if (t < 0.0) throw ValidationError("mix '" + label + "' has a negative layer thickness");
    }
    if (layer_sum() != total_mm) {
      std::ostringstream msg;
      msg << "mix '" << label << "': layers sum to " << layer_sum() << " mm but total is "
          << total_mm << " mm";
      throw ValidationError(msg.str());
    }
    if (!(base_mr_mpa > 0.0)) throw ValidationError("mix '" + label + "' needs a positive base Mr");
  }
};

// Design basis recorded alongside the table. Neither modulus enters any
// computation; the text and the table note disagree, so both are kept.
struct SiteMetadata {
  double subgrade_mr_text_mpa = 30.0;
  double subgrade_mr_table_mpa = 50.0;
  double subbase_mr_mpa = 250.0;
  double drainage_mr_mpa = 450.0;
  double ac_mr_mpa = 3000.0;
  double design_traffic_msa = 20.0;
  const char* guideline = "IRC:37 (2018)";
};

inline std::vector<MixDesign> default_mix_table() {
  return {
      {"0R:100VA", 80, std::nullopt, 200, 275, 555, 350, "IRC:37 (2018)"},
      {"50R:50V+20F", 70, 100, 100, 185, 455, 1344, "-"},
      {"60R:40V+20F", 70, 100, 100, 195, 465, 1191, "SarideAvimeni"},
      {"80R:20V+20F", 70, 100, 100, 205, 475, 988, "Avirneni"},
      {"100R:0VA+20F", 70, 100, 100, 240, 510, 565, "ArulRajah"},
      {"50R:50V+30F", 70, 100, 100, 195, 465, 1156, "-"},
      {"60R:40V+30F", 70, 100, 100, 205, 475, 968, "SarideJallu"},
      {"80R:20V+30F", 70, 100, 100, 215, 485, 824, "SarideChallapalli"},
  };
}

struct VariableRange {
  std::string name;
  std::string description;
  std::vector<double> values;  // listed levels, or {lo, hi} when is_range
  bool is_range = false;
};

inline std::vector<VariableRange> design_variables() {
  return {
      {"RAP", "Reclaimed asphalt pavement material from milling of distressed pavements", {50, 60, 80}, false},
      {"VA", "Natural aggregates used for road construction", {50, 40, 20}, false},
      {"FA", "Fly ash from coal combustion in power plants", {20, 30}, false},
      {"Mr", "Resilient modulus (MPa) used to design the layer thickness", {350, 1350}, true},
  };
}

// Columns: label, ac_mm, drainage_mm (blank allowed), subbase_mm, base_mm,
// total_mm, base_mr_mpa, reference. Every row is validated; the first bad
// row aborts the load.
inline std::vector<MixDesign> load_mix_table(std::istream& in) {
  const auto t = csv::read(in);
  const auto c_label = t.column("label");
  const auto c_ac = t.column("ac_mm");
  const auto c_dr = t.column("drainage_mm");
  const auto c_sb = t.column("subbase_mm");
  const auto c_base = t.column("base_mm");
  const auto c_total = t.column("total_mm");
  const auto c_mr = t.column("base_mr_mpa");
  const auto c_ref = t.column("reference");
  std::vector<MixDesign> rows;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const auto line = t.line_numbers[r];
    MixDesign m;
    m.label = row[c_label];
    m.ac_mm = csv::to_double(row[c_ac], line);
    if (!row[c_dr].empty() && row[c_dr] != "NA") m.drainage_mm = csv::to_double(row[c_dr], line);
    m.subbase_mm = csv::to_double(row[c_sb], line);
    m.base_mm = csv::to_double(row[c_base], line);
    m.total_mm = csv::to_double(row[c_total], line);
    m.base_mr_mpa = csv::to_double(row[c_mr], line);
    m.reference = row[c_ref];
    try {
      m.validate();
    } catch (const ValidationError& e) {
      throw ValidationError("row at line " + std::to_string(line) + " rejected: " + e.what());
    }
    rows.push_back(std::move(m));
  }
  return rows;
}

inline void write_mix_table(std::ostream& os, const std::vector<MixDesign>& rows) {
  os << "label,ac_mm,drainage_mm,subbase_mm,base_mm,total_mm,base_mr_mpa,reference\n";
  for (const auto& m : rows) {
    os << m.label << ',' << m.ac_mm << ',';
    if (m.drainage_mm) os << *m.drainage_mm;
    os << ',' << m.subbase_mm << ',' << m.base_mm << ',' << m.total_mm << ',' << m.base_mr_mpa << ','
       << m.reference << '\n';
  }
}

inline const MixDesign& find_mix(const std::vector<MixDesign>& rows, const std::string& label) {
  for (const auto& m : rows) {
    if (m.label == label) return m;
  }
  std::string known;
  for (const auto& m : rows) known += (known.empty() ? "" : ", ") + m.label;
  throw InvalidArgument("no mix labelled '" + label + "' (known: " + known + ")");
}

// Percentage drop in total thickness relative to the baseline section.
inline double thickness_reduction(const MixDesign& mix, const MixDesign& baseline) {
  if (!(baseline.total_mm > 0.0)) throw InvalidArgument("baseline total thickness must be positive");
  return 100.0 * (baseline.total_mm - mix.total_mm) / baseline.total_mm;
}

enum class Figure { Fig4, Fig5 };

inline Figure parse_figure(const std::string& s) {
  if (s == "fig4") return Figure::Fig4;
  if (s == "fig5") return Figure::Fig5;
  throw InvalidArgument("unknown figure '" + s + "' (expected fig4 or fig5)");
}

inline const char* figure_name(Figure f) { return f == Figure::Fig4 ? "fig4" : "fig5"; }

struct FigureOptions {
  double s = 10.0;
  double t_end = 1000.0;
  std::vector<double> snapshot_times = {0.0, 1.0, 10.0, 100.0, 1000.0};
  std::size_t longest_points = 91;
  // Floor on the grid spacing; the step count grows like t_end / h^2.
  double min_spacing = 0.1;
};

struct Panel {
  std::string name;  // "a".."d"
  ScenarioSpec spec;
};

// The four panels of a figure: zero initial data, H = s t on every face.
inline std::vector<Panel> figure_panels(Figure which, const FigureOptions& opt = {}) {
  const std::vector<std::pair<double, double>> extents =
      which == Figure::Fig4
          ? std::vector<std::pair<double, double>>{{1, 1}, {3, 3}, {6, 6}, {9, 9}}
          : std::vector<std::pair<double, double>>{{4, 6}, {6, 9}, {8, 12}, {10, 15}};
  std::vector<Panel> panels;
  const char* names[] = {"a", "b", "c", "d"};
  for (std::size_t i = 0; i < extents.size(); ++i) {
    ScenarioSpec spec;
    spec.domain = {{0.0, extents[i].first}, {0.0, extents[i].second}};
    const double longest = std::max(extents[i].first, extents[i].second);
    const double h = std::max(longest / static_cast<double>(opt.longest_points - 1), opt.min_spacing);
    const auto points = static_cast<std::size_t>(std::lround(longest / h)) + 1;
    spec.resolution = equalized_resolution(spec.domain, points);
    spec.s = opt.s;
    spec.t_end = opt.t_end;
    const double s = opt.s;
    spec.boundary = [s](std::span<const double>, double t) { return s * t; };
    spec.initial = [](std::span<const double>) { return 0.0; };
    spec.boundary_text = "s*t";
    spec.initial_text = "0";
    panels.push_back({names[i], std::move(spec)});
  }
  return panels;
}

struct PanelRun {
  Panel panel;
  ScenarioRun run;
};

inline std::vector<PanelRun> run_figure(Figure which, const FigureOptions& opt = {}) {
  std::vector<double> times;
  for (double t : opt.snapshot_times) {
    if (t <= opt.t_end) times.push_back(t);
  }
  std::vector<PanelRun> out;
  for (auto& p : figure_panels(which, opt)) {
    auto run = run_scenario(p.spec, times);
    out.push_back({std::move(p), std::move(run)});
  }
  return out;
}

// Writes <dir>/<fig>_<panel>.csv for every panel plus <dir>/<fig>_manifest.json
// and returns the manifest.
inline nlohmann::json export_figure(Figure which, const std::vector<PanelRun>& runs,
                                    const std::filesystem::path& dir, int precision = 6,
                                    bool normalized = false) {
  std::filesystem::create_directories(dir);
  nlohmann::json panels = nlohmann::json::array();
  for (const auto& pr : runs) {
    const auto file = std::string(figure_name(which)) + "_" + pr.panel.name + ".csv";
    std::ofstream os(dir / file);
    if (!os) throw Error("cannot write " + (dir / file).string());
    os << std::setprecision(precision);
    write_fields_csv(os, pr.run.snapshots,
                     normalized ? std::optional<double>(pr.panel.spec.s) : std::nullopt);
    std::vector<double> actual;
    for (const auto& f : pr.run.snapshots) actual.push_back(f.time);
    panels.push_back({{"panel", pr.panel.name},
                      {"file", file},
                      {"scenario", scenario_to_json(pr.panel.spec)},
                      {"solver",
                       {{"scheme", "explicit FTCS"},
                        {"dt", pr.run.dt},
                        {"steps", pr.run.steps},
                        {"final_time", pr.run.final_time},
                        {"requested_times", pr.run.requested_times},
                        {"snapshot_times", actual},
                        {"snapshot_rule", "nearest completed step"}}}});
  }
  nlohmann::json manifest = {{"figure", figure_name(which)}, {"panels", std::move(panels)}};
  std::ofstream os(dir / (std::string(figure_name(which)) + "_manifest.json"));
  os << manifest.dump(2) << '\n';
  return manifest;
}

inline nlohmann::json run_paper_figures(Figure which, const std::filesystem::path& dir,
                                        const FigureOptions& opt = {}, int precision = 6,
                                        bool normalized = false) {
  return export_figure(which, run_figure(which, opt), dir, precision, normalized);
}

}  // namespace sustain::pavement
