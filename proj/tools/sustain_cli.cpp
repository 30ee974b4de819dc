// Command-line front end for the sustainability-index toolkit.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sustain/sustain.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sustain;

namespace {

struct Global {
  std::string precision = "6";
  std::string format = "text";

  int digits() const {
    if (precision == "full") return 17;
    try {
      const int p = std::stoi(precision);
      if (p < 1 || p > 17) throw InvalidArgument("");
      return p;
    } catch (const std::exception&) {
      throw InvalidArgument("--precision must be 'full' or an integer in 1..17, got '" + precision + "'");
    }
  }

  bool json_out() const { return format == "json"; }
};

std::string num(double v, int digits) {
  std::ostringstream os;
  os << std::setprecision(digits) << v;
  return os.str();
}

fs::path default_out_dir() {
  if (const char* env = std::getenv("SUSTAIN_OUT_DIR"); env && *env) return env;
  return "out";
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  return in;
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = csv::trim(item);
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InvalidArgument(std::string(what) + ": '" + item + "' is not a number");
    }
  }
  return out;
}

// "@file.csv" loads a two-column (x, value) table; anything else is an
// expression in x.
WeightFunction load_function(const std::string& spec, double lo, double hi, const std::string& role) {
  if (!spec.empty() && spec.front() == '@') {
    auto in = open_input(spec.substr(1));
    auto table = csv::read(in, false);
    std::vector<std::pair<double, double>> samples;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      const auto& row = table.rows[r];
      if (row.size() != 2) {
        throw ValidationError(spec.substr(1) + " line " + std::to_string(table.line_numbers[r]) +
                              ": expected two columns x,value");
      }
      if (r == 0 && !std::isdigit(static_cast<unsigned char>(row[0].front())) && row[0].front() != '-' &&
          row[0].front() != '.') {
        continue;  // header
      }
      samples.emplace_back(csv::to_double(row[0], table.line_numbers[r]),
                           csv::to_double(row[1], table.line_numbers[r]));
    }
    auto table_fn = tabulated_function(std::move(samples), role + "=" + spec);
    if (table_fn.lo() > lo || table_fn.hi() < hi) {
      throw InvalidArgument(role + " table " + spec.substr(1) + " covers [" + num(table_fn.lo(), 6) + ", " +
                            num(table_fn.hi(), 6) + "], not the requested interval");
    }
    return table_fn.restricted(lo, hi);
  }
  auto expr = Expression::parse(spec, {"x"});
  return WeightFunction(lo, hi, [expr](double x) { return expr(x); }, role + "=" + spec);
}

std::vector<std::size_t> parse_k_list(const std::string& text) {
  std::vector<std::size_t> ks;
  for (double v : parse_list(text, "--k")) {
    if (v < 1 || v != std::floor(v) || v > 10) throw InvalidArgument("--k entries must be integers in 1..10");
    ks.push_back(static_cast<std::size_t>(v));
  }
  if (ks.empty()) throw InvalidArgument("--k needs at least one value");
  return ks;
}

// ---------------------------------------------------------------- verify

struct VerifyOpts {
  std::string k_list = "2,3,4,5";
  int draws = 20;
  unsigned long long seed = 1;
};

int run_verify(const VerifyOpts& o, const Global& g) {
  const auto ks = parse_k_list(o.k_list);
  if (o.draws < 1) throw InvalidArgument("--draws must be positive");
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> param(0.5, 2.0);
  const int d = g.digits();

  json families = json::array();
  bool all_ok = true;
  for (auto fam : kAllFamilies) {
    double worst = 0.0;
    bool ok = true;
    std::vector<std::size_t> used_k;
    for (auto k : ks) {
      if (k < min_dimension(fam)) continue;
      used_k.push_back(k);
      const bool random_params = uses_weights(fam) || uses_alpha_beta(fam);
      const int n = random_params ? o.draws : 1;
      for (int i = 0; i < n; ++i) {
        SolutionFamily f{fam, k};
        if (uses_alpha_beta(fam)) {
          f.alpha = param(rng);
          f.beta = param(rng);
        }
        if (uses_weights(fam)) {
          for (std::size_t j = 0; j < k; ++j) f.weights.push_back(param(rng));
        }
        auto v = verify_solution(f);
        worst = std::max(worst, v.residual.max_abs_coefficient());
        ok = ok && v.passed;
      }
    }
    if (used_k.empty()) continue;
    all_ok = all_ok && ok;
    const char* model = model_of(fam) == Model::Independent10 ? "model10" : "model11";
    if (g.json_out()) {
      families.push_back({{"family", family_name(fam)},
                          {"model", model},
                          {"k", used_k},
                          {"max_residual_coefficient", worst},
                          {"pass", ok}});
    } else {
      std::string klist;
      for (auto k : used_k) klist += (klist.empty() ? "" : ",") + std::to_string(k);
      std::cout << std::left << std::setw(8) << family_name(fam) << std::setw(9) << model << "k=" << std::setw(12)
                << klist << (ok ? "PASS" : "FAIL") << "  max|residual coef| = " << num(worst, d) << '\n';
    }
  }

  // The C_ab form as printed: residual is the constant (k alpha k! + beta) - (k + 1).
  json printed = json::array();
  std::uniform_real_distribution<double> ab(0.5, 2.0);
  for (auto k : ks) {
    if (k < 2) continue;
    SolutionFamily f{Family::C_ab, k, ab(rng), ab(rng)};
    f.printed_form = true;
    const auto r = residual_model11(build_solution(f));
    const double c = r.coefficient(SparsePolynomial::Exponents(k + 1, 0u));
    if (g.json_out()) {
      printed.push_back({{"k", k}, {"alpha", f.alpha}, {"beta", f.beta}, {"residual_constant", c},
                         {"zero", r.is_zero(kResidualTolerance)}});
    } else {
      std::cout << "C_ab as printed, k=" << k << " alpha=" << num(f.alpha, d) << " beta=" << num(f.beta, d)
                << ": residual " << num(c, d) << (r.is_zero(kResidualTolerance) ? " (zero)" : " (nonzero)")
                << '\n';
    }
  }
  if (g.json_out()) {
    std::cout << json{{"families", families}, {"c_ab_printed_form", printed}, {"all_pass", all_ok}}.dump(2)
              << '\n';
  }
  return all_ok ? 0 : 2;
}

// ---------------------------------------------------------------- rs

struct RsOpts {
  std::string f = "1";
  std::string omega = "x";
  double lo = 0.0;
  double hi = 1.0;
  std::size_t n = 0;
  std::string tag = "midpoint";
  double eta = 1e-6;
  unsigned max_refinements = kDefaultMaxRefinements;
  int region = -1;
};

int run_rs(const std::string& verb, const RsOpts& o, const Global& g) {
  const int d = g.digits();
  if (!(o.lo < o.hi)) throw InvalidArgument("--lo must be smaller than --hi");
  const std::optional<int> region = o.region >= 0 ? std::optional<int>(o.region) : std::nullopt;
  auto omega = load_function(o.omega, o.lo, o.hi, "omega").with_region(region);
  json out;
  std::string text;
  if (verb == "sum") {
    if (o.n == 0) throw InvalidArgument("rs sum needs --n >= 1");
    auto f = load_function(o.f, o.lo, o.hi, "f").with_region(region);
    auto p = make_uniform_partition(o.lo, o.hi, o.n, parse_tag_rule(o.tag));
    p.region_id = region;
    const double s = rs_sum(f, omega, p);
    out = {{"sum", s}, {"intervals", o.n}, {"tag", o.tag}};
    text = num(s, d);
  } else if (verb == "integrate") {
    auto f = load_function(o.f, o.lo, o.hi, "f");
    const auto r = rs_integrate_detailed(f, omega, o.lo, o.hi, o.eta, o.max_refinements);
    out = {{"value", r.value}, {"levels", r.levels}, {"last_change", r.last_change}, {"tag_spread", r.tag_spread}};
    text = num(r.value, d);
  } else if (verb == "variation") {
    if (o.n > 0) {
      const double v = total_variation(omega, make_uniform_partition(o.lo, o.hi, o.n, TagRule::Left));
      out = {{"variation", v}, {"intervals", o.n}};
      text = num(v, d);
    } else {
      const unsigned levels = std::min(o.max_refinements, kDefaultVariationLevels);
      const auto v = variation_sup_detailed(omega, o.lo, o.hi, levels);
      out = {{"variation", v.value}, {"levels", v.levels}, {"monotone", v.monotone}};
      text = num(v.value, d);
    }
  } else if (verb == "bound") {
    auto f = load_function(o.f, o.lo, o.hi, "f");
    const auto r = variation_lower_bound_check(f, omega, o.lo, o.hi, o.eta, o.max_refinements);
    out = {{"lhs", r.lhs},           {"rhs", r.rhs},         {"holds", r.holds}, {"integral", r.integral},
           {"sup_abs_f", r.sup_abs_f}, {"vacuous", r.vacuous}, {"omega_monotone", r.omega_monotone}};
    text = "lhs " + num(r.lhs, d) + " rhs " + num(r.rhs, d) + (r.holds ? " holds" : " FAILS");
    if (r.vacuous) text += " (sup|F| = 0, bound vacuous)";
    if (!r.omega_monotone) text += " (omega not monotone)";
  } else {
    throw InvalidArgument("unknown rs verb '" + verb + "'");
  }
  if (g.json_out()) {
    std::cout << out.dump(2) << '\n';
  } else {
    std::cout << text << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------- solve / figures

struct SolveOpts {
  std::string spec;
  std::string out;
  bool normalized = false;
};

int run_solve(const SolveOpts& o, const Global& g) {
  auto in = open_input(o.spec);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(o.spec + ": " + e.what());
  }
  const auto spec = scenario_from_json(j);
  std::vector<double> times = j.value("snapshots", std::vector<double>{spec.t_end});
  const auto run = run_scenario(spec, times);
  const fs::path dir = o.out.empty() ? default_out_dir() : fs::path(o.out);
  fs::create_directories(dir);
  const auto stem = fs::path(o.spec).stem().string();
  const int d = g.digits();
  fs::path file;
  if (g.format == "json") {
    json fields = json::array();
    for (const auto& f : run.snapshots) fields.push_back(field_to_json(f));
    file = dir / (stem + ".json");
    std::ofstream os(file);
    os << json{{"scenario", scenario_to_json(spec)},
               {"solver", {{"dt", run.dt}, {"steps", run.steps}, {"final_time", run.final_time},
                           {"requested_times", run.requested_times}}},
               {"fields", fields}}
              .dump()
       << '\n';
  } else {
    file = dir / (stem + ".csv");
    std::ofstream os(file);
    os << std::setprecision(d);
    write_fields_csv(os, run.snapshots, o.normalized ? std::optional<double>(spec.s) : std::nullopt);
  }
  std::cout << "wrote " << file.string() << " (" << run.snapshots.size() << " snapshots, " << run.steps
            << " steps, dt = " << num(run.dt, d) << ")\n";
  return 0;
}

struct FigureOpts {
  std::string which = "fig4";
  std::string out;
  double t_end = 1000.0;
  double s = 10.0;
  double min_spacing = 0.1;
  std::size_t longest_points = 91;
  bool normalized = false;
};

int run_figures(const FigureOpts& o, const Global& g) {
  const auto which = pavement::parse_figure(o.which);
  pavement::FigureOptions opt;
  opt.t_end = o.t_end;
  opt.s = o.s;
  opt.min_spacing = o.min_spacing;
  opt.longest_points = o.longest_points;
  if (o.longest_points < 3) throw InvalidArgument("--longest-points must be at least 3");
  if (!(o.t_end > 0.0)) throw InvalidArgument("--t-end must be positive");
  const fs::path dir = o.out.empty() ? default_out_dir() : fs::path(o.out);
  const auto manifest = pavement::run_paper_figures(which, dir, opt, g.digits(), o.normalized);
  if (g.json_out()) {
    std::cout << manifest.dump(2) << '\n';
  } else {
    for (const auto& p : manifest["panels"]) {
      std::cout << "wrote " << (dir / p["file"].get<std::string>()).string() << '\n';
    }
    std::cout << "wrote " << (dir / (std::string(pavement::figure_name(which)) + "_manifest.json")).string()
              << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------- index

struct IndexOpts {
  std::string family = "C1w";
  std::size_t k = 0;
  double t = 0.0;
  std::string psi;
  std::string weights;
  double alpha = 0.0;
  double beta = 0.0;
  std::string obs;
  std::vector<std::string> intervals;
};

IndexInputs make_inputs(const IndexOpts& o) {
  IndexInputs in;
  in.psi = parse_list(o.psi, "--psi");
  in.weights = parse_list(o.weights, "--weights");
  in.k = o.k ? o.k : in.psi.size();
  in.t = o.t;
  if (o.alpha != 0.0) in.alpha = o.alpha;
  if (o.beta != 0.0) in.beta = o.beta;
  in.validate();
  for (auto i : in.out_of_range()) {
    std::cerr << "warning: psi" << i << " = " << in.psi[i - 1] << " is outside [0, 1]\n";
  }
  return in;
}

int run_index(const std::string& verb, const IndexOpts& o, const Global& g) {
  const int d = g.digits();
  if (verb == "eval" || verb == "seven") {
    const auto in = make_inputs(o);
    const auto fam = verb == "seven" ? Family::C2w_ab : parse_family(o.family);
    const double h = verb == "seven" ? index_seven_ab(in) : index_value(in, fam);
    if (g.json_out()) {
      std::cout << json{{"family", family_name(fam)}, {"k", in.k}, {"t", in.t}, {"H", h}}.dump(2) << '\n';
    } else {
      std::cout << num(h, d) << '\n';
    }
    return 0;
  }
  if (verb == "fit") {
    if (o.obs.empty()) throw InvalidArgument("index fit needs --obs FILE (.csv or .json)");
    auto in = open_input(o.obs);
    std::vector<Observation> obs;
    if (fs::path(o.obs).extension() == ".json") {
      try {
        obs = observations_from_json(json::parse(in));
      } catch (const json::parse_error& e) {
        throw ValidationError(o.obs + ": " + e.what());
      }
    } else {
      obs = observations_from_csv(in);
    }
    const auto r = fit_alpha_beta(obs);
    if (g.format == "text") {
      std::cout << "alpha " << num(r.alpha, d) << " beta " << num(r.beta, d) << " residual_norm "
                << num(r.residual_norm, d) << " n_obs " << r.n_obs << '\n';
    } else {
      std::cout << to_json(r).dump(2) << '\n';
    }
    return 0;
  }
  if (verb == "interval") {
    std::vector<Interval> a;
    for (const auto& s : o.intervals) {
      const auto v = parse_list(s, "--interval");
      if (v.size() != 2) throw InvalidArgument("--interval takes lo,hi");
      a.push_back({v[0], v[1]});
    }
    const auto r = dHdt_interval(a);
    if (g.json_out()) {
      std::cout << json{{"lo", r.lo}, {"hi", r.hi}}.dump(2) << '\n';
    } else {
      std::cout << '[' << num(r.lo, d) << ", " << num(r.hi, d) << "]\n";
    }
    return 0;
  }
  throw InvalidArgument("unknown index verb '" + verb + "'");
}

// ---------------------------------------------------------------- pavement

struct PavementOpts {
  std::string csv;
  std::string mix;
  std::string baseline = "0R:100VA";
  bool all = false;
};

int run_pavement(const std::string& verb, const PavementOpts& o, const Global& g) {
  std::vector<pavement::MixDesign> table;
  if (o.csv.empty()) {
    table = pavement::default_mix_table();
    for (const auto& m : table) m.validate();
  } else {
    auto in = open_input(o.csv);
    table = pavement::load_mix_table(in);
  }
  const int d = g.digits();
  if (verb == "table") {
    if (g.json_out()) {
      json rows = json::array();
      for (const auto& m : table) {
        rows.push_back({{"label", m.label},
                        {"ac_mm", m.ac_mm},
                        {"drainage_mm", m.drainage_mm ? json(*m.drainage_mm) : json(nullptr)},
                        {"subbase_mm", m.subbase_mm},
                        {"base_mm", m.base_mm},
                        {"total_mm", m.total_mm},
                        {"base_mr_mpa", m.base_mr_mpa},
                        {"reference", m.reference}});
      }
      std::cout << rows.dump(2) << '\n';
    } else {
      std::cout << std::setprecision(d);
      pavement::write_mix_table(std::cout, table);
    }
    return 0;
  }
  if (verb == "reduction") {
    const auto& base = pavement::find_mix(table, o.baseline);
    std::vector<const pavement::MixDesign*> mixes;
    if (o.all) {
      for (const auto& m : table) mixes.push_back(&m);
    } else {
      if (o.mix.empty()) throw InvalidArgument("pavement reduction needs --mix LABEL or --all");
      mixes.push_back(&pavement::find_mix(table, o.mix));
    }
    json rows = json::array();
    for (const auto* m : mixes) {
      const double r = pavement::thickness_reduction(*m, base);
      if (g.json_out()) {
        rows.push_back({{"mix", m->label}, {"baseline", base.label}, {"reduction_percent", r}});
      } else if (o.all) {
        std::cout << m->label << ' ' << num(r, d) << '\n';
      } else {
        std::cout << num(r, d) << '\n';
      }
    }
    if (g.json_out()) std::cout << (o.all ? rows : rows[0]).dump(2) << '\n';
    return 0;
  }
  throw InvalidArgument("unknown pavement verb '" + verb + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sustainability-index toolkit: closed-form PDE solutions, Riemann-Stieltjes tools, "
               "diffusion solver, weighted indices and the pavement case study"};
  app.require_subcommand(1);
  app.fallthrough();
  Global g;
  app.add_option("--precision", g.precision, "Significant digits, or 'full'")->capture_default_str();
  app.add_option("--format", g.format, "Output format")
      ->check(CLI::IsMember({"text", "json", "csv"}))
      ->capture_default_str();

  VerifyOpts vo;
  auto* verify = app.add_subcommand("verify-solutions", "Exact residual check of every closed-form family");
  verify->add_option("--k", vo.k_list, "Comma-separated dimensions")->capture_default_str();
  verify->add_option("--draws", vo.draws, "Random parameter draws per family and k")->capture_default_str();
  verify->add_option("--seed", vo.seed, "Seed for the parameter draws")->capture_default_str();

  RsOpts ro;
  std::string rs_verb;
  auto* rs = app.add_subcommand("rs", "Riemann-Stieltjes sums, integrals and variation");
  rs->add_option("verb", rs_verb, "sum | integrate | variation | bound")
      ->required()
      ->check(CLI::IsMember({"sum", "integrate", "variation", "bound"}));
  rs->add_option("--f", ro.f, "Integrand: expression in x or @table.csv")->capture_default_str();
  rs->add_option("--omega", ro.omega, "Weight: expression in x or @table.csv")->capture_default_str();
  rs->add_option("--lo", ro.lo)->capture_default_str();
  rs->add_option("--hi", ro.hi)->capture_default_str();
  rs->add_option("--n", ro.n, "Uniform partition size (sum, variation)");
  rs->add_option("--tag", ro.tag, "left | right | midpoint")->capture_default_str();
  rs->add_option("--eta", ro.eta, "Integration tolerance")->capture_default_str();
  rs->add_option("--max-refinements", ro.max_refinements)->capture_default_str();
  rs->add_option("--region", ro.region, "Region label for regional sums");

  SolveOpts so;
  auto* solve = app.add_subcommand("solve", "Run the diffusion solver on a JSON scenario");
  solve->add_option("--spec", so.spec, "Scenario JSON file")->required();
  solve->add_option("--out", so.out, "Output directory (default $SUSTAIN_OUT_DIR or ./out)");
  solve->add_flag("--normalized", so.normalized, "Add a value/(s t) column to CSV output");

  FigureOpts fo;
  auto* figures = app.add_subcommand("figures", "Run the four panels of the RAP/VA diffusion figures");
  figures->add_option("--which", fo.which, "fig4 | fig5")->required();
  figures->add_option("--out", fo.out, "Output directory (default $SUSTAIN_OUT_DIR or ./out)");
  figures->add_option("--t-end", fo.t_end)->capture_default_str();
  figures->add_option("--s", fo.s, "Boundary slope")->capture_default_str();
  figures->add_option("--min-spacing", fo.min_spacing)->capture_default_str();
  figures->add_option("--longest-points", fo.longest_points)->capture_default_str();
  figures->add_flag("--normalized", fo.normalized, "Add a value/(s t) column");

  IndexOpts io;
  std::string index_verb;
  auto* index = app.add_subcommand("index", "Weighted index evaluation and fitting");
  index->add_option("verb", index_verb, "eval | seven | fit | interval")
      ->required()
      ->check(CLI::IsMember({"eval", "seven", "fit", "interval"}));
  index->add_option("--family", io.family)->capture_default_str();
  index->add_option("--k", io.k, "Dimension (default: number of psi values)");
  index->add_option("--t", io.t)->capture_default_str();
  index->add_option("--psi", io.psi, "Comma-separated psi values");
  index->add_option("--weights", io.weights, "Comma-separated weights");
  index->add_option("--alpha", io.alpha);
  index->add_option("--beta", io.beta);
  index->add_option("--obs", io.obs, "Observations (.csv or .json) for fit");
  index->add_option("--interval", io.intervals, "lo,hi (repeat once per factor)");

  PavementOpts po;
  std::string pavement_verb;
  auto* pave = app.add_subcommand("pavement", "Pavement mix-design table and thickness reductions");
  pave->add_option("verb", pavement_verb, "table | reduction")
      ->required()
      ->check(CLI::IsMember({"table", "reduction"}));
  pave->add_option("--csv", po.csv, "Mix table CSV (default: embedded table)");
  pave->add_option("--mix", po.mix);
  pave->add_option("--baseline", po.baseline)->capture_default_str();
  pave->add_flag("--all", po.all, "Reductions for every row");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    g.digits();
    if (*verify) return run_verify(vo, g);
    if (*rs) return run_rs(rs_verb, ro, g);
    if (*solve) return run_solve(so, g);
    if (*figures) return run_figures(fo, g);
    if (*index) return run_index(index_verb, io, g);
    if (*pave) return run_pavement(pavement_verb, po, g);
  } catch (const sustain::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
