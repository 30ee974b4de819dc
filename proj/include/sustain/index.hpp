#pragma once

// Weighted sustainability index evaluation, least-squares fitting of the
// (alpha, beta) pair and the interval form of dH/dt.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <istream>
#include <optional>
#include <span>
#include <tuple>
#include <string>
#include <vector>

#include <json.hpp>

#include "sustain/csv.hpp"
#include "sustain/error.hpp"
#include "sustain/rs_integral.hpp"
#include "sustain/solutions.hpp"

namespace sustain {

// Factor values psi_1..psi_k and weights W_1..W_k at time t.
struct IndexInputs {
  std::size_t k = 0;
  double t = 0.0;
  std::vector<double> psi;
  std::vector<double> weights;
  std::optional<double> alpha;
  std::optional<double> beta;

  void validate() const {
    if (k < 1) throw InvalidArgument("index needs k >= 1");
    if (psi.size() != k) {
      throw InvalidArgument("expected " + std::to_string(k) + " psi values, got " +
                            std::to_string(psi.size()));
    }
    if (!weights.empty() && weights.size() != k) {
      throw InvalidArgument("expected " + std::to_string(k) + " weights, got " +
                            std::to_string(weights.size()));
    }
    if (!std::all_of(weights.begin(), weights.end(), [](double w) { return w > 0.0; })) {
      throw InvalidArgument("weights must be strictly positive");
    }
  }

  // Indices of psi values outside the conventional [0, 1] range. They are
  // accepted; callers decide whether to warn.
  std::vector<std::size_t> out_of_range() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < psi.size(); ++i) {
      if (psi[i] < 0.0 || psi[i] > 1.0) out.push_back(i + 1);
    }
    return out;
  }
};

// The seven factors, in psi order.
struct FactorVariable {
  const char* name;
  const char* description;
};

inline constexpr FactorVariable kSevenFactors[] = {
    {"food and agriculture", "proportion of food yield to arable land"},
    {"climate and environment", "proportion of people living with clean air, clean water and normal climate"},
    {"population and economics", "proportion above multidimensional poverty lines and proportion of skilled population"},
    {"political situation", "duration of stable political conditions for the population or region"},
    {"medical technology", "proportion of people within reach of best medical treatment"},
    {"energy", "proportion of sectors and population with sufficient electricity"},
    {"science and technology", "level of basic research and available technology"},
};

namespace detail {

inline double ipow(double x, std::size_t n) {
  double r = 1.0;
  for (std::size_t i = 0; i < n; ++i) r *= x;
  return r;
}

struct IndexSums {
  double w_sum = 0.0;
  double w_prod = 1.0;
  double psi_pow_sum = 0.0;    // sum psi_i^k
  double psi_prod = 1.0;       // prod psi_i
  double w_psi_pow_sum = 0.0;  // sum W_i psi_i^k
  double w_psi_prod = 1.0;     // prod W_i psi_i
};

inline IndexSums index_sums(const IndexInputs& in) {
  IndexSums s;
  for (std::size_t i = 0; i < in.k; ++i) {
    const double p = in.psi[i];
    const double pk = ipow(p, in.k);
    s.psi_pow_sum += pk;
    s.psi_prod *= p;
    if (!in.weights.empty()) {
      const double w = in.weights[i];
      s.w_sum += w;
      s.w_prod *= w;
      s.w_psi_pow_sum += w * pk;
      s.w_psi_prod *= w * p;
    }
  }
  return s;
}

}  // namespace detail

// H(t, psi) for the given closed form, evaluated directly from the inputs.
inline double index_value(const IndexInputs& in, Family family) {
  in.validate();
  const auto name = std::string(family_name(family));
  if (in.k < min_dimension(family)) {
    throw InvalidArgument(name + " needs k >= " + std::to_string(min_dimension(family)));
  }
  if (uses_weights(family) && in.weights.empty()) throw InvalidArgument(name + " needs weights");
  if (uses_alpha_beta(family)) {
    if (!in.alpha || !in.beta) throw InvalidArgument(name + " needs alpha and beta");
    if (!(*in.alpha > 0.0 && *in.beta > 0.0)) throw InvalidArgument(name + " needs alpha, beta > 0");
  }
  const auto s = detail::index_sums(in);
  const double k = static_cast<double>(in.k);
  const double kf = factorial(in.k);
  const double t = in.t;
  double sq = 0.0;
  for (double p : in.psi) sq += p * p;

  switch (family) {
    case Family::T1a: return k * t + 0.5 * sq;
    case Family::T1b: return 2.0 * k * t + sq;
    case Family::T2a: return (k + 1.0) * t + s.psi_pow_sum / kf + s.psi_prod;
    case Family::T2b: return (kf * k + 1.0) * t + s.psi_pow_sum + s.psi_prod;
    case Family::C_ab: {
      const double a = *in.alpha;
      const double b = *in.beta;
      return (k * a * kf + b) * t + a * s.psi_pow_sum + b * s.psi_prod;
    }
    case Family::T3w:
      return (kf * s.w_sum + s.w_prod) * t + s.w_psi_pow_sum + s.w_psi_prod;
    case Family::C1w:
      return (s.w_sum + s.w_prod) * t + s.w_psi_pow_sum / kf + s.w_psi_prod;
    case Family::C2w_ab: {
      const double a = *in.alpha;
      const double b = *in.beta;
      return (a * kf * s.w_sum + b * s.w_prod) * t + a * s.w_psi_pow_sum + b * s.w_psi_prod;
    }
  }
  throw InvalidArgument("unhandled solution family");
}

// Seven-factor index with the alpha, beta pair:
// (alpha 7! sum W + beta prod W) t + alpha sum W_i psi_i^7 + beta prod W_i psi_i.
inline double index_seven_ab(const IndexInputs& in) {
  if (in.k != 7) throw InvalidArgument("the seven-factor index needs k = 7, got k = " + std::to_string(in.k));
  return index_value(in, Family::C2w_ab);
}

struct Observation {
  IndexInputs inputs;
  double observed = 0.0;
};

struct FitResult {
  double alpha = 0.0;
  double beta = 0.0;
  double residual_norm = 0.0;
  std::size_t n_obs = 0;
};

// Basis of H = alpha u + beta v:
//   u = k! sum W t + sum W_i psi_i^k,  v = prod W t + prod W_i psi_i.
inline std::pair<double, double> alpha_beta_basis(const IndexInputs& in) {
  in.validate();
  if (in.weights.empty()) throw InvalidArgument("fitting needs weights for every observation");
  if (in.k < 2) throw InvalidArgument("fitting needs k >= 2");
  const auto s = detail::index_sums(in);
  return {factorial(in.k) * s.w_sum * in.t + s.w_psi_pow_sum, s.w_prod * in.t + s.w_psi_prod};
}

// Least squares for (alpha, beta) via column-scaled 2x2 normal equations.
inline FitResult fit_alpha_beta(std::span<const Observation> obs) {
  if (obs.size() < 2) {
    throw InvalidArgument("fitting needs at least 2 observations, got " + std::to_string(obs.size()));
  }
  std::vector<double> u(obs.size()), v(obs.size());
  double uu = 0.0, vv = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    std::tie(u[i], v[i]) = alpha_beta_basis(obs[i].inputs);
    uu += u[i] * u[i];
    vv += v[i] * v[i];
  }
  const double su = std::sqrt(uu);
  const double sv = std::sqrt(vv);
  if (!(su > 0.0) || !(sv > 0.0)) throw RankDeficiencyError("design matrix has a zero column");

  double c = 0.0, ry = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double un = u[i] / su;
    const double vn = v[i] / sv;
    c += un * vn;
    ry += un * obs[i].observed;
    sy += vn * obs[i].observed;
  }
  const double det = 1.0 - c * c;
  if (det < 1e-12) {
    throw RankDeficiencyError("observations are proportional in (u, v); alpha and beta are not identifiable");
  }
  const double a_scaled = (ry - c * sy) / det;
  const double b_scaled = (sy - c * ry) / det;

  FitResult r;
  r.alpha = a_scaled / su;
  r.beta = b_scaled / sv;
  r.n_obs = obs.size();
  double rss = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const double e = obs[i].observed - (r.alpha * u[i] + r.beta * v[i]);
    rss += e * e;
  }
  r.residual_norm = std::sqrt(rss);
  return r;
}

inline nlohmann::json to_json(const FitResult& r) {
  return {{"alpha", r.alpha}, {"beta", r.beta}, {"residual_norm", r.residual_norm}, {"n_obs", r.n_obs}};
}

// Columns t, psi1..psik, omega1..omegak, H_obs.
inline std::vector<Observation> observations_from_csv(std::istream& in) {
  const auto table = csv::read(in);
  const auto& h = table.header;
  if (h.size() < 6 || (h.size() - 2) % 2 != 0) {
    throw ValidationError("observation CSV needs columns t, psi1..psik, omega1..omegak, H_obs");
  }
  const std::size_t k = (h.size() - 2) / 2;
  const auto t_col = table.column("t");
  const auto h_col = table.column("H_obs");
  std::vector<std::size_t> psi_cols, w_cols;
  for (std::size_t i = 1; i <= k; ++i) {
    psi_cols.push_back(table.column("psi" + std::to_string(i)));
    w_cols.push_back(table.column("omega" + std::to_string(i)));
  }
  std::vector<Observation> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto line = table.line_numbers[r];
    Observation o;
    o.inputs.k = k;
    o.inputs.t = csv::to_double(row[t_col], line);
    for (std::size_t i = 0; i < k; ++i) {
      o.inputs.psi.push_back(csv::to_double(row[psi_cols[i]], line));
      o.inputs.weights.push_back(csv::to_double(row[w_cols[i]], line));
    }
    o.observed = csv::to_double(row[h_col], line);
    o.inputs.validate();
    out.push_back(std::move(o));
  }
  return out;
}

// [{"t": 0.5, "psi": [...], "weights": [...], "H": 12.0}, ...]
inline std::vector<Observation> observations_from_json(const nlohmann::json& j) {
  try {
    std::vector<Observation> out;
    for (const auto& item : j) {
      Observation o;
      o.inputs.t = item.at("t").get<double>();
      o.inputs.psi = item.at("psi").get<std::vector<double>>();
      o.inputs.weights = item.at("weights").get<std::vector<double>>();
      o.inputs.k = o.inputs.psi.size();
      o.observed = item.at("H").get<double>();
      o.inputs.validate();
      out.push_back(std::move(o));
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed observation JSON: ") + e.what());
  }
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  static Interval point(double x) { return {x, x}; }

  void validate() const {
    if (!std::isfinite(lo) || !std::isfinite(hi)) throw InvalidArgument("interval endpoints must be finite");
    if (lo > hi) {
      throw InvalidArgument("interval [" + std::to_string(lo) + ", " + std::to_string(hi) +
                            "] has lo > hi");
    }
  }

  bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }

  friend Interval operator+(Interval a, Interval b) { return {a.lo + b.lo, a.hi + b.hi}; }

  friend Interval operator*(Interval a, Interval b) {
    const double p[] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
    return {*std::min_element(std::begin(p), std::end(p)), *std::max_element(std::begin(p), std::end(p))};
  }

  friend bool operator==(const Interval&, const Interval&) = default;
};

// Range of dH/dt = sum W_j + prod W_j when each W_j only known to lie in A_j.
inline Interval dHdt_interval(std::span<const Interval> a) {
  if (a.size() < 2) throw InvalidArgument("need at least 2 intervals, got " + std::to_string(a.size()));
  for (const auto& x : a) x.validate();
  Interval sum = a[0];
  Interval prod = a[0];
  for (std::size_t j = 1; j < a.size(); ++j) {
    sum = sum + a[j];
    prod = prod * a[j];
  }
  return sum + prod;
}

// Scalar weight from a weight function: the R-S integral of an importance
// density F against Omega, divided by the interval length.
inline double normalized_weight(const Integrand& density, const WeightFunction& omega, double lo,
                                double hi, double eta = 1e-8) {
  return rs_integrate(density, omega, lo, hi, eta) / (hi - lo);
}

}  // namespace sustain
