#pragma once

// Riemann-Stieltjes sums over tagged partitions, refinement-based integration,
// and the total variation of weight functions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sustain/error.hpp"

namespace sustain {

enum class TagRule { Left, Right, Midpoint };

inline TagRule parse_tag_rule(const std::string& s) {
  if (s == "left") return TagRule::Left;
  if (s == "right") return TagRule::Right;
  if (s == "midpoint" || s == "mid") return TagRule::Midpoint;
  throw InvalidArgument("unknown tag rule '" + s + "' (expected left, right or midpoint)");
}

// Breakpoints x_0 < ... < x_g on [lo, hi] with one tag t_i in each [x_{i-1}, x_i].
struct TaggedPartition {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> breakpoints;
  std::vector<double> tags;
  std::optional<int> region_id;

  std::size_t intervals() const { return tags.size(); }

  void validate() const {
    if (!(lo < hi)) throw InvalidArgument("partition interval must satisfy lo < hi");
    if (breakpoints.size() < 2) throw InvalidArgument("partition needs at least one interval");
    if (tags.size() + 1 != breakpoints.size()) {
      throw InvalidArgument("partition has " + std::to_string(tags.size()) + " tags for " +
                            std::to_string(breakpoints.size() - 1) + " intervals");
    }
    if (breakpoints.front() != lo || breakpoints.back() != hi) {
      throw InvalidArgument("partition breakpoints must start at lo and end at hi");
    }
    for (std::size_t i = 1; i < breakpoints.size(); ++i) {
      if (!(breakpoints[i - 1] < breakpoints[i])) {
        throw InvalidArgument("partition breakpoints must be strictly increasing");
      }
      if (!(breakpoints[i - 1] <= tags[i - 1] && tags[i - 1] <= breakpoints[i])) {
        throw InvalidArgument("tag " + std::to_string(i) + " lies outside its subinterval");
      }
    }
  }
};

inline TaggedPartition make_uniform_partition(double lo, double hi, std::size_t n, TagRule rule) {
  if (!(lo < hi)) throw InvalidArgument("uniform partition needs lo < hi");
  if (n == 0) throw InvalidArgument("uniform partition needs at least one interval");
  TaggedPartition p;
  p.lo = lo;
  p.hi = hi;
  p.breakpoints.resize(n + 1);
  p.tags.resize(n);
  const double h = (hi - lo) / static_cast<double>(n);
  for (std::size_t i = 0; i <= n; ++i) p.breakpoints[i] = lo + h * static_cast<double>(i);
  p.breakpoints.back() = hi;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = p.breakpoints[i];
    const double b = p.breakpoints[i + 1];
    switch (rule) {
      case TagRule::Left: p.tags[i] = a; break;
      case TagRule::Right: p.tags[i] = b; break;
      case TagRule::Midpoint: p.tags[i] = 0.5 * (a + b); break;
    }
  }
  return p;
}

// A bounded real function on [lo, hi]. Used both as the integrand F and as
// the integrator (weight) Omega.
class WeightFunction {
 public:
  using Evaluator = std::function<double(double)>;

  WeightFunction(double lo, double hi, Evaluator f, std::string label = {},
                 std::optional<int> region_id = std::nullopt)
      : lo_(lo), hi_(hi), f_(std::move(f)), label_(std::move(label)), region_(region_id) {
    if (!(lo < hi)) throw InvalidArgument("weight function domain must satisfy lo < hi");
    if (!f_) throw InvalidArgument("weight function has no evaluator");
    constexpr int kSamples = 257;
    for (int i = 0; i < kSamples; ++i) {
      (*this)(lo + (hi - lo) * i / (kSamples - 1));
    }
  }

  double operator()(double x) const {
    const double v = f_(x);
    if (!std::isfinite(v)) {
      throw NonFiniteError("function '" + label_ + "' is not finite at x = " + std::to_string(x));
    }
    return v;
  }

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  const std::string& label() const { return label_; }
  std::optional<int> region_id() const { return region_; }

  // Same evaluator on a different interval or region.
  WeightFunction restricted(double lo, double hi) const {
    return WeightFunction(lo, hi, f_, label_, region_);
  }
  WeightFunction with_region(std::optional<int> region) const {
    auto w = *this;
    w.region_ = region;
    return w;
  }

 private:
  double lo_;
  double hi_;
  Evaluator f_;
  std::string label_;
  std::optional<int> region_;
};

using Integrand = WeightFunction;

// Piecewise-linear interpolant through (x, value) samples, constant beyond the ends.
inline WeightFunction tabulated_function(std::vector<std::pair<double, double>> samples,
                                         std::string label = "table") {
  if (samples.size() < 2) throw ValidationError("function table needs at least two samples");
  std::sort(samples.begin(), samples.end());
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (samples[i].first == samples[i - 1].first) {
      throw ValidationError("function table has duplicate x = " + std::to_string(samples[i].first));
    }
  }
  for (const auto& [x, y] : samples) {
    if (!std::isfinite(x) || !std::isfinite(y)) throw ValidationError("function table has non-finite entries");
  }
  const double lo = samples.front().first;
  const double hi = samples.back().first;
  auto eval = [s = std::move(samples)](double x) {
    if (x <= s.front().first) return s.front().second;
    if (x >= s.back().first) return s.back().second;
    auto it = std::upper_bound(s.begin(), s.end(), x,
                               [](double v, const std::pair<double, double>& p) { return v < p.first; });
    const auto& [x1, y1] = *it;
    const auto& [x0, y0] = *(it - 1);
    return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
  };
  return WeightFunction(lo, hi, std::move(eval), std::move(label));
}

namespace detail {

inline bool same_endpoint(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

inline void check_domain(const WeightFunction& f, const TaggedPartition& p, const char* role) {
  if (!same_endpoint(f.lo(), p.lo) || !same_endpoint(f.hi(), p.hi)) {
    throw InvalidArgument(std::string(role) + " '" + f.label() + "' is defined on [" +
                          std::to_string(f.lo()) + ", " + std::to_string(f.hi()) +
                          "] but the partition covers [" + std::to_string(p.lo) + ", " +
                          std::to_string(p.hi) + "]");
  }
}

inline void check_covers(const WeightFunction& f, double lo, double hi, const char* role) {
  const bool lo_ok = f.lo() <= lo || same_endpoint(f.lo(), lo);
  const bool hi_ok = hi <= f.hi() || same_endpoint(f.hi(), hi);
  if (!lo_ok || !hi_ok) {
    throw InvalidArgument(std::string(role) + " '" + f.label() + "' is defined on [" +
                          std::to_string(f.lo()) + ", " + std::to_string(f.hi()) +
                          "], which does not cover [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "]");
  }
}

inline void check_region(const WeightFunction& f, const TaggedPartition& p) {
  if (f.region_id() && p.region_id && *f.region_id() != *p.region_id) {
    throw InvalidArgument("region mismatch: '" + f.label() + "' belongs to region " +
                          std::to_string(*f.region_id()) + ", partition to region " +
                          std::to_string(*p.region_id));
  }
}

}  // namespace detail

// sum_i F(t_i) [Omega(x_i) - Omega(x_{i-1})]. A region-labelled partition
// gives the regional sum; the computation is the same.
inline double rs_sum(const Integrand& f, const WeightFunction& omega, const TaggedPartition& p) {
  p.validate();
  detail::check_domain(f, p, "integrand");
  detail::check_domain(omega, p, "weight");
  detail::check_region(f, p);
  detail::check_region(omega, p);
  double sum = 0.0;
  double prev = omega(p.breakpoints[0]);
  for (std::size_t i = 0; i < p.intervals(); ++i) {
    const double next = omega(p.breakpoints[i + 1]);
    sum += f(p.tags[i]) * (next - prev);
    prev = next;
  }
  return sum;
}

struct RsIntegral {
  double value = 0.0;
  unsigned levels = 0;         // dyadic refinement level of the returned sum (2^levels intervals)
  double last_change = 0.0;    // |S_m - S_{m-1}|
  double tag_spread = 0.0;     // max minus min attainable sum over tag choices, estimated
  double sup_abs_f = 0.0;      // sup |F| over the finest grid (breakpoints and midpoints)
};

inline constexpr unsigned kDefaultMaxRefinements = 24;
inline constexpr double kSpreadContraction = 0.75;

// Dyadic midpoint refinement of [lo, hi]. Level m uses 2^m intervals.
// Stops once successive midpoint sums differ by less than eta and the tag
// spread (how far the sum can move under other tag choices, estimated from F
// at both endpoints and the midpoint of each subinterval) is either below
// eta or contracting by at least kSpreadContraction per level. A pair sharing
// a discontinuity keeps a spread that does not shrink, so refinement runs out
// and ConvergenceError is thrown.
inline RsIntegral rs_integrate_detailed(const Integrand& f, const WeightFunction& omega, double lo,
                                        double hi, double eta,
                                        unsigned max_refinements = kDefaultMaxRefinements) {
  if (!(eta > 0.0)) throw InvalidArgument("eta must be positive");
  if (!(lo < hi)) throw InvalidArgument("integration interval must satisfy lo < hi");
  if (max_refinements > 30) throw InvalidArgument("max_refinements must be at most 30");
  detail::check_covers(f, lo, hi, "integrand");
  detail::check_covers(omega, lo, hi, "weight");

  auto level_sum = [&](unsigned m, RsIntegral& out) {
    const std::size_t n = std::size_t{1} << m;
    const double h = (hi - lo) / static_cast<double>(n);
    double sum = 0.0;
    double spread = 0.0;
    double sup = 0.0;
    double x_prev = lo;
    double w_prev = omega(lo);
    double f_prev = f(lo);
    sup = std::abs(f_prev);
    for (std::size_t i = 1; i <= n; ++i) {
      const double x = (i == n) ? hi : lo + h * static_cast<double>(i);
      const double w = omega(x);
      const double fx = f(x);
      const double fm = f(0.5 * (x_prev + x));
      const double dw = w - w_prev;
      sum += fm * dw;
      spread += (std::max({f_prev, fm, fx}) - std::min({f_prev, fm, fx})) * std::abs(dw);
      sup = std::max({sup, std::abs(fm), std::abs(fx)});
      x_prev = x;
      w_prev = w;
      f_prev = fx;
    }
    out.value = sum;
    out.tag_spread = spread;
    out.sup_abs_f = sup;
    out.levels = m;
  };

  RsIntegral current;
  level_sum(0, current);
  for (unsigned m = 1; m <= max_refinements; ++m) {
    RsIntegral next;
    level_sum(m, next);
    next.last_change = std::abs(next.value - current.value);
    const bool spread_ok =
        0.5 * next.tag_spread < eta || next.tag_spread <= kSpreadContraction * current.tag_spread;
    current = next;
    if (current.last_change < eta && spread_ok) return current;
  }
  std::ostringstream msg;
  msg << "Riemann-Stieltjes sums of '" << f.label() << "' against '" << omega.label()
      << "' did not settle within eta = " << eta << " after " << max_refinements
      << " refinements (last change " << current.last_change << ", tag spread " << current.tag_spread
      << "); the pair may not be integrable";
  throw ConvergenceError(msg.str());
}

inline double rs_integrate(const Integrand& f, const WeightFunction& omega, double lo, double hi,
                           double eta, unsigned max_refinements = kDefaultMaxRefinements) {
  return rs_integrate_detailed(f, omega, lo, hi, eta, max_refinements).value;
}

// sum_i |Omega(x_i) - Omega(x_{i-1})| over the partition's breakpoints.
inline double total_variation(const WeightFunction& omega, const TaggedPartition& p) {
  p.validate();
  detail::check_domain(omega, p, "weight");
  double v = 0.0;
  double prev = omega(p.breakpoints[0]);
  for (std::size_t i = 1; i < p.breakpoints.size(); ++i) {
    const double next = omega(p.breakpoints[i]);
    v += std::abs(next - prev);
    prev = next;
  }
  return v;
}

inline constexpr unsigned kDefaultVariationLevels = 20;

struct VariationEstimate {
  double value = 0.0;      // running max over levels 0..levels
  unsigned levels = 0;
  bool monotone = true;    // variation equals |Omega(hi) - Omega(lo)| on the finest grid
};

// Sup of the partition variation over dyadic partitions up to 2^max_refinements
// intervals. Nested partitions make the sequence non-decreasing; the running
// max absorbs rounding.
inline VariationEstimate variation_sup_detailed(const WeightFunction& omega, double lo, double hi,
                                                unsigned max_refinements = kDefaultVariationLevels) {
  if (!(lo < hi)) throw InvalidArgument("variation interval must satisfy lo < hi");
  if (max_refinements > 30) throw InvalidArgument("max_refinements must be at most 30");
  detail::check_covers(omega, lo, hi, "weight");
  VariationEstimate est;
  const double w_lo = omega(lo);
  const double w_hi = omega(hi);
  double finest = 0.0;
  for (unsigned m = 0; m <= max_refinements; ++m) {
    const std::size_t n = std::size_t{1} << m;
    const double h = (hi - lo) / static_cast<double>(n);
    double v = 0.0;
    double prev = w_lo;
    for (std::size_t i = 1; i <= n; ++i) {
      const double w = (i == n) ? w_hi : omega(lo + h * static_cast<double>(i));
      v += std::abs(w - prev);
      prev = w;
    }
    est.value = std::max(est.value, v);
    finest = v;
  }
  est.levels = max_refinements;
  const double net = std::abs(w_hi - w_lo);
  est.monotone = finest - net <= 1e-12 * std::max(1.0, finest);
  return est;
}

inline double variation_sup(const WeightFunction& omega, double lo, double hi,
                            unsigned max_refinements = kDefaultVariationLevels) {
  return variation_sup_detailed(omega, lo, hi, max_refinements).value;
}

struct LowerBoundReport {
  double lhs = 0.0;          // variation sup estimate of Omega
  double rhs = 0.0;          // |integral F dOmega| / sup |F|, or 0 when sup |F| = 0
  double integral = 0.0;
  double sup_abs_f = 0.0;
  bool holds = true;
  bool vacuous = false;      // sup |F| = 0: the bound is undefined and reported as holding
  bool omega_monotone = true;
};

// Checks Var(Omega) >= |int F dOmega| / sup|F|. sup|F| is taken over the grid of
// the integration's final level and the variation is refined at least that
// far, so the comparison is made on nested partitions.
inline LowerBoundReport variation_lower_bound_check(const Integrand& f, const WeightFunction& omega,
                                                    double lo, double hi, double eta = 1e-6,
                                                    unsigned max_refinements = kDefaultMaxRefinements) {
  LowerBoundReport r;
  const auto integral = rs_integrate_detailed(f, omega, lo, hi, eta, max_refinements);
  const auto var = variation_sup_detailed(omega, lo, hi,
                                          std::max(integral.levels, kDefaultVariationLevels));
  r.integral = integral.value;
  r.sup_abs_f = integral.sup_abs_f;
  r.lhs = var.value;
  r.omega_monotone = var.monotone;
  if (r.sup_abs_f == 0.0) {
    r.vacuous = true;
    r.rhs = 0.0;
    r.holds = true;
    return r;
  }
  r.rhs = std::abs(r.integral) / r.sup_abs_f;
  r.holds = r.lhs >= r.rhs - 1e-12 * std::max(1.0, r.rhs);
  return r;
}

}  // namespace sustain
