#pragma once

// Explicit forward-time, centred-space solver for H_t = sum_i H_{psi_i psi_i}
// on rectangular lattices with Dirichlet data on every face.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sustain/error.hpp"
#include "sustain/expression.hpp"

namespace sustain {

// Dense row-major lattice of H values; the last axis varies fastest.
struct ScalarField {
  std::vector<std::size_t> extents;
  std::vector<double> spacings;
  std::vector<double> origin;
  std::vector<double> values;
  double time = 0.0;

  std::size_t dimension() const { return extents.size(); }
  std::size_t size() const { return values.size(); }

  std::vector<std::size_t> strides() const {
    std::vector<std::size_t> s(extents.size(), 1);
    for (std::size_t a = extents.size(); a-- > 1;) s[a - 1] = s[a] * extents[a];
    return s;
  }

  std::size_t flat_index(std::span<const std::size_t> idx) const {
    std::size_t f = 0;
    for (std::size_t a = 0; a < extents.size(); ++a) f = f * extents[a] + idx[a];
    return f;
  }

  std::vector<std::size_t> multi_index(std::size_t flat) const {
    std::vector<std::size_t> idx(extents.size());
    for (std::size_t a = extents.size(); a-- > 0;) {
      idx[a] = flat % extents[a];
      flat /= extents[a];
    }
    return idx;
  }

  double coordinate(std::size_t axis, std::size_t i) const {
    return origin[axis] + spacings[axis] * static_cast<double>(i);
  }

  std::vector<double> coordinates(std::size_t flat) const {
    auto idx = multi_index(flat);
    std::vector<double> x(idx.size());
    for (std::size_t a = 0; a < idx.size(); ++a) x[a] = coordinate(a, idx[a]);
    return x;
  }

  bool is_boundary(std::size_t flat) const {
    auto idx = multi_index(flat);
    for (std::size_t a = 0; a < idx.size(); ++a) {
      if (idx[a] == 0 || idx[a] + 1 == extents[a]) return true;
    }
    return false;
  }

  double at(std::span<const std::size_t> idx) const { return values[flat_index(idx)]; }

  void validate() const {
    const auto k = extents.size();
    if (k == 0) throw InvalidArgument("field has no axes");
    if (spacings.size() != k || origin.size() != k) {
      throw InvalidArgument("field metadata has inconsistent dimension");
    }
    std::size_t n = 1;
    for (std::size_t a = 0; a < k; ++a) {
      if (extents[a] < 3) throw InvalidArgument("every axis needs at least 3 points");
      if (!(spacings[a] > 0.0)) throw InvalidArgument("grid spacings must be positive");
      n *= extents[a];
    }
    if (values.size() != n) {
      throw InvalidArgument("field holds " + std::to_string(values.size()) + " values, expected " +
                            std::to_string(n));
    }
  }
};

using BoundaryRule = std::function<double(std::span<const double> coords, double t)>;
using InitialRule = std::function<double(std::span<const double> coords)>;

// Largest accepted explicit step: 0.9 / (2 sum_i 1/h_i^2).
inline double stable_dt(std::span<const double> spacings) {
  double s = 0.0;
  for (double h : spacings) s += 1.0 / (h * h);
  return 0.9 / (2.0 * s);
}

namespace detail {

inline void check_dt(const ScalarField& f, double dt) {
  if (!(dt > 0.0)) throw StabilityError("time step must be positive");
  const double limit = stable_dt(f.spacings);
  if (dt > limit * (1.0 + 1e-12)) {
    throw StabilityError("time step " + std::to_string(dt) + " exceeds the stability bound " +
                         std::to_string(limit));
  }
}

// Interior update of one lattice line along the last axis. Returns true if
// any new value is NaN or infinite.
template <std::size_t K>
inline bool interior_line(const double* u, double* v, std::size_t base, std::size_t line_len,
                            const std::size_t* strides, const double* inv_h2, double dt) {
  bool bad = false;
  for (std::size_t j = 1; j + 1 < line_len; ++j) {
    const std::size_t p = base + j;
    double lap = 0.0;
    for (std::size_t a = 0; a < K; ++a) {
      lap += (u[p + strides[a]] - 2.0 * u[p] + u[p - strides[a]]) * inv_h2[a];
    }
    const double next = u[p] + dt * lap;
    v[p] = next;
  }
  for (std::size_t j = 1; j + 1 < line_len; ++j) {
    bad |= !std::isfinite(v[base + j]);
  }
  return bad;
}

// Writes the FTCS update of `in` into `out` (same shape), then overwrites the
// boundary with rule(x, new_time).
inline void advance(const ScalarField& in, ScalarField& out, const BoundaryRule& rule, double dt,
                    double new_time) {
  const auto k = in.dimension();
  const auto strides = in.strides();
  std::vector<double> inv_h2(k);
  for (std::size_t a = 0; a < k; ++a) inv_h2[a] = 1.0 / (in.spacings[a] * in.spacings[a]);

  const std::size_t last = k - 1;
  const std::size_t line_len = in.extents[last];
  const std::size_t lines = in.size() / line_len;
  const double* u = in.values.data();
  double* v = out.values.data();

  std::vector<std::size_t> outer(k, 0);  // index of the current line; outer[last] unused
  std::vector<double> x(k);
  bool bad = false;

  auto set_boundary = [&](std::size_t base, std::size_t j) {
    for (std::size_t a = 0; a < last; ++a) x[a] = in.coordinate(a, outer[a]);
    x[last] = in.coordinate(last, j);
    v[base + j] = rule(x, new_time);
    if (!std::isfinite(v[base + j])) bad = true;
  };

  for (std::size_t line = 0; line < lines; ++line) {
    const std::size_t base = line * line_len;
    bool face = false;
    for (std::size_t a = 0; a < last; ++a) {
      if (outer[a] == 0 || outer[a] + 1 == in.extents[a]) face = true;
    }
    if (face) {
      for (std::size_t j = 0; j < line_len; ++j) set_boundary(base, j);
    } else {
      switch (k) {
        case 1: bad |= interior_line<1>(u, v, base, line_len, strides.data(), inv_h2.data(), dt); break;
        case 2: bad |= interior_line<2>(u, v, base, line_len, strides.data(), inv_h2.data(), dt); break;
        case 3: bad |= interior_line<3>(u, v, base, line_len, strides.data(), inv_h2.data(), dt); break;
        default: throw InvalidArgument("solver supports 1 to 3 dimensions");
      }
      set_boundary(base, 0);
      set_boundary(base, line_len - 1);
    }
    for (std::size_t a = last; a-- > 0;) {
      if (++outer[a] < in.extents[a]) break;
      outer[a] = 0;
    }
  }
  if (bad) {
    throw NonFiniteError("non-finite value produced by the time step ending at t = " +
                         std::to_string(new_time));
  }
  out.time = new_time;
}

}  // namespace detail

// One forward-time, centred-space step. Boundary nodes take rule(x, t + dt).
inline ScalarField step_explicit(const ScalarField& field, const BoundaryRule& rule, double dt) {
  field.validate();
  detail::check_dt(field, dt);
  ScalarField out = field;
  detail::advance(field, out, rule, dt, field.time + dt);
  return out;
}

struct ScenarioSpec {
  std::vector<std::pair<double, double>> domain;  // per-axis [lo, hi]
  std::vector<std::size_t> resolution;            // per-axis point count
  BoundaryRule boundary;
  InitialRule initial;
  double s = 10.0;                                // boundary slope, H = s t on the faces
  double t_end = 1.0;
  std::optional<double> dt;                       // nullopt: stable_dt of the lattice
  std::string boundary_text;                      // source expressions, when read from JSON
  std::string initial_text;

  void validate() const {
    const auto k = domain.size();
    if (k < 1 || k > 3) throw InvalidArgument("scenario dimension must be 1, 2 or 3");
    if (resolution.size() != k) throw InvalidArgument("resolution needs one entry per axis");
    for (std::size_t a = 0; a < k; ++a) {
      if (!(domain[a].first < domain[a].second)) {
        throw InvalidArgument("domain axis " + std::to_string(a + 1) + " must satisfy lo < hi");
      }
      if (resolution[a] < 3) throw InvalidArgument("resolution must be at least 3 per axis");
    }
    if (!(t_end > 0.0)) throw InvalidArgument("t_end must be positive");
    if (!boundary || !initial) throw InvalidArgument("scenario needs boundary and initial rules");
    if (dt && !(*dt > 0.0)) throw InvalidArgument("dt must be positive");
  }

  std::vector<double> spacings() const {
    std::vector<double> h(domain.size());
    for (std::size_t a = 0; a < domain.size(); ++a) {
      h[a] = (domain[a].second - domain[a].first) / static_cast<double>(resolution[a] - 1);
    }
    return h;
  }
};

// Points per axis for a given count on the longest axis, with the other axes
// chosen so spacings are as equal as the integer counts allow.
inline std::vector<std::size_t> equalized_resolution(
    std::span<const std::pair<double, double>> domain, std::size_t longest_points) {
  if (longest_points < 3) throw InvalidArgument("need at least 3 points on the longest axis");
  double longest = 0.0;
  for (const auto& [lo, hi] : domain) longest = std::max(longest, hi - lo);
  const double h = longest / static_cast<double>(longest_points - 1);
  std::vector<std::size_t> n;
  for (const auto& [lo, hi] : domain) {
    n.push_back(std::max<std::size_t>(3, static_cast<std::size_t>(std::lround((hi - lo) / h)) + 1));
  }
  return n;
}

// Lattice at t = 0: initial rule inside, boundary rule at t = 0 on the faces.
inline ScalarField initial_field(const ScenarioSpec& spec) {
  spec.validate();
  ScalarField f;
  const auto k = spec.domain.size();
  f.extents = spec.resolution;
  f.spacings = spec.spacings();
  for (std::size_t a = 0; a < k; ++a) f.origin.push_back(spec.domain[a].first);
  std::size_t n = 1;
  for (auto e : f.extents) n *= e;
  f.values.resize(n);
  for (std::size_t p = 0; p < n; ++p) {
    const auto x = f.coordinates(p);
    f.values[p] = f.is_boundary(p) ? spec.boundary(x, 0.0) : spec.initial(x);
    if (!std::isfinite(f.values[p])) throw NonFiniteError("initial data is not finite");
  }
  f.time = 0.0;
  return f;
}

struct ScenarioRun {
  std::vector<ScalarField> snapshots;     // one per requested time, in request order
  std::vector<double> requested_times;
  double dt = 0.0;
  std::size_t steps = 0;
  double final_time = 0.0;
};

// Advances from t = 0 to t_end in steps of dt (a shorter final step lands on
// t_end exactly). Each snapshot is the field at the completed step nearest to
// the requested time; step times are not adjusted to hit snapshots.
inline ScenarioRun run_scenario(const ScenarioSpec& spec, std::span<const double> snapshot_times) {
  spec.validate();
  for (double t : snapshot_times) {
    if (!(t >= 0.0 && t <= spec.t_end)) {
      throw InvalidArgument("snapshot time " + std::to_string(t) + " is outside [0, t_end]");
    }
  }
  ScalarField cur = initial_field(spec);
  const double dt = spec.dt.value_or(stable_dt(cur.spacings));
  detail::check_dt(cur, dt);

  // Step times: i * dt for i <= n_full, then t_end if it is not already one of them.
  const auto n_full = static_cast<std::size_t>(std::floor(spec.t_end / dt * (1.0 + 1e-14)));
  const bool tail = spec.t_end - static_cast<double>(n_full) * dt > 1e-12 * spec.t_end;
  const std::size_t n_steps = n_full + (tail ? 1 : 0);
  auto step_time = [&](std::size_t i) {
    return (tail && i == n_steps) ? spec.t_end : static_cast<double>(i) * dt;
  };

  // Nearest step index for each snapshot.
  std::vector<std::size_t> target(snapshot_times.size());
  for (std::size_t s = 0; s < snapshot_times.size(); ++s) {
    const double t = snapshot_times[s];
    auto i = static_cast<std::size_t>(std::llround(t / dt));
    i = std::min(i, n_steps);
    if (tail && i >= n_full) {
      i = (std::abs(spec.t_end - t) < std::abs(static_cast<double>(n_full) * dt - t)) ? n_steps : n_full;
    }
    target[s] = i;
  }

  ScenarioRun run;
  run.requested_times.assign(snapshot_times.begin(), snapshot_times.end());
  run.snapshots.resize(snapshot_times.size());
  run.dt = dt;
  run.steps = n_steps;

  auto capture = [&](std::size_t i) {
    for (std::size_t s = 0; s < target.size(); ++s) {
      if (target[s] == i) run.snapshots[s] = cur;
    }
  };

  capture(0);
  ScalarField next = cur;
  for (std::size_t i = 1; i <= n_steps; ++i) {
    const double t_prev = step_time(i - 1);
    const double t_new = step_time(i);
    detail::advance(cur, next, spec.boundary, t_new - t_prev, t_new);
    std::swap(cur, next);
    capture(i);
  }
  run.final_time = cur.time;
  return run;
}

struct ConvergencePoint {
  std::size_t resolution = 0;
  double h = 0.0;
  double max_error = 0.0;
};

struct ConvergenceStudy {
  std::vector<ConvergencePoint> points;
  std::vector<double> observed_orders;  // log(e_i / e_{i+1}) / log(h_i / h_{i+1})
};

using ManufacturedSolution = std::function<double(std::span<const double> coords, double t)>;

// Runs the solver with initial and boundary data taken from `exact` on the
// hypercube `domain` with `n` points per axis, and reports the max-norm error
// at the end time against `exact`.
inline ConvergenceStudy convergence_study(const ManufacturedSolution& exact,
                                          std::span<const std::pair<double, double>> domain,
                                          std::span<const std::size_t> resolutions, double t_end) {
  ConvergenceStudy study;
  for (auto n : resolutions) {
    ScenarioSpec spec;
    spec.domain.assign(domain.begin(), domain.end());
    spec.resolution.assign(domain.size(), n);
    spec.boundary = exact;
    spec.initial = [&exact](std::span<const double> x) { return exact(x, 0.0); };
    spec.t_end = t_end;
    const double end[] = {t_end};
    auto run = run_scenario(spec, end);
    const auto& f = run.snapshots.front();
    double err = 0.0;
    for (std::size_t p = 0; p < f.size(); ++p) {
      err = std::max(err, std::abs(f.values[p] - exact(f.coordinates(p), f.time)));
    }
    study.points.push_back({n, *std::max_element(f.spacings.begin(), f.spacings.end()), err});
  }
  for (std::size_t i = 1; i < study.points.size(); ++i) {
    const auto& a = study.points[i - 1];
    const auto& b = study.points[i];
    study.observed_orders.push_back(std::log(a.max_error / b.max_error) / std::log(a.h / b.h));
  }
  return study;
}

// Scenario from JSON:
//   {"domain": [[lo, hi], ...], "resolution": [n, ...] | "longest_points": n,
//    "boundary": "s*t", "initial": "0", "s": 10, "t_end": 1000,
//    "dt": "auto" | number, "snapshots": [t, ...]}
// Expressions see psi1..psik, t (boundary only) and the constant s.
inline ScenarioSpec scenario_from_json(const nlohmann::json& j) {
  try {
    ScenarioSpec spec;
    for (const auto& axis : j.at("domain")) {
      spec.domain.emplace_back(axis.at(0).get<double>(), axis.at(1).get<double>());
    }
    const auto k = spec.domain.size();
    if (k < 1 || k > 3) throw InvalidArgument("scenario dimension must be 1, 2 or 3");
    if (j.contains("resolution")) {
      spec.resolution = j.at("resolution").get<std::vector<std::size_t>>();
    } else {
      spec.resolution = equalized_resolution(spec.domain, j.value("longest_points", std::size_t{91}));
    }
    spec.s = j.value("s", 10.0);
    spec.t_end = j.at("t_end").get<double>();
    if (j.contains("dt") && !(j.at("dt").is_string() && j.at("dt").get<std::string>() == "auto")) {
      spec.dt = j.at("dt").get<double>();
    }
    spec.boundary_text = j.value("boundary", std::string("s*t"));
    spec.initial_text = j.value("initial", std::string("0"));

    std::vector<std::string> names;
    for (std::size_t a = 1; a <= k; ++a) names.push_back("psi" + std::to_string(a));
    const std::map<std::string, double> constants = {{"s", spec.s}};
    auto boundary_names = names;
    boundary_names.push_back("t");
    auto bexpr = Expression::parse(spec.boundary_text, boundary_names, constants);
    auto iexpr = Expression::parse(spec.initial_text, names, constants);
    spec.boundary = [bexpr, k](std::span<const double> x, double t) {
      double buf[4];
      std::copy(x.begin(), x.end(), buf);
      buf[k] = t;
      return bexpr(std::span<const double>(buf, k + 1));
    };
    spec.initial = [iexpr](std::span<const double> x) { return iexpr(x); };
    spec.validate();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed scenario JSON: ") + e.what());
  }
}

inline nlohmann::json scenario_to_json(const ScenarioSpec& spec) {
  nlohmann::json domain = nlohmann::json::array();
  for (const auto& [lo, hi] : spec.domain) domain.push_back({lo, hi});
  nlohmann::json j = {{"domain", domain},
                      {"resolution", spec.resolution},
                      {"boundary", spec.boundary_text},
                      {"initial", spec.initial_text},
                      {"s", spec.s},
                      {"t_end", spec.t_end}};
  if (spec.dt) {
    j["dt"] = *spec.dt;
  } else {
    j["dt"] = "auto";
  }
  return j;
}

// CSV rows "t,psi1,...,psik,value[,normalized]" for each field in order.
// The normalized column is value / (s t), left empty at t = 0.
inline void write_fields_csv(std::ostream& os, std::span<const ScalarField> fields,
                             std::optional<double> normalize_by_s = std::nullopt) {
  if (fields.empty()) return;
  const auto k = fields.front().dimension();
  os << 't';
  for (std::size_t a = 1; a <= k; ++a) os << ",psi" << a;
  os << ",value";
  if (normalize_by_s) os << ",normalized";
  os << '\n';
  for (const auto& f : fields) {
    for (std::size_t p = 0; p < f.size(); ++p) {
      os << f.time;
      for (double x : f.coordinates(p)) os << ',' << x;
      os << ',' << f.values[p];
      if (normalize_by_s) {
        os << ',';
        const double scale = *normalize_by_s * f.time;
        if (scale != 0.0) os << f.values[p] / scale;
      }
      os << '\n';
    }
  }
}

inline nlohmann::json field_to_json(const ScalarField& f) {
  return {{"k", f.dimension()},   {"extents", f.extents}, {"spacings", f.spacings},
          {"origin", f.origin},   {"time", f.time},       {"values", f.values}};
}

inline ScalarField field_from_json(const nlohmann::json& j) {
  try {
    ScalarField f;
    f.extents = j.at("extents").get<std::vector<std::size_t>>();
    f.spacings = j.at("spacings").get<std::vector<double>>();
    f.origin = j.at("origin").get<std::vector<double>>();
    f.values = j.at("values").get<std::vector<double>>();
    f.time = j.at("time").get<double>();
    f.validate();
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed field JSON: ") + e.what());
  }
}

}  // namespace sustain
