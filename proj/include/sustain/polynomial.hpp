#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sustain/error.hpp"

namespace sustain {

// A variable of H(t, psi_1, ..., psi_k). Slot 0 is time, slot i >= 1 is psi_i.
class Variable {
 public:
  static constexpr Variable t() { return Variable{0}; }
  static constexpr Variable psi(std::size_t i) { return Variable{i}; }

  constexpr std::size_t slot() const { return slot_; }
  constexpr bool is_time() const { return slot_ == 0; }

  friend constexpr bool operator==(Variable, Variable) = default;

 private:
  explicit constexpr Variable(std::size_t s) : slot_(s) {}
  std::size_t slot_;
};

// Sparse multivariate polynomial in (t, psi_1, ..., psi_k) with real
// coefficients. Terms are keyed by exponent vectors of length k + 1;
// zero coefficients are never stored.
class SparsePolynomial {
 public:
  using Exponents = std::vector<unsigned>;
  using TermMap = std::map<Exponents, double>;

  explicit SparsePolynomial(std::size_t arity) : arity_(arity) {
    if (arity == 0) {
      throw InvalidArgument("polynomial arity must be at least 1");
    }
  }

  static SparsePolynomial constant(std::size_t arity, double c) {
    SparsePolynomial p(arity);
    p.add_term(Exponents(arity + 1, 0u), c);
    return p;
  }

  static SparsePolynomial monomial(std::size_t arity, double c, Exponents exps) {
    SparsePolynomial p(arity);
    p.add_term(std::move(exps), c);
    return p;
  }

  // v^power for a single variable.
  static SparsePolynomial power(std::size_t arity, Variable v, unsigned power, double c = 1.0) {
    SparsePolynomial p(arity);
    p.check_variable(v);
    Exponents e(arity + 1, 0u);
    e[v.slot()] = power;
    p.add_term(std::move(e), c);
    return p;
  }

  std::size_t arity() const { return arity_; }
  const TermMap& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }

  double coefficient(const Exponents& e) const {
    auto it = terms_.find(e);
    return it == terms_.end() ? 0.0 : it->second;
  }

  // Accumulates c into the term with exponents e; drops it if it cancels to 0.
  void add_term(Exponents e, double c) {
    if (e.size() != arity_ + 1) {
      throw InvalidArgument("exponent vector has length " + std::to_string(e.size()) +
                            ", expected " + std::to_string(arity_ + 1));
    }
    if (!std::isfinite(c)) {
      throw NonFiniteError("non-finite polynomial coefficient");
    }
    if (c == 0.0) return;
    auto [it, inserted] = terms_.try_emplace(std::move(e), c);
    if (!inserted) {
      it->second += c;
      if (it->second == 0.0) terms_.erase(it);
    }
  }

  // True when every coefficient magnitude is below tol (tol = 0: no terms).
  bool is_zero(double tol = 0.0) const {
    if (tol <= 0.0) return terms_.empty();
    for (const auto& [e, c] : terms_) {
      if (std::abs(c) >= tol) return false;
    }
    return true;
  }

  double max_abs_coefficient() const {
    double m = 0.0;
    for (const auto& [e, c] : terms_) m = std::max(m, std::abs(c));
    return m;
  }

  unsigned degree(Variable v) const {
    check_variable(v);
    unsigned d = 0;
    for (const auto& [e, c] : terms_) d = std::max(d, e[v.slot()]);
    return d;
  }

  SparsePolynomial& operator+=(const SparsePolynomial& o) {
    check_arity(o);
    for (const auto& [e, c] : o.terms_) add_term(e, c);
    return *this;
  }
  SparsePolynomial& operator-=(const SparsePolynomial& o) {
    check_arity(o);
    for (const auto& [e, c] : o.terms_) add_term(e, -c);
    return *this;
  }
  SparsePolynomial& operator*=(double s) {
    if (s == 0.0) {
      terms_.clear();
      return *this;
    }
    for (auto& [e, c] : terms_) c *= s;
    return *this;
  }

  friend SparsePolynomial operator+(SparsePolynomial a, const SparsePolynomial& b) { return a += b; }
  friend SparsePolynomial operator-(SparsePolynomial a, const SparsePolynomial& b) { return a -= b; }
  friend SparsePolynomial operator*(SparsePolynomial a, double s) { return a *= s; }
  friend SparsePolynomial operator*(double s, SparsePolynomial a) { return a *= s; }
  friend SparsePolynomial operator-(SparsePolynomial a) { return a *= -1.0; }

  friend SparsePolynomial operator*(const SparsePolynomial& a, const SparsePolynomial& b) {
    a.check_arity(b);
    SparsePolynomial r(a.arity_);
    Exponents e(a.arity_ + 1);
    for (const auto& [ea, ca] : a.terms_) {
      for (const auto& [eb, cb] : b.terms_) {
        for (std::size_t i = 0; i < e.size(); ++i) e[i] = ea[i] + eb[i];
        r.add_term(e, ca * cb);
      }
    }
    return r;
  }

  friend bool operator==(const SparsePolynomial& a, const SparsePolynomial& b) {
    return a.arity_ == b.arity_ && a.terms_ == b.terms_;
  }

  void check_variable(Variable v) const {
    if (v.slot() > arity_) {
      throw InvalidArgument("variable psi_" + std::to_string(v.slot()) +
                            " out of range for arity " + std::to_string(arity_));
    }
  }

 private:
  void check_arity(const SparsePolynomial& o) const {
    if (o.arity_ != arity_) {
      throw InvalidArgument("polynomial arity mismatch: " + std::to_string(arity_) + " vs " +
                            std::to_string(o.arity_));
    }
  }

  std::size_t arity_;
  TermMap terms_;
};

// d^order p / dv^order, exact.
inline SparsePolynomial partial(const SparsePolynomial& p, Variable v, unsigned order = 1) {
  p.check_variable(v);
  SparsePolynomial r(p.arity());
  const auto s = v.slot();
  for (const auto& [e, c] : p.terms()) {
    if (e[s] < order) continue;
    double factor = 1.0;
    for (unsigned j = 0; j < order; ++j) factor *= static_cast<double>(e[s] - j);
    auto d = e;
    d[s] -= order;
    r.add_term(std::move(d), c * factor);
  }
  return r;
}

// Evaluates p at a point given as (t, psi_1, ..., psi_k).
inline double evaluate(const SparsePolynomial& p, std::span<const double> point) {
  if (point.size() != p.arity() + 1) {
    throw InvalidArgument("evaluation point has " + std::to_string(point.size()) +
                          " coordinates, expected " + std::to_string(p.arity() + 1));
  }
  double sum = 0.0;
  for (const auto& [e, c] : p.terms()) {
    double term = c;
    for (std::size_t i = 0; i < e.size(); ++i) {
      for (unsigned j = 0; j < e[i]; ++j) term *= point[i];
    }
    sum += term;
  }
  return sum;
}

inline double evaluate(const SparsePolynomial& p, double t, std::span<const double> psi) {
  std::vector<double> point;
  point.reserve(psi.size() + 1);
  point.push_back(t);
  point.insert(point.end(), psi.begin(), psi.end());
  return evaluate(p, point);
}

// JSON term list: {"arity": k, "terms": [{"exponents": [...], "coefficient": c}, ...]}.
inline nlohmann::json to_json(const SparsePolynomial& p) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& [e, c] : p.terms()) {
    terms.push_back({{"exponents", e}, {"coefficient", c}});
  }
  return {{"arity", p.arity()}, {"terms", std::move(terms)}};
}

inline SparsePolynomial polynomial_from_json(const nlohmann::json& j) {
  try {
    SparsePolynomial p(j.at("arity").get<std::size_t>());
    for (const auto& term : j.at("terms")) {
      p.add_term(term.at("exponents").get<SparsePolynomial::Exponents>(),
                 term.at("coefficient").get<double>());
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed polynomial JSON: ") + e.what());
  }
}

inline std::ostream& operator<<(std::ostream& os, const SparsePolynomial& p) {
  if (p.terms().empty()) return os << "0";
  bool first = true;
  for (const auto& [e, c] : p.terms()) {
    if (!first) os << " + ";
    first = false;
    os << c;
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (e[i] == 0) continue;
      os << '*' << (i == 0 ? std::string("t") : "psi" + std::to_string(i));
      if (e[i] > 1) os << '^' << e[i];
    }
  }
  return os;
}

}  // namespace sustain
