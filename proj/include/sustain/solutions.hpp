#pragma once

// Closed-form index solutions of the two PDE models and their exact residuals.
//
//   model 10:  H_t = sum_i d^2 H / d psi_i^2
//   model 11:  H_t = sum_i d^k H / d psi_i^k + d^k H / (d psi_1 ... d psi_k)

#include <algorithm>
#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sustain/error.hpp"
#include "sustain/polynomial.hpp"

namespace sustain {

enum class Family {
  T1a,    // k t + 1/2 sum psi_i^2
  T1b,    // 2k t + sum psi_i^2
  T2a,    // (k+1) t + 1/k! sum psi_i^k + prod psi_i
  T2b,    // (k! k + 1) t + sum psi_i^k + prod psi_i
  C_ab,   // (k alpha k! + beta) t + alpha sum psi_i^k + beta prod psi_i
  T3w,    // (k! sum W + prod W) t + sum W_i psi_i^k + prod W_i psi_i
  C1w,    // (sum W + prod W) t + 1/k! sum W_i psi_i^k + prod W_i psi_i
  C2w_ab  // (alpha k! sum W + beta prod W) t + alpha sum W_i psi_i^k + beta prod W_i psi_i
};

inline constexpr std::array<Family, 8> kAllFamilies = {
    Family::T1a, Family::T1b, Family::T2a, Family::T2b,
    Family::C_ab, Family::T3w, Family::C1w, Family::C2w_ab};

enum class Model { Independent10, Dependent11 };

inline std::string_view family_name(Family f) {
  switch (f) {
    case Family::T1a: return "T1a";
    case Family::T1b: return "T1b";
    case Family::T2a: return "T2a";
    case Family::T2b: return "T2b";
    case Family::C_ab: return "C_ab";
    case Family::T3w: return "T3w";
    case Family::C1w: return "C1w";
    case Family::C2w_ab: return "C2w_ab";
  }
  return "?";
}

inline Family parse_family(std::string_view name) {
  for (auto f : kAllFamilies) {
    if (family_name(f) == name) return f;
  }
  throw InvalidArgument("unknown solution family '" + std::string(name) +
                        "' (expected T1a, T1b, T2a, T2b, C_ab, T3w, C1w or C2w_ab)");
}

// The model each family is a solution of.
inline Model model_of(Family f) {
  return (f == Family::T1a || f == Family::T1b) ? Model::Independent10 : Model::Dependent11;
}

inline bool uses_weights(Family f) {
  return f == Family::T3w || f == Family::C1w || f == Family::C2w_ab;
}

inline bool uses_alpha_beta(Family f) { return f == Family::C_ab || f == Family::C2w_ab; }

inline std::size_t min_dimension(Family f) { return model_of(f) == Model::Independent10 ? 1 : 2; }

struct SolutionFamily {
  Family variant = Family::T1a;
  std::size_t k = 2;
  double alpha = 1.0;
  double beta = 1.0;
  std::vector<double> weights;  // W_1..W_k, only for the weighted families
  // C_ab only: use the form as literally printed, with 1/k! and unit
  // coefficients on the spatial terms. It does not solve model 11 in general.
  bool printed_form = false;

  void validate() const {
    const auto name = std::string(family_name(variant));
    if (k < min_dimension(variant)) {
      throw InvalidArgument(name + " needs k >= " + std::to_string(min_dimension(variant)) +
                            ", got k = " + std::to_string(k));
    }
    if (uses_alpha_beta(variant) && !(alpha > 0.0 && beta > 0.0)) {
      throw InvalidArgument(name + " needs alpha > 0 and beta > 0");
    }
    if (uses_weights(variant)) {
      if (weights.size() != k) {
        throw InvalidArgument(name + " needs " + std::to_string(k) + " weights, got " +
                              std::to_string(weights.size()));
      }
      if (!std::all_of(weights.begin(), weights.end(), [](double w) { return w > 0.0; })) {
        throw InvalidArgument(name + " weights must be strictly positive");
      }
    }
  }
};

inline double factorial(std::size_t n) {
  double f = 1.0;
  for (std::size_t i = 2; i <= n; ++i) f *= static_cast<double>(i);
  return f;
}

namespace detail {

// sum_i c_i psi_i^power
inline SparsePolynomial weighted_power_sum(std::size_t k, std::span<const double> c,
                                           unsigned power) {
  SparsePolynomial p(k);
  for (std::size_t i = 1; i <= k; ++i) {
    p += SparsePolynomial::power(k, Variable::psi(i), power, c[i - 1]);
  }
  return p;
}

// c * prod_i psi_i
inline SparsePolynomial product_term(std::size_t k, double c) {
  SparsePolynomial::Exponents e(k + 1, 1u);
  e[0] = 0;
  return SparsePolynomial::monomial(k, c, std::move(e));
}

inline SparsePolynomial time_term(std::size_t k, double c) {
  return SparsePolynomial::power(k, Variable::t(), 1, c);
}

}  // namespace detail

// Builds the closed form of the family. For the families with per-factor
// coefficients c_i on psi_i^k and b on prod psi_i, the time coefficient is
// accumulated as sum_i c_i k! + b, the same products the exact derivatives
// produce; it equals the stated closed-form coefficient.
inline SparsePolynomial build_solution(const SolutionFamily& f) {
  f.validate();
  const auto k = f.k;
  const auto kk = static_cast<unsigned>(k);
  const double kd = static_cast<double>(k);
  const double kfact = factorial(k);

  using detail::product_term;
  using detail::time_term;
  using detail::weighted_power_sum;

  auto with_derived_time = [&](const std::vector<double>& c, double b) {
    double t_coef = 0.0;
    for (double ci : c) t_coef += ci * kfact;
    t_coef += b;
    return time_term(k, t_coef) + weighted_power_sum(k, c, kk) + product_term(k, b);
  };
  auto scaled_weights = [&](double s) {
    std::vector<double> c(k);
    for (std::size_t i = 0; i < k; ++i) c[i] = s * f.weights[i];
    return c;
  };
  double w_prod = 1.0;
  for (double w : f.weights) w_prod *= w;

  switch (f.variant) {
    case Family::T1a:
      return time_term(k, kd) + weighted_power_sum(k, std::vector<double>(k, 0.5), 2);
    case Family::T1b:
      return time_term(k, 2.0 * kd) + weighted_power_sum(k, std::vector<double>(k, 1.0), 2);
    case Family::T2a:
      return time_term(k, kd + 1.0) + weighted_power_sum(k, std::vector<double>(k, 1.0 / kfact), kk) +
             product_term(k, 1.0);
    case Family::T2b:
      return time_term(k, kfact * kd + 1.0) + weighted_power_sum(k, std::vector<double>(k, 1.0), kk) +
             product_term(k, 1.0);
    case Family::C_ab:
      if (f.printed_form) {
        return time_term(k, kd * f.alpha * kfact + f.beta) +
               weighted_power_sum(k, std::vector<double>(k, 1.0 / kfact), kk) + product_term(k, 1.0);
      }
      return with_derived_time(std::vector<double>(k, f.alpha), f.beta);
    case Family::T3w:
      return with_derived_time(f.weights, w_prod);
    case Family::C1w:
      return with_derived_time(scaled_weights(1.0 / kfact), w_prod);
    case Family::C2w_ab:
      return with_derived_time(scaled_weights(f.alpha), f.beta * w_prod);
  }
  throw InvalidArgument("unhandled solution family");
}

// H_t - sum_i H_{psi_i psi_i}; the zero polynomial iff H solves model 10.
inline SparsePolynomial residual_model10(const SparsePolynomial& h) {
  auto r = partial(h, Variable::t());
  for (std::size_t i = 1; i <= h.arity(); ++i) r -= partial(h, Variable::psi(i), 2);
  return r;
}

// H_t - sum_i d^k H/d psi_i^k - d^k H/(d psi_1 ... d psi_k); requires k >= 2.
inline SparsePolynomial residual_model11(const SparsePolynomial& h) {
  const auto k = h.arity();
  if (k < 2) {
    throw InvalidArgument("model 11 needs k >= 2, got k = " + std::to_string(k));
  }
  const auto order = static_cast<unsigned>(k);
  auto r = partial(h, Variable::t());
  for (std::size_t i = 1; i <= k; ++i) r -= partial(h, Variable::psi(i), order);
  auto mixed = h;
  for (std::size_t i = 1; i <= k; ++i) mixed = partial(mixed, Variable::psi(i));
  r -= mixed;
  return r;
}

inline SparsePolynomial residual(const SparsePolynomial& h, Model m) {
  return m == Model::Independent10 ? residual_model10(h) : residual_model11(h);
}

// Coefficient threshold below which a residual counts as identically zero.
inline constexpr double kResidualTolerance = 1e-12;

struct VerificationResult {
  SolutionFamily family;
  Model model;
  SparsePolynomial residual;
  bool passed;
};

inline VerificationResult verify_solution(const SolutionFamily& f) {
  auto h = build_solution(f);
  auto m = model_of(f.variant);
  auto r = residual(h, m);
  bool ok = r.is_zero(kResidualTolerance);
  return {f, m, std::move(r), ok};
}

}  // namespace sustain
