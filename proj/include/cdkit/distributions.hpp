#pragma once

// The handful of reference laws used for pivots and simulation: normal,
// Student t, chi-square, standard uniform and an empirical law over a finite
// sample. Every evaluator is a pure function of (law, argument).

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "cdkit/error.hpp"
#include "cdkit/numeric.hpp"
#include "cdkit/rng.hpp"
#include "cdkit/special.hpp"

namespace cdkit {

namespace dist {

struct Normal {
  double mean = 0.0;
  double sd = 1.0;
};

struct StudentT {
  double df = 1.0;
};

struct ChiSquare {
  double df = 1.0;
};

struct Uniform01 {};

struct Empirical {
  std::shared_ptr<const std::vector<double>> sorted;
};

}  // namespace dist

using DistKind = std::variant<dist::Normal, dist::StudentT, dist::ChiSquare, dist::Uniform01, dist::Empirical>;

enum class Side { lower, upper };

inline void validate(const DistKind& d) {
  std::visit(
      [](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, dist::Normal>) {
          require(std::isfinite(k.mean) && k.sd > 0.0 && std::isfinite(k.sd), ErrorKind::parameter_domain,
                  "Normal requires finite mean and sd > 0");
        } else if constexpr (std::is_same_v<K, dist::StudentT> || std::is_same_v<K, dist::ChiSquare>) {
          require(k.df > 0.0 && std::isfinite(k.df), ErrorKind::parameter_domain, "degrees of freedom must be > 0");
        } else if constexpr (std::is_same_v<K, dist::Empirical>) {
          require(k.sorted && !k.sorted->empty(), ErrorKind::parameter_domain, "Empirical sample must be nonempty");
        }
      },
      d);
}

inline DistKind normal(double mean = 0.0, double sd = 1.0) {
  DistKind d = dist::Normal{mean, sd};
  validate(d);
  return d;
}

inline DistKind student_t(double df) {
  DistKind d = dist::StudentT{df};
  validate(d);
  return d;
}

inline DistKind chi_square(double df) {
  DistKind d = dist::ChiSquare{df};
  validate(d);
  return d;
}

inline DistKind uniform01() { return dist::Uniform01{}; }

inline DistKind empirical(std::vector<double> sample) {
  require(!sample.empty(), ErrorKind::parameter_domain, "Empirical sample must be nonempty");
  for (double v : sample) require(std::isfinite(v), ErrorKind::parameter_domain, "Empirical sample must be finite");
  std::sort(sample.begin(), sample.end());
  return dist::Empirical{std::make_shared<const std::vector<double>>(std::move(sample))};
}

namespace detail {

inline void require_finite(double x) { require(!std::isnan(x), ErrorKind::domain, "argument must not be NaN"); }

inline void require_probability(double p) {
  require(p > 0.0 && p < 1.0, ErrorKind::domain, "probability must lie in (0, 1), got " + std::to_string(p));
}

// Student t with w = nu / (nu + x^2) and its complement computed directly.
inline special::TailPair t_tail_beta(double nu, double x) {
  const double x2 = x * x;
  double w, wc;
  if (x2 > 1e200) {
    w = nu / x2;
    wc = 1.0;
  } else {
    w = nu / (nu + x2);
    wc = x2 / (nu + x2);
  }
  return special::incomplete_beta(0.5 * nu, 0.5, w, wc);
}

inline double t_lower(double nu, double x) {
  if (x == 0.0) return 0.5;
  const double half_tail = 0.5 * t_tail_beta(nu, x).lower;
  return x < 0.0 ? half_tail : 1.0 - half_tail;
}

inline double t_log_density(double nu, double x) {
  return -special::log_beta(0.5 * nu, 0.5) - 0.5 * std::log(nu) - 0.5 * (nu + 1.0) * std::log1p(x * x / nu);
}

// log F_t(x) for x < 0 as log f(x) + log of the integral of f(x - s)/f(x) over
// s > 0, with s = e^u and the trapezoid rule in u. The integrand is analytic
// in a strip around the real u axis and decays exponentially both ways, so the
// rule converges geometrically as the step halves.
inline double t_log_lower_tail(double nu, double x) {
  if (std::fabs(x) > 1e100) return std::log(0.5) + t_tail_beta(nu, x).log_lower;
  const double denom = nu + x * x;
  const double half_power = 0.5 * (nu + 1.0);
  auto integrand = [&](double u) {
    const double s = std::exp(u);
    return std::exp(u - half_power * std::log1p(s * (s - 2.0 * x) / denom));
  };
  const double scale = std::min(denom / ((nu + 1.0) * std::fabs(x)), std::sqrt(denom));
  const double center = std::log(scale);
  const double u_lo = center - 42.0;
  const double u_cap = center + 60.0 / std::min(nu, 1.0) + 10.0;
  auto trapezoid = [&](double h) {
    std::vector<double> terms;
    double peak = 0.0;
    for (double u = u_lo; u <= u_cap; u += h) {
      const double v = integrand(u);
      terms.push_back(v);
      peak = std::max(peak, v);
      if (u > center + 3.0 && v < 1e-19 * peak) break;
    }
    return h * numeric::pairwise_sum(terms);
  };
  double h = 0.5;
  double previous = trapezoid(h);
  for (int i = 0; i < 6; ++i) {
    h *= 0.5;
    const double current = trapezoid(h);
    if (std::fabs(current - previous) <= 1e-14 * current) {
      previous = current;
      break;
    }
    previous = current;
  }
  return t_log_density(nu, x) + std::log(previous);
}

inline std::size_t empirical_count_le(const std::vector<double>& s, double x) {
  return static_cast<std::size_t>(std::upper_bound(s.begin(), s.end(), x) - s.begin());
}

}  // namespace detail

inline double cdf(const DistKind& d, double x) {
  validate(d);
  detail::require_finite(x);
  return std::visit(
      [x](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, dist::Normal>) {
          return special::normal_cdf((x - k.mean) / k.sd);
        } else if constexpr (std::is_same_v<K, dist::StudentT>) {
          return detail::t_lower(k.df, x);
        } else if constexpr (std::is_same_v<K, dist::ChiSquare>) {
          return special::incomplete_gamma(0.5 * k.df, 0.5 * x).lower;
        } else if constexpr (std::is_same_v<K, dist::Uniform01>) {
          return std::clamp(x, 0.0, 1.0);
        } else {
          const auto& s = *k.sorted;
          return static_cast<double>(detail::empirical_count_le(s, x)) / static_cast<double>(s.size());
        }
      },
      d);
}

/// Upper tail P(X > x), computed without the cancellation of 1 - cdf.
inline double sf(const DistKind& d, double x) {
  validate(d);
  detail::require_finite(x);
  return std::visit(
      [x](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, dist::Normal>) {
          return special::normal_cdf(-(x - k.mean) / k.sd);
        } else if constexpr (std::is_same_v<K, dist::StudentT>) {
          return detail::t_lower(k.df, -x);
        } else if constexpr (std::is_same_v<K, dist::ChiSquare>) {
          return special::incomplete_gamma(0.5 * k.df, 0.5 * x).upper;
        } else if constexpr (std::is_same_v<K, dist::Uniform01>) {
          return 1.0 - std::clamp(x, 0.0, 1.0);
        } else {
          const auto& s = *k.sorted;
          return static_cast<double>(s.size() - detail::empirical_count_le(s, x)) / static_cast<double>(s.size());
        }
      },
      d);
}

inline double density(const DistKind& d, double x) {
  validate(d);
  detail::require_finite(x);
  return std::visit(
      [x](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, dist::Normal>) {
          return special::normal_pdf((x - k.mean) / k.sd) / k.sd;
        } else if constexpr (std::is_same_v<K, dist::StudentT>) {
          return std::exp(detail::t_log_density(k.df, x));
        } else if constexpr (std::is_same_v<K, dist::ChiSquare>) {
          if (x < 0.0) return 0.0;
          const double a = 0.5 * k.df;
          if (x == 0.0) return a < 1.0 ? special::kInf : (a == 1.0 ? 0.5 : 0.0);
          return std::exp((a - 1.0) * std::log(x) - 0.5 * x - a * std::numbers::ln2 - special::log_gamma(a));
        } else if constexpr (std::is_same_v<K, dist::Uniform01>) {
          return (x >= 0.0 && x <= 1.0) ? 1.0 : 0.0;
        } else {
          fail(ErrorKind::unsupported_representation, "Empirical law has no density");
        }
      },
      d);
}

namespace detail {

// Solves sf(x) = q for the Student t with x >= 0, q in (0, 0.5].
// Hill's (1970) approximation to the upper-q point of Student t, used as the
// Newton starting value.
inline double hill_t_quantile(double nu, double q) {
  const double p2 = 2.0 * q;
  const double a = 1.0 / (nu - 0.5);
  const double b = 48.0 / (a * a);
  double c = ((20700.0 * a / b - 98.0) * a - 16.0) * a + 96.36;
  const double d = ((94.5 / (b + c) - 3.0) / b + 1.0) * std::sqrt(a * std::numbers::pi / 2.0) * nu;
  double y = std::pow(d * p2, 2.0 / nu);
  if (y > 0.05 + a) {
    const double x = special::normal_quantile(q);
    y = x * x;
    if (nu < 5.0) c += 0.3 * (nu - 4.5) * (x + 0.6);
    c = (((0.05 * d * x - 5.0) * x - 7.0) * x - 2.0) * x + b + c;
    y = (((((0.4 * y + 6.3) * y + 36.0) * y + 94.5) / c - y - 3.0) / b + 1.0) * x;
    y = std::expm1(a * y * y);
  } else {
    y = ((1.0 / (((nu + 6.0) / (nu * y) - 0.089 * d - 0.822) * (nu + 2.0) * 3.0) + 0.5 / (nu + 4.0)) * y - 1.0) *
            (nu + 1.0) / (nu + 2.0) +
        1.0 / y;
  }
  return std::sqrt(nu * y);
}

inline double t_upper_quantile(double nu, double q) {
  if (q == 0.5) return 0.0;
  if (nu == 1.0) return 1.0 / std::tan(std::numbers::pi * q);
  if (nu == 2.0) {
    const double p = 1.0 - q;
    return (2.0 * p - 1.0) / std::sqrt(2.0 * p * q);
  }
  double guess = hill_t_quantile(nu, q);
  if (!(guess > 0.0) || !std::isfinite(guess)) guess = 1.0;
  const double target = -std::log(q);
  // -log Q(x) and its derivative, sharing one incomplete-beta evaluation.
  const double log_norm = -special::log_beta(0.5 * nu, 0.5) - 0.5 * std::log(nu);
  auto eval = [nu, log_norm](double x) {
    const double log_q = std::log(0.5) + t_tail_beta(nu, x).log_lower;
    const double log_density = log_norm - 0.5 * (nu + 1.0) * std::log1p(x * x / nu);
    return std::pair{-log_q, std::exp(log_density - log_q)};
  };
  double hi = std::max(2.0 * guess, 1.0);
  while (eval(hi).first < target && hi < 1e300) hi *= 4.0;
  return numeric::newton_bracketed(eval, target, 0.0, hi, std::min(guess, hi));
}

// Solves P(x) = p (lower=true) or Q(x) = p (lower=false) for chi-square(df).
inline double chi_square_quantile(double df, double p, bool lower) {
  const double a = 0.5 * df;
  const bool use_lower = lower ? p <= 0.5 : p > 0.5;
  const double target_prob = (lower == use_lower) ? p : 1.0 - p;
  const double target = std::log(target_prob);
  // Wilson-Hilferty starting point.
  const double z = lower ? special::normal_quantile(p) : -special::normal_quantile(p);
  const double c = 2.0 / (9.0 * df);
  double guess = df * std::pow(std::max(1.0 - c + z * std::sqrt(c), 1e-3), 3.0);
  const double log_norm = -a * std::numbers::ln2 - special::log_gamma(a);
  auto log_pdf = [a, log_norm](double x) { return (a - 1.0) * std::log(x) - 0.5 * x + log_norm; };
  // log P(x) (or -log Q(x)) with its derivative from one incomplete-gamma call.
  auto eval = [a, log_pdf, use_lower](double x) {
    const auto t = special::incomplete_gamma(a, 0.5 * x);
    return use_lower ? std::pair{t.log_lower, std::exp(log_pdf(x) - t.log_lower)}
                     : std::pair{-t.log_upper, std::exp(log_pdf(x) - t.log_upper)};
  };
  const double goal = use_lower ? target : -target;
  double hi = std::max(2.0 * guess, df + 10.0);
  while (eval(hi).first < goal && hi < 1e300) hi *= 2.0;
  return numeric::newton_bracketed(eval, goal, 0.0, hi, std::min(guess, hi));
}

inline double empirical_quantile(const std::vector<double>& s, double p) {
  const double n = static_cast<double>(s.size());
  auto k = static_cast<std::size_t>(std::ceil(p * n));
  k = std::clamp<std::size_t>(k, 1, s.size());
  if (k > 1 && static_cast<double>(k - 1) / n >= p) --k;
  return s[k - 1];
}

}  // namespace detail

inline double quantile(const DistKind& d, double p) {
  validate(d);
  detail::require_probability(p);
  return std::visit(
      [p](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, dist::Normal>) {
          return k.mean + k.sd * special::normal_quantile(p);
        } else if constexpr (std::is_same_v<K, dist::StudentT>) {
          return p < 0.5 ? -detail::t_upper_quantile(k.df, p) : detail::t_upper_quantile(k.df, 1.0 - p);
        } else if constexpr (std::is_same_v<K, dist::ChiSquare>) {
          return detail::chi_square_quantile(k.df, p, true);
        } else if constexpr (std::is_same_v<K, dist::Uniform01>) {
          return p;
        } else {
          return detail::empirical_quantile(*k.sorted, p);
        }
      },
      d);
}

/// The x with sf(x) = q; keeps full relative precision for tiny q.
inline double quantile_upper(const DistKind& d, double q) {
  validate(d);
  detail::require_probability(q);
  return std::visit(
      [q](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, dist::Normal>) {
          return k.mean - k.sd * special::normal_quantile(q);
        } else if constexpr (std::is_same_v<K, dist::StudentT>) {
          return q <= 0.5 ? detail::t_upper_quantile(k.df, q) : -detail::t_upper_quantile(k.df, 1.0 - q);
        } else if constexpr (std::is_same_v<K, dist::ChiSquare>) {
          return detail::chi_square_quantile(k.df, q, false);
        } else if constexpr (std::is_same_v<K, dist::Uniform01>) {
          return 1.0 - q;
        } else {
          return detail::empirical_quantile(*k.sorted, 1.0 - q);
        }
      },
      d);
}

/// log P(X <= x) or log P(X > x), finite far beyond the underflow of the tail itself.
inline double log_tail(const DistKind& d, double x, Side side) {
  validate(d);
  detail::require_finite(x);
  const bool lower = side == Side::lower;
  return std::visit(
      [x, lower](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, dist::Normal>) {
          const double z = (x - k.mean) / k.sd;
          return special::normal_log_cdf(lower ? z : -z);
        } else if constexpr (std::is_same_v<K, dist::StudentT>) {
          const double y = lower ? x : -x;
          if (y < 0.0) return detail::t_log_lower_tail(k.df, y);
          return std::log1p(-detail::t_lower(k.df, -y));
        } else if constexpr (std::is_same_v<K, dist::ChiSquare>) {
          const auto t = special::incomplete_gamma(0.5 * k.df, 0.5 * x);
          return lower ? t.log_lower : t.log_upper;
        } else if constexpr (std::is_same_v<K, dist::Uniform01>) {
          const double u = std::clamp(x, 0.0, 1.0);
          return lower ? std::log(u) : std::log1p(-u);
        } else {
          const auto& s = *k.sorted;
          const double below = static_cast<double>(detail::empirical_count_le(s, x));
          const double n = static_cast<double>(s.size());
          return lower ? std::log(below / n) : std::log((n - below) / n);
        }
      },
      d);
}

/// One draw by inverse transform of a stream uniform (index lookup for Empirical).
inline double draw_one(RngEngine& engine, const DistKind& d) {
  return std::visit(
      [&engine](const auto& k) -> double {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, dist::Normal>) {
          return k.mean + k.sd * special::normal_quantile(engine.uniform());
        } else if constexpr (std::is_same_v<K, dist::StudentT>) {
          const double u = engine.uniform();
          return u < 0.5 ? -detail::t_upper_quantile(k.df, u) : detail::t_upper_quantile(k.df, 1.0 - u);
        } else if constexpr (std::is_same_v<K, dist::ChiSquare>) {
          return detail::chi_square_quantile(k.df, engine.uniform(), true);
        } else if constexpr (std::is_same_v<K, dist::Uniform01>) {
          return engine.uniform();
        } else {
          return (*k.sorted)[engine.below(k.sorted->size())];
        }
      },
      d);
}

inline std::vector<double> draw(RngEngine& engine, const DistKind& d, std::size_t count) {
  validate(d);
  std::vector<double> out(count);
  for (auto& v : out) v = draw_one(engine, d);
  return out;
}

inline std::vector<double> draw(const RngStream& stream, const DistKind& d, std::size_t count) {
  RngEngine engine(stream);
  return draw(engine, d, count);
}

}  // namespace cdkit
