#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

// Special functions and a portable RNG. Tail probabilities are computed
// from the regularized incomplete gamma/beta functions so no statistical
// tables are needed anywhere in the library.

namespace pathlasso {

inline double sigmoid(double x) {
  if (x >= 0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace detail {

// Lower regularized gamma P(a,x) by series expansion (x < a+1).
inline double gamma_p_series(double a, double x) {
  double sum = 1.0 / a;
  double term = sum;
  for (int n = 1; n < 500; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized gamma Q(a,x) by continued fraction (x >= a+1).
inline double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

// Continued fraction for the incomplete beta function.
inline double betacf(double a, double b, double x) {
  const double tiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 500; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return h;
}

}  // namespace detail

// Regularized lower incomplete gamma P(a,x).
inline double gamma_p(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::domain_error("gamma_p: invalid arguments");
  if (x == 0.0) return 0.0;
  if (x < a + 1.0) return detail::gamma_p_series(a, x);
  return 1.0 - detail::gamma_q_cf(a, x);
}

// Regularized upper incomplete gamma Q(a,x) = 1 - P(a,x).
inline double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::domain_error("gamma_q: invalid arguments");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - detail::gamma_p_series(a, x);
  return detail::gamma_q_cf(a, x);
}

// Regularized incomplete beta I_x(a,b).
inline double beta_inc(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                    a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(ln);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * detail::betacf(a, b, x) / a;
  }
  return 1.0 - front * detail::betacf(b, a, 1.0 - x) / b;
}

// P(Chi2(df) > x).
inline double chi2_sf(double x, double df) {
  if (x <= 0.0) return 1.0;
  return gamma_q(df / 2.0, x / 2.0);
}

// P(N(0,1) > z).
inline double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

// Two-sided p-value for a t statistic with df degrees of freedom.
inline double student_t_two_sided(double t, double df) {
  if (df <= 0.0) return 1.0;
  const double x = df / (df + t * t);
  return beta_inc(df / 2.0, 0.5, x);
}

// SplitMix-style mixing; gives every pipeline stage its own named stream
// derived from the single configured seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t s = seed ^ (stream + 0x9e3779b97f4a7c15ULL);
  s ^= s >> 30;
  s *= 0xbf58476d1ce4e5b9ULL;
  s ^= s >> 27;
  s *= 0x94d049bb133111ebULL;
  s ^= s >> 31;
  return s;
}

// Seedable generator with distribution sampling implemented in-repo so
// streams are identical across platforms and standard library versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_mix_(seed) {}

  // Uniform in [0,1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * (1.0 / 9007199254740992.0);
  }

  // Standard normal via Box-Muller, one value per pair of uniforms kept cached.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    cached_ = r * std::sin(theta);
    has_cached_ = true;
    return r * std::cos(theta);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Uniform integer in [0, n).
  std::size_t below(std::size_t n) {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
  }

  // Fisher-Yates shuffle.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  // Named sub-stream derivation so all pipeline randomness flows from one seed.
  Rng derive(std::uint64_t stream) const { return Rng(derive_seed(seed_mix_, stream)); }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_mix_ = 0;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace pathlasso
