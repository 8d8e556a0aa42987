#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "qpurify/errors.hpp"

namespace qpurify {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Photon counts per rail.
using Occupation = std::vector<unsigned>;

inline constexpr unsigned kLog2ExactThreshold = 1000;
inline constexpr std::size_t kEnumerationCap = 1'000'000;

/// k photons spread over m rails.
struct CodeParams {
  unsigned k = 0;
  unsigned m = 1;

  CodeParams() = default;
  CodeParams(unsigned k_, unsigned m_) : k(k_), m(m_) {
    if (m == 0) throw std::invalid_argument("CodeParams: m must be at least 1");
  }

  friend bool operator==(const CodeParams&, const CodeParams&) = default;
};

/// Two-mode squeezing parameter chi with its derived quantities.
class SqueezingSpec {
 public:
  explicit SqueezingSpec(double chi) : chi_(chi) {
    if (!(chi >= 0.0 && chi < 1.0))
      throw std::domain_error("SqueezingSpec: chi must lie in [0, 1)");
  }

  double chi() const { return chi_; }
  double r() const { return std::atanh(chi_); }
  double mean_photons() const { return chi_ * chi_ / (1.0 - chi_ * chi_); }
  double lambda() const { return (1.0 + chi_ * chi_) / (1.0 - chi_ * chi_); }
  double nu() const { return lambda(); }

 private:
  double chi_;
};

namespace detail {

inline double log2_big(const BigInt& x) {
  if (x <= 0) throw std::domain_error("log2 of non-positive integer");
  const std::size_t bits = boost::multiprecision::msb(x) + 1;
  if (bits <= 1000) return std::log2(x.convert_to<double>());
  const std::size_t shift = bits - 64;
  const BigInt top = x >> shift;
  return std::log2(top.convert_to<double>()) + static_cast<double>(shift);
}

inline unsigned __int128 binomial_u128(unsigned n, unsigned r) {
  unsigned __int128 c = 1;
  for (unsigned i = 1; i <= r; ++i) c = c * (n - r + i) / i;
  return c;
}

inline double log2_binomial_lgamma(unsigned n, unsigned r) {
  const double v = std::lgamma(n + 1.0) - std::lgamma(r + 1.0) - std::lgamma(n - r + 1.0);
  return v / std::log(2.0);
}

}  // namespace detail

/// Exact C(n, r); zero when r > n.
inline BigInt binomial(unsigned n, unsigned r) {
  if (r > n) return 0;
  r = std::min(r, n - r);
  BigInt c = 1;
  for (unsigned i = 1; i <= r; ++i) {
    c *= n - r + i;
    c /= i;
  }
  return c;
}

/// log2 C(n, r). Exact below the threshold, log-gamma above it.
inline double log2_binomial(unsigned n, unsigned r, unsigned threshold = kLog2ExactThreshold) {
  if (r > n) throw std::domain_error("log2_binomial: r > n");
  r = std::min(r, n - r);
  if (r == 0) return 0.0;
  if (n > threshold) return detail::log2_binomial_lgamma(n, r);
  if (n <= 120) return std::log2(static_cast<long double>(detail::binomial_u128(n, r)));
  return detail::log2_big(binomial(n, r));
}

/// Binomial as a double, exact up to rounding for moderate n.
inline double binomial_double(unsigned n, unsigned r) {
  if (r > n) return 0.0;
  if (n <= 120) return static_cast<double>(detail::binomial_u128(n, std::min(r, n - r)));
  return std::exp2(log2_binomial(n, r));
}

inline BigInt multiset_dim(const CodeParams& p) { return binomial(p.k + p.m - 1, p.k); }

inline double log2_multiset_dim(const CodeParams& p, unsigned threshold = kLog2ExactThreshold) {
  return log2_binomial(p.k + p.m - 1, p.k, threshold);
}

enum class CodewordOrder { reverse_lexicographic, lexicographic };

/// Calls f on every code word of p in the requested order.
template <class F>
void for_each_codeword(const CodeParams& p, F&& f,
                       CodewordOrder order = CodewordOrder::reverse_lexicographic) {
  Occupation n(p.m, 0);
  std::function<void(unsigned, unsigned)> rec = [&](unsigned rail, unsigned left) {
    if (rail + 1 == p.m) {
      n[rail] = left;
      f(static_cast<const Occupation&>(n));
      return;
    }
    for (unsigned t = 0; t <= left; ++t) {
      n[rail] = order == CodewordOrder::reverse_lexicographic ? left - t : t;
      rec(rail + 1, left - n[rail]);
    }
  };
  rec(0, p.k);
}

inline std::vector<Occupation> enumerate_codewords(
    const CodeParams& p, std::size_t cap = kEnumerationCap,
    CodewordOrder order = CodewordOrder::reverse_lexicographic) {
  const BigInt d = multiset_dim(p);
  if (d > cap)
    throw SizeError("enumerate_codewords: dimension " + d.str() + " exceeds cap " +
                    std::to_string(cap));
  std::vector<Occupation> out;
  out.reserve(d.convert_to<std::size_t>());
  for_each_codeword(p, [&](const Occupation& n) { out.push_back(n); }, order);
  return out;
}

inline double herald_prob_alice(const CodeParams& p, const SqueezingSpec& s) {
  const double chi = s.chi();
  if (chi == 0.0) return p.k == 0 ? 1.0 : 0.0;
  const double ln = p.m * std::log1p(-chi * chi) + 2.0 * p.k * std::log(chi) +
                    log2_multiset_dim(p) * std::log(2.0);
  return std::exp(ln);
}

/// Probability that j of k photons survive a channel of transmissivity eta.
inline double herald_prob_bob(unsigned k, unsigned j, double eta) {
  if (j > k) throw std::domain_error("herald_prob_bob: j > k");
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::domain_error("herald_prob_bob: eta outside [0, 1]");
  if (eta == 0.0) return j == 0 ? 1.0 : 0.0;
  if (eta == 1.0) return j == k ? 1.0 : 0.0;
  if (k <= 120) return binomial_double(k, j) * std::pow(1.0 - eta, k - j) * std::pow(eta, j);
  const double ln = log2_binomial(k, j) * std::log(2.0) + (k - j) * std::log1p(-eta) +
                    j * std::log(eta);
  return std::exp(ln);
}

/// Sum over code words of 1 / prod_i C(k, n_i), by enumeration.
inline Rational resource_norm_S(const CodeParams& p, std::size_t cap = kEnumerationCap) {
  if (multiset_dim(p) > cap) throw SizeError("resource_norm_S: dimension exceeds cap");
  std::vector<BigInt> row(p.k + 1);
  for (unsigned i = 0; i <= p.k; ++i) row[i] = binomial(p.k, i);
  Rational sum = 0;
  for_each_codeword(p, [&](const Occupation& n) {
    BigInt prod = 1;
    for (unsigned ni : n) prod *= row[ni];
    sum += Rational(BigInt(1), prod);
  });
  return sum;
}

/// Closed forms of resource_norm_S for k in 1..4.
inline std::optional<Rational> resource_norm_S_closed(const CodeParams& p) {
  const BigInt m = p.m;
  switch (p.k) {
    case 1: return Rational(m);
    case 2: return Rational(BigInt(7 * m + m * m), BigInt(8));
    case 3: return Rational(BigInt(146 * m + 15 * m * m + m * m * m), BigInt(162));
    case 4:
      return Rational(BigInt(17198 * m + 1153 * m * m + 78 * m * m * m + 3 * m * m * m * m),
                      BigInt(18432));
    default: return std::nullopt;
  }
}

/// C(k+m-1, j) / C(k, j) as an exact rational.
inline Rational binom_ratio(unsigned k, unsigned j, unsigned m) {
  if (j > k) throw std::domain_error("binom_ratio: j > k");
  if (m == 0) throw std::invalid_argument("binom_ratio: m must be at least 1");
  return Rational(binomial(k + m - 1, j), binomial(k, j));
}

/// log2 of binom_ratio via prod_{i=1}^{m-1} (k+i)/(k-j+i); stable for any k.
inline double log2_binom_ratio(unsigned k, unsigned j, unsigned m) {
  if (j > k) throw std::domain_error("log2_binom_ratio: j > k");
  if (m == 0) throw std::invalid_argument("log2_binom_ratio: m must be at least 1");
  double s = 0.0;
  for (unsigned i = 1; i < m; ++i)
    s += std::log2(static_cast<double>(k + i) / static_cast<double>(k - j + i));
  return s;
}

/// Large-k limit (1 - j/k)^-(m-1) of binom_ratio.
inline double asymptotic_binom_ratio(unsigned k, unsigned j, unsigned m) {
  if (j > k) throw std::domain_error("asymptotic_binom_ratio: j > k");
  if (j == k) throw std::domain_error("asymptotic_binom_ratio: diverges at j = k");
  if (m == 0) throw std::invalid_argument("asymptotic_binom_ratio: m must be at least 1");
  return std::pow(1.0 - static_cast<double>(j) / k, -static_cast<double>(m - 1));
}

/// G(x) = (x+1) log2(x+1) - x log2 x, with G(0) = 0.
inline double g_function(double x) {
  if (x < 0.0) throw std::domain_error("g_function: negative argument");
  if (x == 0.0) return 0.0;
  return (x + 1.0) * std::log2(x + 1.0) - x * std::log2(x);
}

/// Entanglement of one TMSV pair in ebits.
inline double tmsv_entropy(const SqueezingSpec& s) { return g_function(s.mean_photons()); }

}  // namespace qpurify
