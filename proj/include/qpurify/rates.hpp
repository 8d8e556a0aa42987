#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qpurify/combinatorics.hpp"
#include "qpurify/errors.hpp"

namespace qpurify::rates {

inline constexpr std::size_t kSequenceCap = 10'000'000;
inline constexpr double kSeriesTolerance = 1e-12;

/// Capacity value that is either finite or flagged infinite (eta = 1).
class Capacity {
 public:
  static Capacity finite(double v) { return Capacity(v, false); }
  static Capacity infinite() { return Capacity(0.0, true); }

  bool is_infinite() const { return infinite_; }
  std::optional<double> finite_value() const {
    return infinite_ ? std::nullopt : std::optional<double>(value_);
  }
  double value() const {
    if (infinite_) throw std::logic_error("Capacity: value() on infinite capacity");
    return value_;
  }

 private:
  Capacity(double v, bool inf) : value_(v), infinite_(inf) {}
  double value_;
  bool infinite_;
};

inline void check_eta(double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::domain_error("transmissivity outside [0, 1]");
}

/// Repeaterless two-way capacity -log2(1 - eta) of the pure-loss channel.
inline Capacity plob_capacity(double eta) {
  check_eta(eta);
  if (eta == 1.0) return Capacity::infinite();
  return Capacity::finite(-std::log2(1.0 - eta));
}

/// Fiber segment with exponential loss.
struct LinkSpec {
  double distance_km = 0.0;
  double loss_db_per_km = 0.2;

  void validate() const {
    if (!(distance_km >= 0.0) || !std::isfinite(distance_km))
      throw std::domain_error("LinkSpec: distance must be a finite nonnegative number");
    if (!(loss_db_per_km > 0.0) || !std::isfinite(loss_db_per_km))
      throw std::domain_error("LinkSpec: loss coefficient must be positive");
  }
  double transmissivity() const {
    validate();
    return std::pow(10.0, -loss_db_per_km * distance_km / 10.0);
  }
};

struct RateResult {
  double rate = 0.0;
  double probability = 0.0;
  double entanglement = 0.0;
  Capacity capacity = Capacity::finite(0.0);
  std::optional<double> ratio;
};

/// Fills capacity and ratio for a rate obtained at transmissivity eta.
inline RateResult make_rate_result(double rate, double probability, double entanglement,
                                   double eta) {
  RateResult r;
  r.rate = rate;
  r.probability = probability;
  r.entanglement = entanglement;
  r.capacity = plob_capacity(eta);
  if (auto c = r.capacity.finite_value(); c && *c > 0.0) r.ratio = rate / *c;
  return r;
}

/// Reverse coherent information of the heralded (k, j) state on m rails.
/// Takes no eta or chi: the heralded entanglement does not depend on them.
inline double rci_heralded(unsigned k, unsigned j, unsigned m) {
  if (j > k) throw std::domain_error("rci_heralded: j > k");
  return log2_binom_ratio(k, j, m);
}

inline RateResult single_shot_rate(const CodeParams& p, double eta) {
  check_eta(eta);
  const double prob = std::pow(eta, p.k);
  const double ent = log2_multiset_dim(p);
  return make_rate_result(prob * ent / p.m, prob, ent, eta);
}

/// log2 d_{k,m} for 0 <= k <= k_max, 1 <= m <= m_max, built with exact integers.
class Log2DimTable {
 public:
  Log2DimTable(unsigned k_max, unsigned m_max)
      : k_max_(k_max), m_max_(m_max), v_((k_max + 1) * (m_max + 1), 0.0) {
    for (unsigned m = 1; m <= m_max; ++m) {
      BigInt d = 1;
      for (unsigned k = 1; k <= k_max; ++k) {
        d *= k + m - 1;
        d /= k;
        v_[k * (m_max + 1) + m] = detail::log2_big(d);
      }
    }
  }
  unsigned k_max() const { return k_max_; }
  unsigned m_max() const { return m_max_; }
  double operator()(unsigned k, unsigned m) const { return v_[k * (m_max_ + 1) + m]; }

 private:
  unsigned k_max_, m_max_;
  std::vector<double> v_;
};

struct OptimizedRate {
  CodeParams code;
  RateResult result;
};

/// Argmax of rate_fn(k, m) over 1 <= k <= k_max, 2 <= m <= m_max.
/// Ties go to the smaller k, then the smaller m.
template <class RateFn>
std::pair<CodeParams, double> argmax_code(unsigned k_max, unsigned m_max, RateFn&& rate_fn) {
  if (k_max < 1 || m_max < 2) throw std::invalid_argument("argmax_code: need k_max >= 1, m_max >= 2");
  CodeParams best{1, 2};
  double best_rate = rate_fn(1u, 2u);
  for (unsigned k = 1; k <= k_max; ++k) {
    for (unsigned m = 2; m <= m_max; ++m) {
      const double r = rate_fn(k, m);
      if (r > best_rate) {
        best_rate = r;
        best = CodeParams{k, m};
      }
    }
  }
  return {best, best_rate};
}

inline OptimizedRate optimize_single_shot(double eta, unsigned k_max, unsigned m_max,
                                          const Log2DimTable* table = nullptr) {
  check_eta(eta);
  std::optional<Log2DimTable> local;
  if (table == nullptr || table->k_max() < k_max || table->m_max() < m_max) {
    local.emplace(k_max, m_max);
    table = &*local;
  }
  std::vector<double> eta_pow(k_max + 1, 1.0);
  for (unsigned k = 1; k <= k_max; ++k) eta_pow[k] = std::pow(eta, k);
  auto [code, rate] = argmax_code(k_max, m_max, [&](unsigned k, unsigned m) {
    return eta_pow[k] * (*table)(k, m) / m;
  });
  (void)rate;
  return {code, single_shot_rate(code, eta)};
}

/// Sequence of (k_s, j_s) outcomes across purification rounds.
struct RoundOutcome {
  std::vector<std::pair<unsigned, unsigned>> rounds;
  bool success = false;

  /// Checks the ordering constraints and the success/open terminal rule.
  bool is_consistent() const {
    if (rounds.empty()) return false;
    for (std::size_t s = 0; s < rounds.size(); ++s) {
      const auto [k, j] = rounds[s];
      if (j > k) return false;
      if (s + 1 < rounds.size()) {
        const auto [k2, j2] = rounds[s + 1];
        if (k2 > k || j2 > j) return false;
        if (k - k2 < j - j2) return false;
        if (k <= j) return false;
      }
    }
    const auto [kn, jn] = rounds.back();
    return success ? kn == jn : kn > jn;
  }
};

struct OutcomeWeight {
  double probability = 0.0;
  double entanglement = 0.0;
};

/// Depth-first enumeration of all round outcomes for k1 photons on m rails,
/// up to m-1 rounds. visit(outcome, weight) is called for every terminal
/// sequence; open sequences at the last round are reported with success=false.
template <class Visit>
std::size_t visit_round_outcomes(unsigned k1, unsigned m, double eta, Visit&& visit,
                                 std::size_t cap = kSequenceCap) {
  check_eta(eta);
  if (k1 < 1 || m < 2) throw std::invalid_argument("visit_round_outcomes: need k1 >= 1, m >= 2");
  const unsigned last = m - 1;
  // d on m-n+1 rails for k photons, by n.
  auto d = [&](unsigned k, unsigned n) { return binomial_double(k + m - n, k); };
  const double d1 = d(k1, 1);

  std::size_t count = 0;
  RoundOutcome out;
  std::function<void(unsigned, double)> descend = [&](unsigned n, double prefix) {
    const auto [kn, jn] = out.rounds.back();
    const bool done = kn == jn;
    if (done || n == last) {
      if (++count > cap)
        throw SizeError("iterative enumeration exceeds cap of " + std::to_string(cap) +
                        " sequences");
      out.success = done;
      OutcomeWeight w;
      w.probability = prefix * (d(kn, n) / d1) * binomial_double(kn, jn);
      w.entanglement = done ? log2_binomial(kn + m - n, kn) : 0.0;
      visit(static_cast<const RoundOutcome&>(out), w);
      return;
    }
    for (unsigned k2 = 0; k2 <= kn; ++k2) {
      const unsigned j_lo = jn > kn - k2 ? jn - (kn - k2) : 0;
      const unsigned j_hi = std::min(jn, k2);
      for (unsigned j2 = j_lo; j2 <= j_hi; ++j2) {
        out.rounds.emplace_back(k2, j2);
        descend(n + 1, prefix * binomial_double(kn - k2, jn - j2));
        out.rounds.pop_back();
      }
    }
  };

  for (unsigned j1 = 0; j1 <= k1; ++j1) {
    const double pb = herald_prob_bob(k1, j1, eta);
    if (pb == 0.0) continue;
    out.rounds.assign(1, {k1, j1});
    descend(1, pb / binomial_double(k1, j1));
  }
  return count;
}

struct IterativeRateResult {
  RateResult result;
  std::vector<double> round_rate;
  std::vector<double> round_probability;
  double residual_failure_probability = 0.0;
  std::size_t sequences = 0;
};

/// Finite-m iterative rate: sum of P*E over all outcome sequences, divided by m.
inline IterativeRateResult iterative_rate(unsigned k1, unsigned m, double eta,
                                          std::size_t cap = kSequenceCap) {
  IterativeRateResult r;
  r.round_rate.assign(m - 1, 0.0);
  r.round_probability.assign(m - 1, 0.0);
  double pe = 0.0, ps = 0.0;
  r.sequences = visit_round_outcomes(
      k1, m, eta,
      [&](const RoundOutcome& o, const OutcomeWeight& w) {
        const std::size_t n = o.rounds.size() - 1;
        if (!o.success) {
          r.residual_failure_probability += w.probability;
          return;
        }
        ps += w.probability;
        pe += w.probability * w.entanglement;
        r.round_probability[n] += w.probability;
        r.round_rate[n] += w.probability * w.entanglement / m;
      },
      cap);
  r.result = make_rate_result(pe / m, ps, ps > 0.0 ? pe / ps : 0.0, eta);
  return r;
}

struct RoundOneRci {
  double success = 0.0;  // S1
  double failure = 0.0;  // F1
};

/// Average round-one RCI per channel use, Alice's k1 prepared offline.
inline RoundOneRci avg_rci_round1(unsigned k1, unsigned m, double eta) {
  check_eta(eta);
  if (m < 1) throw std::invalid_argument("avg_rci_round1: m must be at least 1");
  RoundOneRci r;
  if (k1 == 0) return r;
  r.success = herald_prob_bob(k1, k1, eta) * log2_multiset_dim({k1, m}) / m;
  for (unsigned j = 0; j < k1; ++j) {
    const double p = herald_prob_bob(k1, j, eta);
    if (p > 0.0) r.failure += p * rci_heralded(k1, j, m);
  }
  r.failure /= m;
  return r;
}

namespace detail {

/// Sums term(k) for k = 0, 1, ... until the geometric tail bound is below
/// tol times the partial sum. Terms must eventually decay with ratio < 1.
template <class Term>
double sum_geometric_tail(Term&& term, double tol, std::size_t max_terms, const char* who) {
  double sum = 0.0;
  double prev = term(0u);
  sum += prev;
  for (std::size_t k = 1; k < max_terms; ++k) {
    const double t = term(static_cast<unsigned>(k));
    sum += t;
    if (prev > 0.0 && t > 0.0) {
      const double ratio = t / prev;
      if (ratio < 1.0 && t * ratio / (1.0 - ratio) < tol * sum) return sum;
    }
    prev = t;
  }
  throw ToleranceError(std::string(who) + ": series did not converge");
}

}  // namespace detail

/// Round-one RCI averaged over Alice's squeezed-vacuum outcome distribution.
inline RoundOneRci avg_rci_round1_squeezed(const SqueezingSpec& s, unsigned m, double eta,
                                           double tol = kSeriesTolerance) {
  RoundOneRci r;
  if (s.chi() == 0.0) return r;
  r.success = detail::sum_geometric_tail(
      [&](unsigned k) { return herald_prob_alice({k, m}, s) * avg_rci_round1(k, m, eta).success; },
      tol, 10'000'000, "avg_rci_round1_squeezed");
  r.failure = detail::sum_geometric_tail(
      [&](unsigned k) { return herald_prob_alice({k, m}, s) * avg_rci_round1(k, m, eta).failure; },
      tol, 10'000'000, "avg_rci_round1_squeezed");
  return r;
}

/// Gamma_1: entanglement after Alice's code projection relative to m TMSV pairs.
inline double entanglement_ratio_round1(const SqueezingSpec& s, unsigned m,
                                        double tol = kSeriesTolerance,
                                        std::size_t max_terms = 10'000'000) {
  if (!(s.chi() > 0.0)) throw std::domain_error("entanglement_ratio_round1: chi must be positive");
  if (m < 1) throw std::invalid_argument("entanglement_ratio_round1: m must be at least 1");
  const double sum = detail::sum_geometric_tail(
      [&](unsigned k) { return herald_prob_alice({k, m}, s) * log2_multiset_dim({k, m}); }, tol,
      max_terms, "entanglement_ratio_round1");
  return sum / (m * tmsv_entropy(s));
}

struct RoundRatio {
  double value = 0.0;
  bool degenerate = false;
};

/// Gamma for round n >= 2 given k_prev photons surviving on m-n+1 rails.
inline RoundRatio entanglement_ratio_round_n(unsigned k_prev, unsigned m, unsigned n) {
  if (n < 2) throw std::invalid_argument("entanglement_ratio_round_n: n must be at least 2");
  if (m < n) throw std::invalid_argument("entanglement_ratio_round_n: need m >= n");
  const double l2_prev = log2_binomial(k_prev + m - n + 1, k_prev);
  if (k_prev == 0 || l2_prev == 0.0) return {0.0, true};
  double num = 0.0;
  for (unsigned kn = 0; kn <= k_prev; ++kn) {
    const double l2 = log2_binomial(kn + m - n, kn);
    num += std::exp2(l2 - l2_prev) * l2;
  }
  return {num / l2_prev, false};
}

struct Balance {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Weighted round-n RCI (lhs) against the previous round's heralded RCI (rhs).
inline Balance round_balance_check(unsigned k_prev, unsigned j_prev, unsigned n, unsigned m) {
  if (!(j_prev >= 1 && j_prev < k_prev))
    throw std::invalid_argument("round_balance_check: need 1 <= j_prev < k_prev");
  if (n < 2) throw std::invalid_argument("round_balance_check: n must be at least 2");
  if (m < n) throw std::invalid_argument("round_balance_check: need m >= n");
  Balance b;
  for (unsigned kn = 0; kn <= k_prev; ++kn) {
    const unsigned j_lo = j_prev > k_prev - kn ? j_prev - (k_prev - kn) : 0;
    const unsigned j_hi = std::min(j_prev, kn);
    for (unsigned jn = j_lo; jn <= j_hi; ++jn) {
      b.lhs += binomial_double(kn + m - n, kn) * binomial_double(kn, jn) *
               binomial_double(k_prev - kn, j_prev - jn) * rci_heralded(kn, jn, m - n + 1);
    }
  }
  b.rhs = binomial_double(k_prev + m - n + 1, k_prev) * binomial_double(k_prev, j_prev) *
          rci_heralded(k_prev, j_prev, m - n + 2);
  return b;
}

struct ChainRateResult {
  RateResult result;  // capacity and ratio refer to the end-to-end channel
  unsigned links = 1;
  double link_eta = 1.0;
  Capacity link_capacity = Capacity::infinite();
};

/// Single-shot rate over an equidistant chain with ideal memories and swapping.
inline ChainRateResult repeater_chain_rate(const LinkSpec& total, unsigned links,
                                           const CodeParams& p) {
  if (links < 1) throw std::invalid_argument("repeater_chain_rate: links must be at least 1");
  LinkSpec link = total;
  link.distance_km = total.distance_km / links;
  ChainRateResult c;
  c.links = links;
  c.link_eta = link.transmissivity();
  const RateResult r = single_shot_rate(p, c.link_eta);
  c.link_capacity = r.capacity;
  c.result = make_rate_result(r.rate, r.probability, r.entanglement, total.transmissivity());
  return c;
}

struct OptimizedChain {
  CodeParams code;
  ChainRateResult chain;
};

inline OptimizedChain optimize_repeater_chain(const LinkSpec& total, unsigned links,
                                              unsigned k_max, unsigned m_max,
                                              const Log2DimTable* table = nullptr) {
  if (links < 1) throw std::invalid_argument("optimize_repeater_chain: links must be at least 1");
  LinkSpec link = total;
  link.distance_km = total.distance_km / links;
  const OptimizedRate best = optimize_single_shot(link.transmissivity(), k_max, m_max, table);
  return {best.code, repeater_chain_rate(total, links, best.code)};
}

struct CrossoverSearch {
  double start_km = 0.01;
  double stop_km = 500.0;
  double step_km = 0.01;
  int bisection_steps = 60;
};

/// Smallest distance where the optimized chain rate exceeds the end-to-end
/// capacity: grid scan, then bisection inside the first crossing cell.
inline std::optional<double> find_plob_crossover(unsigned links, double loss_db_per_km,
                                                 unsigned k_max, unsigned m_max,
                                                 const CrossoverSearch& search = {}) {
  const Log2DimTable table(k_max, m_max);
  auto margin = [&](double km) {
    const auto c = optimize_repeater_chain({km, loss_db_per_km}, links, k_max, m_max, &table);
    const auto cap = c.chain.result.capacity.finite_value();
    if (!cap) return -1.0;
    return c.chain.result.rate - *cap;
  };
  if (!(search.step_km > 0.0)) throw std::invalid_argument("find_plob_crossover: step must be positive");
  const auto steps = static_cast<long>(std::floor((search.stop_km - search.start_km) / search.step_km));
  double prev = search.start_km;
  if (margin(prev) > 0.0) return prev;
  for (long i = 1; i <= steps; ++i) {
    const double x = search.start_km + i * search.step_km;
    if (margin(x) > 0.0) {
      double lo = prev, hi = x;
      for (int b = 0; b < search.bisection_steps; ++b) {
        const double mid = 0.5 * (lo + hi);
        (margin(mid) > 0.0 ? hi : lo) = mid;
      }
      return hi;
    }
    prev = x;
  }
  return std::nullopt;
}

struct SeriesTerm {
  double success = 0.0;  // S_n
  double failure = 0.0;  // F_n
};

struct IterationSeries {
  std::vector<SeriesTerm> terms;
  double total_success = 0.0;
  double residual = 0.0;
};

/// Large-k recurrence S_n + F_n = (m-1)/m * F_{n-1}, F_0 = C, over m-1
/// rounds. Each round's mass is split into success and recycled failure by
/// success_fraction; the last round's failure is the residual.
inline IterationSeries iteration_capacity_series(unsigned m, double eta,
                                                 double success_fraction = 0.5) {
  if (m < 2) throw std::invalid_argument("iteration_capacity_series: m must be at least 2");
  if (!(success_fraction > 0.0 && success_fraction <= 1.0))
    throw std::domain_error("iteration_capacity_series: success fraction outside (0, 1]");
  const Capacity cap = plob_capacity(eta);
  if (cap.is_infinite()) throw std::domain_error("iteration_capacity_series: eta must be below 1");
  const double a = static_cast<double>(m - 1) / m;
  IterationSeries s;
  double carried = cap.value();
  for (unsigned n = 1; n < m; ++n) {
    const double mass = a * carried;
    SeriesTerm t{success_fraction * mass, (1.0 - success_fraction) * mass};
    s.total_success += t.success;
    carried = t.failure;
    s.terms.push_back(t);
  }
  s.residual = carried;
  return s;
}

}  // namespace qpurify::rates
