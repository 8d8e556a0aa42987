#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "qpurify/combinatorics.hpp"
#include "qpurify/errors.hpp"
#include "qpurify/fock_channels.hpp"
#include "qpurify/fock_state.hpp"

namespace qpurify::fock {

namespace detail {

inline std::vector<std::size_t> range(std::size_t begin, std::size_t end) {
  std::vector<std::size_t> v;
  for (std::size_t i = begin; i < end; ++i) v.push_back(i);
  return v;
}

}  // namespace detail

struct TmsvState {
  FockArray state;
  double tail_weight = 0.0;
  std::optional<std::string> warning;
};

/// sqrt(1-chi^2) sum_n chi^n |n, n> up to the cutoff.
inline TmsvState make_tmsv(const SqueezingSpec& s, unsigned cutoff) {
  if (cutoff < 1) throw std::invalid_argument("make_tmsv: cutoff must be at least 1");
  const double chi = s.chi();
  FockArray psi(2, cutoff);
  const double norm = std::sqrt(1.0 - chi * chi);
  for (unsigned n = 0; n <= cutoff; ++n) {
    const double a = norm * std::pow(chi, n);
    if (a != 0.0) psi.set({n, n}, a);
  }
  TmsvState out{psi, chi == 0.0 ? 0.0 : std::pow(chi, 2.0 * (cutoff + 1)), std::nullopt};
  if (out.tail_weight > kTruncationTolerance)
    out.warning = "make_tmsv: truncated tail weight " + format_double(out.tail_weight) +
                  " exceeds tolerance";
  return out;
}

/// m TMSV pairs ordered as Alice's rails A_1..A_m followed by B_1..B_m.
inline FockArray make_tmsv_rails(const SqueezingSpec& s, unsigned m, unsigned cutoff) {
  const FockArray pair = make_tmsv(s, cutoff).state;
  FockArray out = pair;
  for (unsigned i = 1; i < m; ++i) out = out.tensor(pair);
  std::vector<std::size_t> order;
  for (unsigned i = 0; i < m; ++i) order.push_back(2 * i);
  for (unsigned i = 0; i < m; ++i) order.push_back(2 * i + 1);
  return out.permuted(order);
}

/// Equal superposition of |n>_A |n>_B over all code words of (k, m).
inline FockArray alice_projected_state(const CodeParams& p, unsigned cutoff = 0) {
  FockArray psi(2 * p.m, std::max(cutoff, p.k));
  const auto words = enumerate_codewords(p);
  const double a = 1.0 / std::sqrt(static_cast<double>(words.size()));
  for (const auto& n : words) {
    Occupation o = n;
    o.insert(o.end(), n.begin(), n.end());
    psi.set(o, a);
  }
  return psi;
}

namespace detail {

/// All l with sum k_lost and l_i <= n_i.
inline void for_each_loss_pattern(const Occupation& n, unsigned k_lost,
                                  const std::function<void(const Occupation&)>& f) {
  Occupation l(n.size(), 0);
  std::function<void(std::size_t, unsigned)> rec = [&](std::size_t i, unsigned left) {
    if (i + 1 == n.size()) {
      if (left <= n[i]) {
        l[i] = left;
        f(l);
      }
      return;
    }
    for (unsigned x = 0; x <= std::min(left, n[i]); ++x) {
      l[i] = x;
      rec(i + 1, left - x);
    }
  };
  rec(0, k_lost);
}

inline FockArray heralded_sum(unsigned k1, unsigned j1, unsigned m, double prefactor) {
  if (j1 > k1) throw std::domain_error("heralded state: j1 > k1");
  FockArray psi(3 * m, k1);
  for (const auto& n : enumerate_codewords({k1, m})) {
    for_each_loss_pattern(n, k1 - j1, [&](const Occupation& l) {
      double c = 1.0;
      Occupation o = n;
      for (unsigned i = 0; i < m; ++i) {
        c *= binomial_double(n[i], l[i]);
        o.push_back(n[i] - l[i]);
      }
      o.insert(o.end(), l.begin(), l.end());
      psi.set(o, prefactor * std::sqrt(c));
    });
  }
  return psi;
}

}  // namespace detail

/// Global A, B, e state heralded by Alice's k1 and Bob's j1, renormalized.
/// Modes: A_1..A_m, B_1..B_m, e_1..e_m.
inline FockArray heralded_state_direct(unsigned k1, unsigned j1, unsigned m) {
  const double norm2 = std::exp2(log2_multiset_dim({k1, m}) + log2_binomial(k1, j1));
  return detail::heralded_sum(k1, j1, m, 1.0 / std::sqrt(norm2));
}

/// The same state before renormalization; its squared norm is
/// herald_prob_alice * herald_prob_bob.
inline FockArray heralded_state_unnormalized(unsigned k1, unsigned j1, unsigned m,
                                             const SqueezingSpec& s, double eta) {
  const double chi = s.chi();
  const double pre = std::pow(1.0 - chi * chi, m / 2.0) * std::pow(chi, k1) *
                     std::pow(1.0 - eta, (k1 - j1) / 2.0) * std::pow(eta, j1 / 2.0);
  return detail::heralded_sum(k1, j1, m, pre);
}

struct SimulatedHerald {
  double probability = 0.0;
  DensityOperator state_ab;
};

/// Channel-simulation route to the heralded A-B state: m TMSV pairs, Alice's
/// QND, Kraus pure loss on each of Bob's rails, Bob's QND. With
/// channel_first the loss acts before Alice's measurement.
inline SimulatedHerald heralded_state_simulated(unsigned k1, unsigned j1, unsigned m,
                                                const SqueezingSpec& s, double eta,
                                                unsigned cutoff, bool channel_first = false) {
  const FockArray rails = make_tmsv_rails(s, m, cutoff);
  const auto a_modes = detail::range(0, m);
  const auto b_modes = detail::range(m, 2 * m);
  DensityOperator rho = channel_first ? DensityOperator::from_pure(rails)
                                      : DensityOperator::from_pure(project_total(rails, a_modes, k1));
  for (std::size_t b : b_modes) rho = apply_pure_loss(rho, b, eta);
  if (channel_first) rho = project_total(rho, a_modes, k1);
  rho = project_total(rho, b_modes, j1);
  const double p = rho.trace();
  return {p, p > 0 ? rho.normalized() : rho};
}

/// Sum over code words of |mu>_A |mu code>_rails / sqrt(d); mode 0 is A.
inline FockArray encoded_maximally_entangled(const CodeParams& p,
                                             CodewordOrder order = CodewordOrder::reverse_lexicographic) {
  const auto words = enumerate_codewords(p, kEnumerationCap, order);
  const unsigned d = static_cast<unsigned>(words.size());
  FockArray psi(1 + p.m, std::max(p.k, d - 1));
  for (unsigned mu = 0; mu < d; ++mu) {
    Occupation o{mu};
    o.insert(o.end(), words[mu].begin(), words[mu].end());
    psi.set(o, 1.0 / std::sqrt(static_cast<double>(d)));
  }
  return psi;
}

/// Resource state proportional to sum_mu f_mu |mu> |k - n^(mu)>, normalized.
/// Mode 0 is the kept mode, modes 1..m the anticorrelated rails.
inline FockArray build_resource_state(const CodeParams& p,
                                      CodewordOrder order = CodewordOrder::reverse_lexicographic) {
  const auto words = enumerate_codewords(p, kEnumerationCap, order);
  const unsigned d = static_cast<unsigned>(words.size());
  FockArray psi(1 + p.m, std::max(p.k, d - 1));
  for (unsigned mu = 0; mu < d; ++mu) {
    double prod = 1.0;
    Occupation o{mu};
    for (unsigned n : words[mu]) {
      prod *= binomial_double(p.k, n);
      o.push_back(p.k - n);
    }
    psi.set(o, 1.0 / std::sqrt(prod));
  }
  return psi.normalized();
}

/// Thermal-loss channel in front of a photon-number detector. Dark counts
/// enter as the mean photon number the channel adds to a vacuum input.
struct DetectorModel {
  double eta_eff = 1.0;
  double dark_nbar = 0.0;

  void validate() const {
    if (!(eta_eff >= 0.0 && eta_eff <= 1.0)) throw std::domain_error("detector: eta_eff outside [0, 1]");
    if (!(dark_nbar >= 0.0)) throw std::domain_error("detector: dark_nbar must be >= 0");
    if (eta_eff == 1.0 && dark_nbar > 0.0)
      throw std::domain_error("detector: dark counts need eta_eff < 1 in the thermal-loss model");
  }
  bool ideal() const { return eta_eff == 1.0 && dark_nbar == 0.0; }
  double environment_nbar() const { return dark_nbar == 0.0 ? 0.0 : dark_nbar / (1.0 - eta_eff); }

  DensityOperator apply(const DensityOperator& rho, std::size_t mode) const {
    validate();
    if (ideal()) return rho;
    return apply_thermal_loss(rho, mode, eta_eff, environment_nbar());
  }
};

/// Photon-count distribution seen through the detector model.
inline std::vector<double> detector_statistics(const std::vector<double>& photon_distribution,
                                               const DetectorModel& det, unsigned cutoff) {
  det.validate();
  if (photon_distribution.empty()) throw std::invalid_argument("detector_statistics: empty input");
  if (photon_distribution.size() > cutoff + 1u)
    throw std::invalid_argument("detector_statistics: input exceeds cutoff");
  std::vector<Occupation> basis;
  for (unsigned n = 0; n < photon_distribution.size(); ++n) basis.push_back({n});
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(basis.size()),
                                              static_cast<Eigen::Index>(basis.size()));
  for (std::size_t n = 0; n < basis.size(); ++n)
    m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)) = photon_distribution[n];
  const DensityOperator out = det.apply(DensityOperator(1, cutoff, std::move(basis), std::move(m)), 0);
  std::vector<double> q(cutoff + 1, 0.0);
  for (std::size_t i = 0; i < out.dim(); ++i)
    q[out.basis()[i][0]] = out.matrix()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real();
  return q;
}

/// Channel and detector imperfections for the linear-optics circuit.
struct ChannelModel {
  double eta = 1.0;
  double nbar = 0.0;
  double eta_eff = 1.0;
  double dark_nbar = 0.0;
  std::vector<double> rail_eta;  // optional per-rail transmissivities; overrides eta

  void validate() const {
    if (!(eta >= 0.0 && eta <= 1.0)) throw std::domain_error("channel: eta outside [0, 1]");
    if (!(nbar >= 0.0)) throw std::domain_error("channel: nbar must be >= 0");
    for (double e : rail_eta)
      if (!(e >= 0.0 && e <= 1.0)) throw std::domain_error("channel: rail eta outside [0, 1]");
    detector().validate();
  }
  DetectorModel detector() const { return {eta_eff, dark_nbar}; }
  double eta_of_rail(std::size_t i) const { return rail_eta.empty() ? eta : rail_eta.at(i); }
  bool noisy() const { return nbar > 0.0 || dark_nbar > 0.0; }
};

struct LinearOpticsOptions {
  unsigned cutoff = 0;  // 0 picks one from k, d and the noise level
  unsigned noise_headroom = 4;
  CodewordOrder order = CodewordOrder::reverse_lexicographic;
};

struct LinearOpticsResult {
  double success_probability = 0.0;
  DensityOperator output;  // modes: Alice's kept modes, then B
  double fidelity = 0.0;
  double purity = 0.0;
};

/// Bob's linear-optics decoder. Modes are Alice's kept modes, the m channel
/// rails, the m resource rails and the output mode B. Each channel rail is
/// mixed with its resource rail on a balanced beamsplitter; both outcomes
/// with all k photons in one port are accepted, the one with photons on the
/// channel-rail port followed by the phase (-1)^(k - n_i) on B.
inline LinearOpticsResult linear_optics_purify(const CodeParams& p, const ChannelModel& channel,
                                               const FockArray& input,
                                               const LinearOpticsOptions& opt = {}) {
  channel.validate();
  if (input.modes() <= p.m) throw std::invalid_argument("linear_optics_purify: input needs kept modes plus m rails");
  if (!channel.rail_eta.empty() && channel.rail_eta.size() != p.m)
    throw std::invalid_argument("linear_optics_purify: rail_eta must list m values");
  const std::size_t a_count = input.modes() - p.m;
  const auto words = enumerate_codewords(p, kEnumerationCap, opt.order);
  const unsigned d = static_cast<unsigned>(words.size());
  const unsigned headroom = channel.noisy() ? opt.noise_headroom : 0;
  const unsigned cutoff =
      opt.cutoff ? opt.cutoff : std::max({d - 1, 2 * p.k + headroom, input.cutoff()});

  // Resource with its kept mode moved last, so B follows the resource rails.
  const FockArray omega = build_resource_state(p, opt.order);
  std::vector<std::size_t> omega_order = detail::range(1, p.m + 1);
  omega_order.push_back(0);
  FockArray in(input.modes(), cutoff);
  for (const auto& [n, a] : input.amplitudes()) in.set(n, a);
  const FockArray omega_b_last = omega.permuted(omega_order);
  FockArray om(p.m + 1, cutoff);
  for (const auto& [n, a] : omega_b_last.amplitudes()) om.set(n, a);
  DensityOperator rho = DensityOperator::from_pure(in.normalized().tensor(om));

  for (unsigned i = 0; i < p.m; ++i) {
    const std::size_t rail = a_count + i;
    if (channel.nbar > 0.0) rho = apply_thermal_loss(rho, rail, channel.eta_of_rail(i), channel.nbar);
    else rho = apply_pure_loss(rho, rail, channel.eta_of_rail(i));
  }

  const DetectorModel det = channel.detector();
  for (unsigned i = 0; i < p.m; ++i) {
    const unsigned left = p.m - i;
    const std::size_t rail = a_count, res = a_count + left;
    rho = apply_beamsplitter(rho, rail, res, 0.5);
    rho = det.apply(det.apply(rho, rail), res);
    const DensityOperator keep_res = project_modes(rho, {rail, res}, {0, p.k});
    DensityOperator keep_rail = project_modes(rho, {rail, res}, {p.k, 0});
    const std::size_t b = keep_rail.modes() - 1;
    keep_rail = apply_phase(keep_rail, b, [&](unsigned mu) {
      if (mu >= d) return Complex{1.0};
      return (p.k - words[mu][i]) % 2 ? Complex{-1.0} : Complex{1.0};
    });
    rho = keep_res + keep_rail;
  }

  LinearOpticsResult r{rho.trace(), rho, 0.0, 0.0};
  if (r.success_probability <= 0.0) return r;
  r.output = rho.normalized();
  r.purity = r.output.purity();

  FockArray target(a_count + 1, cutoff);
  std::map<Occupation, unsigned> label;
  for (unsigned mu = 0; mu < d; ++mu) label.emplace(words[mu], mu);
  for (const auto& [n, a] : input.amplitudes()) {
    const Occupation rails(n.begin() + static_cast<long>(a_count), n.end());
    auto it = label.find(rails);
    if (it == label.end()) continue;
    Occupation o(n.begin(), n.begin() + static_cast<long>(a_count));
    o.push_back(it->second);
    target.add(o, a);
  }
  if (target.norm2() > 0.0) r.fidelity = fidelity(r.output, target);
  return r;
}

inline LinearOpticsResult linear_optics_purify(const CodeParams& p, const ChannelModel& channel,
                                               const LinearOpticsOptions& opt = {}) {
  return linear_optics_purify(p, channel, encoded_maximally_entangled(p, opt.order), opt);
}

/// Rate (1/m) P RCI of the linear-optics circuit on the maximally entangled input.
struct LinearOpticsRate {
  double success_probability = 0.0;
  double rci = 0.0;
  double rate = 0.0;
  double fidelity = 0.0;
  double purity = 0.0;
};

inline LinearOpticsRate linear_optics_rate(const CodeParams& p, const ChannelModel& channel,
                                           const LinearOpticsOptions& opt = {}) {
  const auto r = linear_optics_purify(p, channel, opt);
  LinearOpticsRate out;
  out.success_probability = r.success_probability;
  if (r.success_probability <= 0.0) return out;
  out.rci = rci_numeric(r.output, {0});
  out.fidelity = r.fidelity;
  out.purity = r.purity;
  out.rate = r.success_probability * out.rci / p.m;
  return out;
}

struct CsumImage {
  Occupation output;
  double factor = 1.0;
};

/// Tabulated action of the linear-optics CSUM on |c>|t> for k in {1, 2}.
inline CsumImage distorted_csum(unsigned control, unsigned target, unsigned k) {
  static const std::map<std::pair<unsigned, unsigned>, double> k1{
      {{0, 0}, std::sqrt(2.0)}, {{0, 1}, 1.0}, {{1, 0}, 1.0}, {{1, 1}, 1.0}};
  static const std::map<std::pair<unsigned, unsigned>, double> k2{
      {{0, 0}, std::sqrt(2.0)},
      {{0, 1}, 1.0},
      {{0, 2}, 1.0 / std::sqrt(2.0)},
      {{1, 0}, 1.0 / std::sqrt(2.0)},
      {{1, 1}, 1.0 / std::sqrt(2.0)},
      {{1, 2}, std::sqrt(3.0) / (2.0 * std::sqrt(2.0))},
      {{2, 0}, 1.0 / std::sqrt(2.0)},
      {{2, 1}, std::sqrt(3.0) / 2.0},
      {{2, 2}, std::sqrt(3.0) / 2.0}};
  const std::map<std::pair<unsigned, unsigned>, double>* table = nullptr;
  if (k == 1) table = &k1;
  if (k == 2) table = &k2;
  if (table == nullptr) throw UnsupportedError("distorted_csum: only k = 1 and k = 2 are tabulated");
  auto it = table->find({control, target});
  if (it == table->end())
    throw UnsupportedError("distorted_csum: input outside the tabulated range for k = " + std::to_string(k));
  return {{control, control + target}, it->second};
}

struct BruteForceRate {
  double rate = 0.0;
  double success_probability = 0.0;
  double residual_failure_probability = 0.0;
};

/// State-vector simulation of the iterative protocol with Alice's k1
/// prepared offline. Loss is a beamsplitter with explicit environment modes;
/// round n measures photon totals on the first m-n+1 rails at both ends and
/// success entanglement is the entropy of Alice's kept rails.
inline BruteForceRate iterative_rate_bruteforce(unsigned k1, unsigned m, double eta) {
  if (k1 < 1 || m < 2) throw std::invalid_argument("iterative_rate_bruteforce: need k1 >= 1, m >= 2");
  FockArray psi = append_vacuum(alice_projected_state({k1, m}), m);
  for (unsigned i = 0; i < m; ++i) psi = apply_beamsplitter(psi, m + i, 2 * m + i, eta);
  psi.prune(1e-300);

  BruteForceRate out;
  std::function<void(const FockArray&, unsigned, double)> round = [&](const FockArray& state, unsigned n,
                                                                       double weight) {
    const unsigned kept = m - n + 1;
    const auto a_sub = detail::range(0, kept);
    const auto b_sub = detail::range(m, m + kept);
    for (const auto& ra : qnd_total_number(state, a_sub)) {
      for (const auto& rb : qnd_total_number(ra.post_state, b_sub)) {
        const double w = weight * ra.probability * rb.probability;
        if (ra.outcome == rb.outcome) {
          const double ent = von_neumann_entropy(reduced_state(rb.post_state, a_sub));
          out.success_probability += w;
          out.rate += w * ent / m;
        } else if (n + 1 < m) {
          round(rb.post_state, n + 1, w);
        } else {
          out.residual_failure_probability += w;
        }
      }
    }
  };
  round(psi, 1, 1.0);
  return out;
}

inline constexpr const char* kFockArrayFormat = "qpurify.fock_array";
inline constexpr int kFockArrayVersion = 1;

/// Self-describing JSON record of a pure state.
inline nlohmann::json to_json(const FockArray& psi) {
  nlohmann::json amps = nlohmann::json::array();
  for (const auto& [n, a] : psi.amplitudes())
    amps.push_back({{"occupation", n}, {"re", a.real()}, {"im", a.imag()}});
  return {{"format", kFockArrayFormat},
          {"version", kFockArrayVersion},
          {"modes", psi.modes()},
          {"cutoff", psi.cutoff()},
          {"indexing", "occupation tuple per mode, mode 0 first; entries sorted lexicographically"},
          {"amplitudes", amps}};
}

inline FockArray fock_array_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != kFockArrayFormat)
    throw std::invalid_argument("fock_array_from_json: unknown format");
  if (j.value("version", 0) != kFockArrayVersion)
    throw std::invalid_argument("fock_array_from_json: unsupported version");
  FockArray psi(j.at("modes").get<std::size_t>(), j.at("cutoff").get<unsigned>());
  for (const auto& e : j.at("amplitudes"))
    psi.set(e.at("occupation").get<Occupation>(), {e.at("re").get<double>(), e.at("im").get<double>()});
  return psi;
}

}  // namespace qpurify::fock
