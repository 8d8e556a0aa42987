#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qpurify/combinatorics.hpp"
#include "qpurify/errors.hpp"
#include "qpurify/fock_state.hpp"

namespace qpurify::fock {

/// Output amplitudes of |n, t> through a beamsplitter of transmissivity eta,
/// with a -> sqrt(eta) a + sqrt(1-eta) b and b -> -sqrt(1-eta) a + sqrt(eta) b.
/// Entry p holds the amplitude of |p, n+t-p>.
inline std::vector<double> beamsplitter_amplitudes(unsigned n, unsigned t, double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::domain_error("beamsplitter: eta outside [0, 1]");
  const double tr = std::sqrt(eta), rf = std::sqrt(1.0 - eta);
  std::vector<double> out(n + t + 1, 0.0);
  const double lf_in = std::lgamma(n + 1.0) + std::lgamma(t + 1.0);
  for (unsigned p = 0; p <= n + t; ++p) {
    const unsigned q = n + t - p;
    double s = 0.0;
    const unsigned i_lo = p > t ? p - t : 0;
    const unsigned i_hi = std::min(n, p);
    for (unsigned i = i_lo; i <= i_hi; ++i) {
      const unsigned j = p - i;
      double term = binomial_double(n, i) * binomial_double(t, j);
      term *= std::pow(tr, i) * std::pow(rf, n - i) * std::pow(rf, j) * std::pow(tr, t - j);
      s += (j % 2 ? -term : term);
    }
    out[p] = s * std::exp(0.5 * (std::lgamma(p + 1.0) + std::lgamma(q + 1.0) - lf_in));
  }
  return out;
}

/// Single-mode operator mapping |n> to amplitude(n) |n + shift>.
struct ShiftOperator {
  int shift = 0;
  std::function<double(unsigned)> amplitude;
};

namespace detail {

using ImageList = std::vector<std::vector<std::pair<Occupation, Complex>>>;

/// rho -> sum_K M_K rho M_K^dagger, where images[K][i] lists M_K |basis_i>.
/// Images beyond the cutoff are dropped; if check_trace, the lost trace must
/// stay below tol.
inline DensityOperator apply_maps(const DensityOperator& rho, std::size_t out_modes,
                                  const std::vector<ImageList>& images, bool check_trace,
                                  double tol, const char* who) {
  std::map<Occupation, std::size_t> index;
  for (const auto& img : images)
    for (const auto& terms : img)
      for (const auto& [n, c] : terms) index.emplace(n, 0);
  std::vector<Occupation> basis;
  basis.reserve(index.size());
  for (auto& [n, i] : index) {
    i = basis.size();
    basis.push_back(n);
  }
  const auto dim = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim, dim);
  const auto& m = rho.matrix();
  for (const auto& img : images) {
    std::vector<std::vector<std::pair<Eigen::Index, Complex>>> idx(img.size());
    for (std::size_t a = 0; a < img.size(); ++a)
      for (const auto& [n, c] : img[a]) idx[a].emplace_back(static_cast<Eigen::Index>(index[n]), c);
    for (std::size_t a = 0; a < img.size(); ++a) {
      if (idx[a].empty()) continue;
      for (std::size_t b = 0; b < img.size(); ++b) {
        if (idx[b].empty()) continue;
        const Complex r = m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
        if (r == Complex{}) continue;
        for (const auto& [ia, ca] : idx[a])
          for (const auto& [ib, cb] : idx[b]) out(ia, ib) += ca * r * std::conj(cb);
      }
    }
  }
  DensityOperator result(out_modes, rho.cutoff(), std::move(basis), std::move(out));
  if (check_trace) {
    const double lost = rho.trace() - result.trace();
    if (std::abs(lost) > tol)
      throw ToleranceError(std::string(who) + ": truncation lost trace " + format_double(lost) +
                           " (raise the cutoff)");
  }
  return result;
}

inline void check_mode(std::size_t mode, std::size_t modes) {
  if (mode >= modes)
    throw std::out_of_range("mode " + std::to_string(mode) + " out of range for " +
                            std::to_string(modes) + " modes");
}

}  // namespace detail

/// Applies the channel rho -> sum_K K rho K^dagger of shift-type Kraus operators on one mode.
inline DensityOperator apply_shift_kraus(const DensityOperator& rho, std::size_t mode,
                                         const std::vector<ShiftOperator>& kraus,
                                         double tol = kTruncationTolerance,
                                         const char* who = "apply_shift_kraus") {
  detail::check_mode(mode, rho.modes());
  std::vector<detail::ImageList> images;
  images.reserve(kraus.size());
  for (const auto& k : kraus) {
    detail::ImageList img(rho.dim());
    for (std::size_t i = 0; i < rho.dim(); ++i) {
      const Occupation& n = rho.basis()[i];
      const long target = static_cast<long>(n[mode]) + k.shift;
      if (target < 0 || target > static_cast<long>(rho.cutoff())) continue;
      const double a = k.amplitude(n[mode]);
      if (a == 0.0) continue;
      Occupation out = n;
      out[mode] = static_cast<unsigned>(target);
      img[i].emplace_back(std::move(out), a);
    }
    images.push_back(std::move(img));
  }
  return detail::apply_maps(rho, rho.modes(), images, true, tol, who);
}

/// Kraus set of the pure-loss channel: A_l |n> = sqrt(C(n,l) (1-eta)^l eta^(n-l)) |n-l>.
inline std::vector<ShiftOperator> pure_loss_kraus(double eta, unsigned cutoff) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::domain_error("pure loss: eta outside [0, 1]");
  std::vector<ShiftOperator> ops;
  for (unsigned l = 0; l <= cutoff; ++l) {
    ops.push_back({-static_cast<int>(l), [eta, l](unsigned n) {
                     if (l > n) return 0.0;
                     return std::sqrt(binomial_double(n, l) * std::pow(1.0 - eta, l) *
                                      std::pow(eta, n - l));
                   }});
  }
  return ops;
}

/// Thermal weights p_t = nbar^t / (1+nbar)^(t+1), truncated once the tail is below tail_tol.
inline std::vector<double> thermal_weights(double nbar, double tail_tol = 1e-12,
                                           unsigned max_terms = 10'000) {
  if (!(nbar >= 0.0) || !std::isfinite(nbar)) throw std::domain_error("thermal: nbar must be >= 0");
  std::vector<double> p;
  if (nbar == 0.0) return {1.0};
  const double x = nbar / (1.0 + nbar);
  double w = 1.0 / (1.0 + nbar);
  for (unsigned t = 0; t < max_terms; ++t) {
    p.push_back(w);
    if (std::pow(x, t + 1) <= tail_tol) return p;
    w *= x;
  }
  throw ToleranceError("thermal_weights: tail does not fall below tolerance");
}

/// Kraus set of the thermal-loss channel: a beamsplitter with a thermal
/// environment mode, K_{t,l} = sqrt(p_t) <l|_e U |t>_e.
inline std::vector<ShiftOperator> thermal_loss_kraus(double eta, double nbar, unsigned cutoff,
                                                     double tail_tol = 1e-12) {
  if (!(eta >= 0.0 && eta <= 1.0)) throw std::domain_error("thermal loss: eta outside [0, 1]");
  const std::vector<double> p = thermal_weights(nbar, tail_tol);
  std::vector<ShiftOperator> ops;
  for (unsigned t = 0; t < p.size(); ++t) {
    const double sp = std::sqrt(p[t]);
    for (unsigned l = 0; l <= cutoff + t; ++l) {
      ops.push_back({static_cast<int>(t) - static_cast<int>(l), [eta, t, l, sp](unsigned n) {
                       if (l > n + t) return 0.0;
                       return sp * beamsplitter_amplitudes(n, t, eta)[n + t - l];
                     }});
    }
  }
  return ops;
}

inline DensityOperator apply_pure_loss(const DensityOperator& rho, std::size_t mode, double eta) {
  return apply_shift_kraus(rho, mode, pure_loss_kraus(eta, rho.cutoff()), kTruncationTolerance,
                           "apply_pure_loss");
}

inline DensityOperator apply_pure_loss(const FockArray& psi, std::size_t mode, double eta) {
  return apply_pure_loss(DensityOperator::from_pure(psi), mode, eta);
}

inline DensityOperator apply_thermal_loss(const DensityOperator& rho, std::size_t mode, double eta,
                                          double nbar, double tol = kTruncationTolerance) {
  return apply_shift_kraus(rho, mode, thermal_loss_kraus(eta, nbar, rho.cutoff()), tol,
                           "apply_thermal_loss");
}

/// Diagonal unitary |n> -> phase(n) |n> on one mode.
inline DensityOperator apply_phase(const DensityOperator& rho, std::size_t mode,
                                   const std::function<Complex(unsigned)>& phase) {
  detail::check_mode(mode, rho.modes());
  Eigen::MatrixXcd m = rho.matrix();
  for (std::size_t a = 0; a < rho.dim(); ++a)
    for (std::size_t b = 0; b < rho.dim(); ++b)
      m(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) *=
          phase(rho.basis()[a][mode]) * std::conj(phase(rho.basis()[b][mode]));
  return DensityOperator(rho.modes(), rho.cutoff(), rho.basis(), std::move(m));
}

/// Appends count vacuum modes after the existing ones.
inline FockArray append_vacuum(const FockArray& psi, std::size_t count) {
  FockArray vac(count, psi.cutoff());
  vac.set(Occupation(count, 0), 1.0);
  return psi.tensor(vac);
}

inline DensityOperator append_vacuum(const DensityOperator& rho, std::size_t count) {
  std::vector<Occupation> basis = rho.basis();
  for (auto& n : basis) n.resize(n.size() + count, 0);
  return DensityOperator(rho.modes() + count, rho.cutoff(), std::move(basis), rho.matrix());
}

/// Beamsplitter between modes i and j (i plays the role of a).
inline FockArray apply_beamsplitter(const FockArray& psi, std::size_t i, std::size_t j, double eta,
                                    double tol = kTruncationTolerance) {
  detail::check_mode(i, psi.modes());
  detail::check_mode(j, psi.modes());
  if (i == j) throw std::invalid_argument("beamsplitter: modes must differ");
  FockArray out(psi.modes(), psi.cutoff());
  double dropped = 0.0;
  for (const auto& [n, a] : psi.amplitudes()) {
    const auto amps = beamsplitter_amplitudes(n[i], n[j], eta);
    const unsigned total = n[i] + n[j];
    for (unsigned p = 0; p <= total; ++p) {
      if (amps[p] == 0.0) continue;
      if (p > psi.cutoff() || total - p > psi.cutoff()) {
        dropped += std::norm(a * amps[p]);
        continue;
      }
      Occupation o = n;
      o[i] = p;
      o[j] = total - p;
      out.add(o, a * amps[p]);
    }
  }
  if (dropped > tol) throw ToleranceError("apply_beamsplitter: truncation lost " + format_double(dropped));
  out.prune();
  return out;
}

inline DensityOperator apply_beamsplitter(const DensityOperator& rho, std::size_t i, std::size_t j,
                                          double eta, double tol = kTruncationTolerance) {
  detail::check_mode(i, rho.modes());
  detail::check_mode(j, rho.modes());
  if (i == j) throw std::invalid_argument("beamsplitter: modes must differ");
  detail::ImageList img(rho.dim());
  for (std::size_t b = 0; b < rho.dim(); ++b) {
    const Occupation& n = rho.basis()[b];
    const auto amps = beamsplitter_amplitudes(n[i], n[j], eta);
    const unsigned total = n[i] + n[j];
    for (unsigned p = 0; p <= total; ++p) {
      if (amps[p] == 0.0 || p > rho.cutoff() || total - p > rho.cutoff()) continue;
      Occupation o = n;
      o[i] = p;
      o[j] = total - p;
      img[b].emplace_back(std::move(o), amps[p]);
    }
  }
  return detail::apply_maps(rho, rho.modes(), {img}, true, tol, "apply_beamsplitter");
}

/// Pure loss built from a vacuum environment, a beamsplitter and a partial trace.
inline DensityOperator apply_pure_loss_dilated(const DensityOperator& rho, std::size_t mode,
                                               double eta) {
  const DensityOperator wide = apply_beamsplitter(append_vacuum(rho, 1), mode, rho.modes(), eta);
  std::vector<std::size_t> keep(rho.modes());
  for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = i;
  return partial_trace(wide, keep);
}

/// Projects the listed modes onto fixed occupations and removes them.
/// The result is unnormalized; its trace is the outcome probability.
inline DensityOperator project_modes(const DensityOperator& rho, const std::vector<std::size_t>& modes,
                                     const Occupation& values) {
  if (modes.size() != values.size()) throw std::invalid_argument("project_modes: size mismatch");
  const auto keep = detail::complement(rho.modes(), modes);
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < rho.dim(); ++i)
    if (detail::select(rho.basis()[i], modes) == values) rows.push_back(i);
  std::vector<Occupation> basis;
  for (std::size_t r : rows) basis.push_back(detail::select(rho.basis()[r], keep));
  const auto dim = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXcd m(dim, dim);
  for (Eigen::Index a = 0; a < dim; ++a)
    for (Eigen::Index b = 0; b < dim; ++b)
      m(a, b) = rho.matrix()(static_cast<Eigen::Index>(rows[static_cast<std::size_t>(a)]),
                             static_cast<Eigen::Index>(rows[static_cast<std::size_t>(b)]));
  return DensityOperator(keep.size(), rho.cutoff(), std::move(basis), std::move(m));
}

inline FockArray project_modes(const FockArray& psi, const std::vector<std::size_t>& modes,
                               const Occupation& values) {
  if (modes.size() != values.size()) throw std::invalid_argument("project_modes: size mismatch");
  const auto keep = detail::complement(psi.modes(), modes);
  FockArray out(keep.size(), psi.cutoff());
  for (const auto& [n, a] : psi.amplitudes())
    if (detail::select(n, modes) == values) out.set(detail::select(n, keep), a);
  return out;
}

/// Keeps only components whose photon total over subset equals total.
inline FockArray project_total(const FockArray& psi, const std::vector<std::size_t>& subset,
                               unsigned total) {
  FockArray out(psi.modes(), psi.cutoff());
  for (const auto& [n, a] : psi.amplitudes())
    if (detail::total(n, subset) == total) out.set(n, a);
  return out;
}

inline DensityOperator project_total(const DensityOperator& rho, const std::vector<std::size_t>& subset,
                                     unsigned total) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < rho.dim(); ++i)
    if (detail::total(rho.basis()[i], subset) == total) rows.push_back(i);
  std::vector<Occupation> basis;
  for (std::size_t r : rows) basis.push_back(rho.basis()[r]);
  const auto dim = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXcd m(dim, dim);
  for (Eigen::Index a = 0; a < dim; ++a)
    for (Eigen::Index b = 0; b < dim; ++b)
      m(a, b) = rho.matrix()(static_cast<Eigen::Index>(rows[static_cast<std::size_t>(a)]),
                             static_cast<Eigen::Index>(rows[static_cast<std::size_t>(b)]));
  return DensityOperator(rho.modes(), rho.cutoff(), std::move(basis), std::move(m));
}

template <class State>
struct MeasurementRecord {
  unsigned outcome = 0;
  double probability = 0.0;
  State post_state;
};

namespace detail {

inline void check_subset(const std::vector<std::size_t>& subset, std::size_t modes) {
  if (subset.empty()) throw std::invalid_argument("qnd_total_number: empty mode subset");
  (void)complement(modes, subset);
}

}  // namespace detail

/// Total photon-number measurement over subset. Every outcome with nonzero
/// probability is recorded with its renormalized post-measurement state.
inline std::vector<MeasurementRecord<FockArray>> qnd_total_number(const FockArray& psi,
                                                                  const std::vector<std::size_t>& subset) {
  detail::check_subset(subset, psi.modes());
  std::map<unsigned, FockArray> parts;
  for (const auto& [n, a] : psi.amplitudes()) {
    auto it = parts.try_emplace(detail::total(n, subset), psi.modes(), psi.cutoff()).first;
    it->second.set(n, a);
  }
  std::vector<MeasurementRecord<FockArray>> out;
  for (auto& [k, part] : parts) {
    const double p = part.norm2();
    if (p <= 0.0) continue;
    out.push_back({k, p, part.normalized()});
  }
  return out;
}

inline std::vector<MeasurementRecord<DensityOperator>> qnd_total_number(
    const DensityOperator& rho, const std::vector<std::size_t>& subset) {
  detail::check_subset(subset, rho.modes());
  std::map<unsigned, bool> totals;
  for (const auto& n : rho.basis()) totals[detail::total(n, subset)] = true;
  std::vector<MeasurementRecord<DensityOperator>> out;
  for (const auto& [k, unused] : totals) {
    DensityOperator part = project_total(rho, subset, k);
    const double p = part.trace();
    if (p <= 0.0) continue;
    out.push_back({k, p, part.normalized()});
  }
  return out;
}

}  // namespace qpurify::fock
