#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qpurify/combinatorics.hpp"
#include "qpurify/errors.hpp"

namespace qpurify::fock {

using Complex = std::complex<double>;

inline constexpr std::size_t kDimensionBudget = 20'000;
inline constexpr double kTruncationTolerance = 1e-8;

namespace detail {

inline void check_occupation(const Occupation& n, std::size_t modes, unsigned cutoff) {
  if (n.size() != modes)
    throw std::invalid_argument("occupation has " + std::to_string(n.size()) + " modes, expected " +
                                std::to_string(modes));
  for (unsigned x : n)
    if (x > cutoff)
      throw std::out_of_range("occupation " + std::to_string(x) + " exceeds cutoff " +
                              std::to_string(cutoff));
}

inline unsigned total(const Occupation& n, const std::vector<std::size_t>& subset) {
  unsigned s = 0;
  for (std::size_t i : subset) s += n[i];
  return s;
}

inline Occupation select(const Occupation& n, const std::vector<std::size_t>& modes) {
  Occupation out;
  out.reserve(modes.size());
  for (std::size_t i : modes) out.push_back(n[i]);
  return out;
}

inline std::vector<std::size_t> complement(std::size_t modes, const std::vector<std::size_t>& keep) {
  std::vector<bool> used(modes, false);
  for (std::size_t i : keep) {
    if (i >= modes) throw std::out_of_range("mode index " + std::to_string(i) + " out of range");
    if (used[i]) throw std::invalid_argument("duplicate mode index " + std::to_string(i));
    used[i] = true;
  }
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < modes; ++i)
    if (!used[i]) rest.push_back(i);
  return rest;
}

}  // namespace detail

/// Sparse pure state over a truncated multimode Fock basis.
/// Amplitudes are keyed by occupation tuple; iteration is lexicographic.
class FockArray {
 public:
  FockArray(std::size_t modes, unsigned cutoff) : modes_(modes), cutoff_(cutoff) {
    if (modes == 0) throw std::invalid_argument("FockArray: need at least one mode");
  }

  std::size_t modes() const { return modes_; }
  unsigned cutoff() const { return cutoff_; }
  const std::map<Occupation, Complex>& amplitudes() const { return amps_; }
  std::size_t size() const { return amps_.size(); }

  Complex amplitude(const Occupation& n) const {
    auto it = amps_.find(n);
    return it == amps_.end() ? Complex{} : it->second;
  }
  void set(const Occupation& n, Complex a) {
    detail::check_occupation(n, modes_, cutoff_);
    if (a == Complex{}) amps_.erase(n);
    else amps_[n] = a;
  }
  void add(const Occupation& n, Complex a) {
    detail::check_occupation(n, modes_, cutoff_);
    amps_[n] += a;
  }

  double norm2() const {
    double s = 0;
    for (const auto& [n, a] : amps_) s += std::norm(a);
    return s;
  }
  FockArray normalized() const {
    const double nn = norm2();
    if (nn <= 0) throw std::domain_error("FockArray: cannot normalize zero vector");
    FockArray out = *this;
    for (auto& [n, a] : out.amps_) a /= std::sqrt(nn);
    return out;
  }
  FockArray scaled(Complex c) const {
    FockArray out = *this;
    for (auto& [n, a] : out.amps_) a *= c;
    return out;
  }

  /// Tensor product; other's modes follow this state's modes.
  FockArray tensor(const FockArray& other) const {
    FockArray out(modes_ + other.modes_, std::max(cutoff_, other.cutoff_));
    for (const auto& [n1, a1] : amps_)
      for (const auto& [n2, a2] : other.amps_) {
        Occupation n = n1;
        n.insert(n.end(), n2.begin(), n2.end());
        out.amps_[n] = a1 * a2;
      }
    return out;
  }

  /// Reorders modes so that new mode i is old mode order[i].
  FockArray permuted(const std::vector<std::size_t>& order) const {
    if (order.size() != modes_ || !detail::complement(modes_, order).empty())
      throw std::invalid_argument("FockArray::permuted: not a permutation");
    FockArray out(modes_, cutoff_);
    for (const auto& [n, a] : amps_) out.amps_[detail::select(n, order)] = a;
    return out;
  }

  Complex inner(const FockArray& other) const {
    if (other.modes_ != modes_) throw std::invalid_argument("FockArray::inner: mode mismatch");
    Complex s{};
    for (const auto& [n, a] : amps_) s += std::conj(a) * other.amplitude(n);
    return s;
  }

  /// Drops amplitudes with magnitude below tol.
  void prune(double tol = 0.0) {
    for (auto it = amps_.begin(); it != amps_.end();)
      it = std::abs(it->second) <= tol ? amps_.erase(it) : std::next(it);
  }

 private:
  std::size_t modes_;
  unsigned cutoff_;
  std::map<Occupation, Complex> amps_;
};

/// Dense operator over an explicit, sorted list of occupation tuples.
/// Only states in the support are stored, so photon-number sectors stay small.
class DensityOperator {
 public:
  DensityOperator() : modes_(0), cutoff_(0) {}

  DensityOperator(std::size_t modes, unsigned cutoff, std::vector<Occupation> basis,
                  Eigen::MatrixXcd matrix, std::size_t budget = kDimensionBudget)
      : modes_(modes), cutoff_(cutoff), basis_(std::move(basis)), rho_(std::move(matrix)) {
    if (basis_.size() > budget)
      throw SizeError("DensityOperator: basis of " + std::to_string(basis_.size()) +
                      " states exceeds budget " + std::to_string(budget));
    if (static_cast<std::size_t>(rho_.rows()) != basis_.size() || rho_.rows() != rho_.cols())
      throw std::invalid_argument("DensityOperator: matrix shape does not match basis");
    if (!std::is_sorted(basis_.begin(), basis_.end()) ||
        std::adjacent_find(basis_.begin(), basis_.end()) != basis_.end())
      throw std::invalid_argument("DensityOperator: basis must be sorted and unique");
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      detail::check_occupation(basis_[i], modes_, cutoff_);
      index_.emplace(basis_[i], i);
    }
  }

  static DensityOperator from_pure(const FockArray& psi) {
    std::vector<Occupation> basis;
    Eigen::VectorXcd v(static_cast<Eigen::Index>(psi.size()));
    Eigen::Index i = 0;
    for (const auto& [n, a] : psi.amplitudes()) {
      basis.push_back(n);
      v(i++) = a;
    }
    return DensityOperator(psi.modes(), psi.cutoff(), std::move(basis), v * v.adjoint());
  }

  std::size_t modes() const { return modes_; }
  unsigned cutoff() const { return cutoff_; }
  std::size_t dim() const { return basis_.size(); }
  const std::vector<Occupation>& basis() const { return basis_; }
  const Eigen::MatrixXcd& matrix() const { return rho_; }

  std::optional<std::size_t> index_of(const Occupation& n) const {
    auto it = index_.find(n);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }
  Complex element(const Occupation& a, const Occupation& b) const {
    auto i = index_of(a), j = index_of(b);
    return i && j ? rho_(static_cast<Eigen::Index>(*i), static_cast<Eigen::Index>(*j)) : Complex{};
  }

  double trace() const { return rho_.trace().real(); }
  double purity() const {
    const double t = trace();
    return (rho_.adjoint() * rho_).trace().real() / (t * t);
  }
  double hermiticity_error() const {
    return dim() == 0 ? 0.0 : (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
  }
  DensityOperator normalized() const {
    const double t = trace();
    if (!(t > 0)) throw std::domain_error("DensityOperator: cannot normalize zero trace");
    return DensityOperator(modes_, cutoff_, basis_, rho_ / t);
  }
  DensityOperator scaled(double c) const {
    return DensityOperator(modes_, cutoff_, basis_, rho_ * c);
  }

  /// <psi| rho |psi>
  double expectation(const FockArray& psi) const {
    Complex s{};
    for (const auto& [n1, a1] : psi.amplitudes()) {
      auto i = index_of(n1);
      if (!i) continue;
      for (const auto& [n2, a2] : psi.amplitudes()) {
        auto j = index_of(n2);
        if (j) s += std::conj(a1) * rho_(static_cast<Eigen::Index>(*i), static_cast<Eigen::Index>(*j)) * a2;
      }
    }
    return s.real();
  }

  /// Mean photon number of one mode.
  double mean_photons(std::size_t mode) const {
    double s = 0;
    for (std::size_t i = 0; i < dim(); ++i)
      s += basis_[i][mode] * rho_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)).real();
    return s;
  }

  /// Embeds both operators in the union of their bases.
  static std::pair<DensityOperator, DensityOperator> aligned(const DensityOperator& a,
                                                             const DensityOperator& b) {
    if (a.modes_ != b.modes_) throw std::invalid_argument("DensityOperator: mode mismatch");
    std::vector<Occupation> basis = a.basis_;
    basis.insert(basis.end(), b.basis_.begin(), b.basis_.end());
    std::sort(basis.begin(), basis.end());
    basis.erase(std::unique(basis.begin(), basis.end()), basis.end());
    const unsigned cutoff = std::max(a.cutoff_, b.cutoff_);
    return {a.embedded(basis, cutoff), b.embedded(basis, cutoff)};
  }

  DensityOperator operator+(const DensityOperator& other) const {
    auto [x, y] = aligned(*this, other);
    return DensityOperator(x.modes_, x.cutoff_, x.basis_, x.rho_ + y.rho_);
  }

 private:
  DensityOperator embedded(const std::vector<Occupation>& basis, unsigned cutoff) const {
    std::vector<Eigen::Index> pos(dim());
    std::size_t j = 0;
    for (std::size_t i = 0; i < dim(); ++i) {
      while (basis[j] != basis_[i]) ++j;
      pos[i] = static_cast<Eigen::Index>(j);
    }
    const auto n = static_cast<Eigen::Index>(basis.size());
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
    for (std::size_t a = 0; a < dim(); ++a)
      for (std::size_t b = 0; b < dim(); ++b)
        m(pos[a], pos[b]) = rho_(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    return DensityOperator(modes_, cutoff, basis, std::move(m));
  }

  std::size_t modes_;
  unsigned cutoff_;
  std::vector<Occupation> basis_;
  std::map<Occupation, std::size_t> index_;
  Eigen::MatrixXcd rho_;
};

/// Trace distance 0.5 * ||a - b||_1.
inline double trace_distance(const DensityOperator& a, const DensityOperator& b) {
  auto [x, y] = DensityOperator::aligned(a, b);
  if (x.dim() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(x.matrix() - y.matrix(), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

/// Eigenvalues of a Hermitian operator, ascending.
inline Eigen::VectorXd eigenvalues(const DensityOperator& rho) {
  if (rho.dim() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho.matrix(), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

/// von Neumann entropy in bits of a trace-normalized operator.
inline double von_neumann_entropy(const DensityOperator& rho, double negative_tol = 1e-10) {
  const Eigen::VectorXd ev = eigenvalues(rho);
  double s = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    const double l = ev(i);
    if (l < -negative_tol)
      throw NumericalHealthError("von_neumann_entropy: eigenvalue " + format_double(l) +
                                 " below tolerance");
    if (l > 0) s -= l * std::log2(l);
  }
  return s;
}

/// Fidelity <psi|rho|psi> with a normalized pure target.
inline double fidelity(const DensityOperator& rho, const FockArray& target) {
  return rho.expectation(target.normalized());
}

/// Reduced operator on the listed modes, in the listed order.
inline DensityOperator partial_trace(const DensityOperator& rho, const std::vector<std::size_t>& keep) {
  const auto rest = detail::complement(rho.modes(), keep);
  std::map<Occupation, std::size_t> kept_index;
  std::vector<Occupation> kept_occ(rho.dim()), rest_occ(rho.dim());
  for (std::size_t i = 0; i < rho.dim(); ++i) {
    kept_occ[i] = detail::select(rho.basis()[i], keep);
    rest_occ[i] = detail::select(rho.basis()[i], rest);
    kept_index.emplace(kept_occ[i], 0);
  }
  std::vector<Occupation> basis;
  for (auto& [n, idx] : kept_index) {
    idx = basis.size();
    basis.push_back(n);
  }
  // Group rows by the traced-out occupation so only matching pairs are visited.
  std::map<Occupation, std::vector<std::size_t>> by_rest;
  for (std::size_t i = 0; i < rho.dim(); ++i) by_rest[rest_occ[i]].push_back(i);
  const auto n = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& [r, rows] : by_rest)
    for (std::size_t a : rows)
      for (std::size_t b : rows)
        m(static_cast<Eigen::Index>(kept_index[kept_occ[a]]),
          static_cast<Eigen::Index>(kept_index[kept_occ[b]])) +=
            rho.matrix()(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
  return DensityOperator(keep.size(), rho.cutoff(), std::move(basis), std::move(m));
}

/// Reduced operator of a pure state on the listed modes.
inline DensityOperator reduced_state(const FockArray& psi, const std::vector<std::size_t>& keep) {
  const auto rest = detail::complement(psi.modes(), keep);
  std::map<Occupation, std::size_t> kept_index;
  std::map<Occupation, std::vector<std::pair<Occupation, Complex>>> by_rest;
  for (const auto& [n, a] : psi.amplitudes()) {
    Occupation k = detail::select(n, keep);
    kept_index.emplace(k, 0);
    by_rest[detail::select(n, rest)].emplace_back(std::move(k), a);
  }
  std::vector<Occupation> basis;
  for (auto& [n, idx] : kept_index) {
    idx = basis.size();
    basis.push_back(n);
  }
  const auto dim = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& [r, terms] : by_rest)
    for (const auto& [ka, a] : terms)
      for (const auto& [kb, b] : terms)
        m(static_cast<Eigen::Index>(kept_index[ka]), static_cast<Eigen::Index>(kept_index[kb])) +=
            a * std::conj(b);
  return DensityOperator(keep.size(), psi.cutoff(), std::move(basis), std::move(m));
}

/// Reverse coherent information S(rho_A) - S(rho_AB) with A the listed modes.
inline double rci_numeric(const DensityOperator& rho, const std::vector<std::size_t>& a_modes) {
  const DensityOperator n = rho.normalized();
  return von_neumann_entropy(partial_trace(n, a_modes)) - von_neumann_entropy(n);
}

}  // namespace qpurify::fock
