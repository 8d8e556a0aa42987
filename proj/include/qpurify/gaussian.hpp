#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qpurify/combinatorics.hpp"
#include "qpurify/errors.hpp"

namespace qpurify::gaussian {

inline constexpr double kSymmetryTolerance = 1e-12;
inline constexpr double kPhysicalTolerance = 1e-9;
inline constexpr double kPseudoInverseThreshold = 1e-12;

/// Symplectic form for quadrature ordering (q1, p1, q2, p2, ...).
inline Eigen::MatrixXd symplectic_form(std::size_t modes) {
  const auto n = static_cast<Eigen::Index>(2 * modes);
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 0; k < n; k += 2) {
    omega(k, k + 1) = 1.0;
    omega(k + 1, k) = -1.0;
  }
  return omega;
}

/// Symplectic eigenvalues of a positive-definite covariance matrix, ascending.
inline std::vector<double> symplectic_eigenvalues(const Eigen::MatrixXd& v) {
  if (v.rows() != v.cols() || v.rows() % 2 != 0)
    throw std::invalid_argument("symplectic_eigenvalues: matrix must be 2N x 2N");
  const std::size_t modes = static_cast<std::size_t>(v.rows() / 2);
  if (modes == 0) return {};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(v);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw NumericalHealthError("symplectic_eigenvalues: covariance matrix is not positive definite");
  const Eigen::MatrixXd root = es.operatorSqrt();
  // root * (i Omega) * root is Hermitian with eigenvalues +-nu_k.
  const Eigen::MatrixXcd h = Eigen::MatrixXcd(root * symplectic_form(modes) * root) * std::complex<double>(0, 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> hs(h, Eigen::EigenvaluesOnly);
  // Eigenvalues come sorted ascending; the upper half is the positive branch.
  std::vector<double> nu;
  for (Eigen::Index i = static_cast<Eigen::Index>(modes); i < hs.eigenvalues().size(); ++i)
    nu.push_back(hs.eigenvalues()(i));
  std::sort(nu.begin(), nu.end());
  return nu;
}

/// Real symmetric 2N x 2N second-moment matrix; vacuum is the identity.
class CovarianceMatrix {
 public:
  explicit CovarianceMatrix(Eigen::MatrixXd v) : v_(std::move(v)) {
    if (v_.rows() != v_.cols() || v_.rows() % 2 != 0 || v_.rows() == 0)
      throw std::invalid_argument("CovarianceMatrix: matrix must be 2N x 2N with N >= 1");
    if ((v_ - v_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance)
      throw std::invalid_argument("CovarianceMatrix: matrix is not symmetric");
    v_ = 0.5 * (v_ + v_.transpose());
    nu_ = gaussian::symplectic_eigenvalues(v_);
    if (nu_.front() < 1.0 - kPhysicalTolerance)
      throw NumericalHealthError("CovarianceMatrix: symplectic eigenvalue " + format_double(nu_.front()) +
                                 " below 1");
  }

  static CovarianceMatrix vacuum(std::size_t modes) {
    return CovarianceMatrix(Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(2 * modes),
                                                      static_cast<Eigen::Index>(2 * modes)));
  }

  std::size_t modes() const { return static_cast<std::size_t>(v_.rows() / 2); }
  const Eigen::MatrixXd& matrix() const { return v_; }
  double operator()(Eigen::Index r, Eigen::Index c) const { return v_(r, c); }
  const std::vector<double>& symplectic_eigenvalues() const { return nu_; }

  /// Reduced state on the listed modes, in the listed order.
  CovarianceMatrix reduced(const std::vector<std::size_t>& keep) const {
    return CovarianceMatrix(v_(index_of(keep), index_of(keep)));
  }

  /// Block-diagonal joint state; other's modes follow.
  CovarianceMatrix direct_sum(const CovarianceMatrix& other) const {
    const Eigen::Index a = v_.rows(), b = other.v_.rows();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(a + b, a + b);
    m.topLeftCorner(a, a) = v_;
    m.bottomRightCorner(b, b) = other.v_;
    return CovarianceMatrix(m);
  }

  /// Rotation by pi on one mode: (q, p) -> (-q, -p).
  CovarianceMatrix phase_flipped(std::size_t mode) const {
    check_mode(mode);
    Eigen::MatrixXd s = Eigen::MatrixXd::Identity(v_.rows(), v_.cols());
    const auto k = static_cast<Eigen::Index>(2 * mode);
    s(k, k) = s(k + 1, k + 1) = -1.0;
    return CovarianceMatrix(s * v_ * s.transpose());
  }

  void check_mode(std::size_t mode) const {
    if (mode >= modes())
      throw std::out_of_range("CovarianceMatrix: mode " + std::to_string(mode) + " out of range");
  }

 private:
  std::vector<Eigen::Index> index_of(const std::vector<std::size_t>& keep) const {
    std::vector<bool> used(modes(), false);
    std::vector<Eigen::Index> idx;
    for (std::size_t m : keep) {
      check_mode(m);
      if (used[m]) throw std::invalid_argument("CovarianceMatrix: duplicate mode");
      used[m] = true;
      idx.push_back(static_cast<Eigen::Index>(2 * m));
      idx.push_back(static_cast<Eigen::Index>(2 * m + 1));
    }
    return idx;
  }

  Eigen::MatrixXd v_;
  std::vector<double> nu_;
};

/// Two-mode squeezed vacuum with local variance nu.
inline CovarianceMatrix tmsv_cm(double nu) {
  if (!(nu >= 1.0)) throw std::domain_error("tmsv_cm: nu must be >= 1");
  const double c = std::sqrt(nu * nu - 1.0);
  Eigen::MatrixXd v(4, 4);
  v << nu, 0, c, 0,
       0, nu, 0, -c,
       c, 0, nu, 0,
       0, -c, 0, nu;
  return CovarianceMatrix(v);
}

inline CovarianceMatrix tmsv_cm(const SqueezingSpec& s) { return tmsv_cm(s.nu()); }

/// 50:50 beamsplitter: x_i -> (x_i + x_j)/sqrt2, x_j -> (x_j - x_i)/sqrt2.
inline CovarianceMatrix balanced_bs(const CovarianceMatrix& v, std::size_t i, std::size_t j) {
  v.check_mode(i);
  v.check_mode(j);
  if (i == j) throw std::invalid_argument("balanced_bs: modes must differ");
  const Eigen::Index n = v.matrix().rows();
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(n, n);
  const double h = 1.0 / std::sqrt(2.0);
  for (Eigen::Index x = 0; x < 2; ++x) {
    const Eigen::Index a = static_cast<Eigen::Index>(2 * i) + x, b = static_cast<Eigen::Index>(2 * j) + x;
    s(a, a) = h;
    s(a, b) = h;
    s(b, a) = -h;
    s(b, b) = h;
  }
  return CovarianceMatrix(s * v.matrix() * s.transpose());
}

enum class Quadrature { q, p };

/// Moore-Penrose pseudoinverse with singular values below threshold * max |entry| dropped.
inline Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m, double threshold = kPseudoInverseThreshold) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const double cut = threshold * m.cwiseAbs().maxCoeff();
  Eigen::VectorXd inv = svd.singularValues();
  for (Eigen::Index i = 0; i < inv.size(); ++i) inv(i) = inv(i) > cut ? 1.0 / inv(i) : 0.0;
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

/// Homodyne measurement of one quadrature of mode; the mode is removed.
/// The conditional covariance does not depend on the outcome.
inline CovarianceMatrix homodyne_condition(const CovarianceMatrix& v, std::size_t mode, Quadrature quad) {
  v.check_mode(mode);
  if (v.modes() < 2) throw std::invalid_argument("homodyne_condition: need a mode left over");
  std::vector<Eigen::Index> x;
  for (std::size_t k = 0; k < v.modes(); ++k)
    if (k != mode) {
      x.push_back(static_cast<Eigen::Index>(2 * k));
      x.push_back(static_cast<Eigen::Index>(2 * k + 1));
    }
  const std::vector<Eigen::Index> y{static_cast<Eigen::Index>(2 * mode), static_cast<Eigen::Index>(2 * mode + 1)};
  const Eigen::MatrixXd gx = v.matrix()(x, x);
  const Eigen::MatrixXd sigma = v.matrix()(x, y);
  Eigen::Matrix2d proj = Eigen::Matrix2d::Zero();
  proj(quad == Quadrature::q ? 0 : 1, quad == Quadrature::q ? 0 : 1) = 1.0;
  const Eigen::MatrixXd gy = proj * v.matrix()(y, y) * proj;
  return CovarianceMatrix(gx - sigma * pseudo_inverse(gy) * sigma.transpose());
}

/// Entanglement swap of two links by dual homodyne at the shared node.
/// left is (outer, node), right is (node, outer); the result is (left outer, right outer).
/// The node modes are mixed on a balanced beamsplitter, then q and p are measured.
inline CovarianceMatrix dual_homodyne_swap(const CovarianceMatrix& left, const CovarianceMatrix& right) {
  if (left.modes() != 2 || right.modes() != 2)
    throw std::invalid_argument("dual_homodyne_swap: links must be two-mode states");
  // Mode order 0: left node, 1: left outer, 2: right outer, 3: right node.
  const CovarianceMatrix joint = left.reduced({1, 0}).direct_sum(right.reduced({1, 0}));
  const CovarianceMatrix mixed = balanced_bs(joint, 0, 3);
  return homodyne_condition(homodyne_condition(mixed, 3, Quadrature::p), 0, Quadrature::q);
}

/// Local variance of L swapped TMSV(nu) links: coth(L * arccoth(nu)).
inline double chain_nu(double nu, unsigned links) {
  if (!(nu >= 1.0)) throw std::domain_error("chain_nu: nu must be >= 1");
  if (links < 1) throw std::invalid_argument("chain_nu: links must be >= 1");
  if (nu == 1.0 || links == 1) return nu;
  if (std::isinf(nu)) return nu;
  // chi = tanh r satisfies nu = (1 + chi^2)/(1 - chi^2), and a swap multiplies chi.
  const double chi2 = (nu - 1.0) / (nu + 1.0);
  const double chi2l = std::pow(chi2, links);
  return (1.0 + chi2l) / (1.0 - chi2l);
}

/// End-to-end state of a chain of identical TMSV(nu) links.
inline CovarianceMatrix swap_chain(double nu, unsigned links) { return tmsv_cm(chain_nu(nu, links)); }

/// The same chain built link by link with explicit swaps. After each swap the
/// right end is rotated by pi so the state keeps the TMSV sign pattern.
inline std::vector<CovarianceMatrix> swap_chain_pipeline(double nu, unsigned links) {
  if (links < 1) throw std::invalid_argument("swap_chain_pipeline: links must be >= 1");
  const CovarianceMatrix link = tmsv_cm(nu);
  std::vector<CovarianceMatrix> steps{link};
  for (unsigned l = 2; l <= links; ++l)
    steps.push_back(dual_homodyne_swap(steps.back(), link).phase_flipped(1));
  return steps;
}

/// Entropy of one thermal mode with symplectic eigenvalue nu, g(1) = 0.
inline double symplectic_g(double nu) { return g_function(std::max(nu - 1.0, 0.0) / 2.0); }

/// Von Neumann entropy in bits from the symplectic spectrum.
inline double symplectic_entropy(const CovarianceMatrix& v) {
  double s = 0.0;
  for (double nu : v.symplectic_eigenvalues()) s += symplectic_g(nu);
  return s;
}

enum class Reconciliation { reverse, direct };

struct KeyRateInputs {
  double beta = 0.95;
  Reconciliation direction = Reconciliation::reverse;

  void validate() const {
    if (!(beta > 0.0 && beta <= 1.0)) throw std::domain_error("KeyRateInputs: beta must lie in (0, 1]");
  }
};

struct KeyRate {
  double rate = 0.0;  // max(raw, 0)
  double raw = 0.0;
  double mutual_information = 0.0;
  double holevo = 0.0;
};

/// Devetak-Winter rate beta * H_AB - chi_EB for homodyne detection on a
/// two-mode state (mode 0 Alice, mode 1 Bob). Eve holds the purification.
inline KeyRate devetak_winter_rate(const CovarianceMatrix& v_ab, const KeyRateInputs& in = {}) {
  in.validate();
  if (v_ab.modes() != 2) throw std::invalid_argument("devetak_winter_rate: need a two-mode state");
  // The reference side is the one whose homodyne outcome Eve tries to learn.
  const std::size_t ref = in.direction == Reconciliation::reverse ? 1 : 0;
  const std::size_t other = 1 - ref;
  const double var_ref = v_ab.reduced({ref}).matrix()(0, 0);
  const double var_ref_cond = homodyne_condition(v_ab, other, Quadrature::q).matrix()(0, 0);
  KeyRate k;
  k.mutual_information = 0.5 * std::log2(var_ref / var_ref_cond);
  k.holevo = symplectic_entropy(v_ab) - symplectic_entropy(homodyne_condition(v_ab, ref, Quadrature::q));
  k.raw = in.beta * k.mutual_information - k.holevo;
  k.rate = std::max(k.raw, 0.0);
  return k;
}

}  // namespace qpurify::gaussian
