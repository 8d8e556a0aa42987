#include <gtest/gtest.h>

#include <cmath>

#include "qpurify/gaussian.hpp"

using namespace qpurify;
using namespace qpurify::gaussian;

namespace {

double max_abs_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

// Beamsplitter of transmissivity eta between modes i and j, built independently of balanced_bs.
Eigen::MatrixXd bs_matrix(std::size_t modes, std::size_t i, std::size_t j, double eta) {
  const auto n = static_cast<Eigen::Index>(2 * modes);
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(n, n);
  const double t = std::sqrt(eta), r = std::sqrt(1 - eta);
  for (Eigen::Index x = 0; x < 2; ++x) {
    const auto a = static_cast<Eigen::Index>(2 * i) + x, b = static_cast<Eigen::Index>(2 * j) + x;
    s(a, a) = t;
    s(a, b) = r;
    s(b, a) = -r;
    s(b, b) = t;
  }
  return s;
}

// TMSV on (A, B) with B sent through pure loss; E is mode 2.
CovarianceMatrix lossy_tmsv_with_eve(double nu, double eta) {
  const CovarianceMatrix abe = tmsv_cm(nu).direct_sum(CovarianceMatrix::vacuum(1));
  const Eigen::MatrixXd s = bs_matrix(3, 1, 2, eta);
  return CovarianceMatrix(s * abe.matrix() * s.transpose());
}

}  // namespace

TEST(Tmsv, Structure) {
  EXPECT_LT(max_abs_diff(tmsv_cm(1.0).matrix(), Eigen::MatrixXd::Identity(4, 4)), 1e-15);
  const auto v = tmsv_cm(SqueezingSpec(0.5));
  EXPECT_NEAR(v.symplectic_eigenvalues()[0], 1.0, 1e-12);
  EXPECT_NEAR(v.symplectic_eigenvalues()[1], 1.0, 1e-12);
  EXPECT_NEAR(v.reduced({1}).matrix()(0, 0), SqueezingSpec(0.5).nu(), 1e-15);
  EXPECT_NEAR(v(1, 3), -std::sqrt(v(0, 0) * v(0, 0) - 1), 1e-15);
  EXPECT_THROW(tmsv_cm(0.9), std::domain_error);
}

TEST(Covariance, Validation) {
  Eigen::MatrixXd asym = Eigen::MatrixXd::Identity(2, 2);
  asym(0, 1) = 0.1;
  EXPECT_THROW(CovarianceMatrix{asym}, std::invalid_argument);
  EXPECT_THROW(CovarianceMatrix{Eigen::MatrixXd::Identity(3, 3)}, std::invalid_argument);
  EXPECT_THROW(CovarianceMatrix{0.5 * Eigen::MatrixXd::Identity(2, 2)}, NumericalHealthError);
  Eigen::MatrixXd squeezed(2, 2);
  squeezed << 0.25, 0, 0, 4;
  EXPECT_NEAR(CovarianceMatrix(squeezed).symplectic_eigenvalues()[0], 1.0, 1e-12);
}

TEST(Entropy, Values) {
  EXPECT_EQ(symplectic_entropy(CovarianceMatrix::vacuum(3)), 0.0);
  EXPECT_NEAR(symplectic_entropy(CovarianceMatrix(3 * Eigen::MatrixXd::Identity(2, 2))), 2.0, 1e-12);
  EXPECT_NEAR(symplectic_entropy(tmsv_cm(4.0)), 0.0, 1e-9);
  // Reduced TMSV entropy equals the Fock-basis value.
  const SqueezingSpec s(0.6);
  EXPECT_NEAR(symplectic_entropy(tmsv_cm(s).reduced({0})), tmsv_entropy(s), 1e-12);
}

TEST(Beamsplitter, VacuumAndInverse) {
  EXPECT_LT(max_abs_diff(balanced_bs(CovarianceMatrix::vacuum(2), 0, 1).matrix(), Eigen::MatrixXd::Identity(4, 4)),
            1e-15);
  const auto v = tmsv_cm(2.5).direct_sum(tmsv_cm(1.5));
  // The splitter with the roles of the ports exchanged undoes it.
  const auto back = balanced_bs(balanced_bs(v, 0, 3), 3, 0);
  EXPECT_LT(max_abs_diff(back.matrix(), v.matrix()), 1e-12);
  EXPECT_THROW(balanced_bs(v, 1, 1), std::invalid_argument);
}

TEST(Beamsplitter, FourModeDisplayedMatrix) {
  const double nu = 2.0, c = std::sqrt(2 * (nu * nu - 1)) / 2;
  const auto v = balanced_bs(tmsv_cm(nu).direct_sum(tmsv_cm(nu)), 0, 3);
  Eigen::MatrixXd expect(8, 8);
  expect << nu, 0, c, 0, c, 0, 0, 0,
            0, nu, 0, -c, 0, -c, 0, 0,
            c, 0, nu, 0, 0, 0, -c, 0,
            0, -c, 0, nu, 0, 0, 0, c,
            c, 0, 0, 0, nu, 0, c, 0,
            0, -c, 0, 0, 0, nu, 0, -c,
            0, 0, -c, 0, c, 0, nu, 0,
            0, 0, 0, c, 0, -c, 0, nu;
  EXPECT_LT(max_abs_diff(v.matrix(), expect), 1e-12);
}

TEST(Homodyne, ProductStateUnchanged) {
  const auto v = tmsv_cm(3.0).direct_sum(CovarianceMatrix(2 * Eigen::MatrixXd::Identity(2, 2)));
  for (Quadrature q : {Quadrature::q, Quadrature::p})
    EXPECT_LT(max_abs_diff(homodyne_condition(v, 2, q).matrix(), tmsv_cm(3.0).matrix()), 1e-13);
}

TEST(Homodyne, ConditionedTmsv) {
  const double nu = 3.0;
  const auto a = homodyne_condition(tmsv_cm(nu), 1, Quadrature::q);
  EXPECT_NEAR(a(0, 0), 1 / nu, 1e-13);
  EXPECT_NEAR(a(1, 1), nu, 1e-13);
  const auto b = homodyne_condition(tmsv_cm(nu), 1, Quadrature::p);
  EXPECT_NEAR(b(0, 0), nu, 1e-13);
  EXPECT_NEAR(b(1, 1), 1 / nu, 1e-13);
  EXPECT_THROW(homodyne_condition(a, 0, Quadrature::q), std::invalid_argument);
}

TEST(Swap, DualHomodyneGivesReducedSqueezing) {
  for (double nu : {1.2, 2.0, 5.0}) {
    const double t = (nu * nu + 1) / (2 * nu), c = (nu * nu - 1) / (2 * nu);
    Eigen::MatrixXd expect(4, 4);
    expect << t, 0, -c, 0,
              0, t, 0, c,
              -c, 0, t, 0,
              0, c, 0, t;
    EXPECT_LT(max_abs_diff(dual_homodyne_swap(tmsv_cm(nu), tmsv_cm(nu)).matrix(), expect), 1e-10);
  }
  EXPECT_NEAR(chain_nu(2.0, 2), 1.25, 1e-15);
}

TEST(Swap, ChainMatchesPipeline) {
  for (double nu : {1.2, 2.0, 5.0}) {
    const auto steps = swap_chain_pipeline(nu, 5);
    for (unsigned links = 1; links <= 5; ++links)
      EXPECT_LT(max_abs_diff(steps[links - 1].matrix(), swap_chain(nu, links).matrix()), 1e-10)
          << "nu " << nu << " links " << links;
  }
}

TEST(Swap, ChainIsMonotoneTowardVacuum) {
  double prev = 2.0;
  for (unsigned links = 2; links <= 12; ++links) {
    const double nu = chain_nu(2.0, links);
    EXPECT_LT(nu, prev);
    EXPECT_GT(nu, 1.0);
    prev = nu;
  }
  EXPECT_EQ(chain_nu(1.0, 7), 1.0);
  EXPECT_EQ(chain_nu(2.0, 1), 2.0);
  // Three links: chi^2 = (1/3)^3.
  EXPECT_NEAR(chain_nu(2.0, 3), 28.0 / 26.0, 1e-14);
  EXPECT_THROW(chain_nu(2.0, 0), std::invalid_argument);
}

TEST(KeyRate, PureTmsv) {
  const auto k = devetak_winter_rate(tmsv_cm(1.5), {1.0});
  EXPECT_GT(k.rate, 0.0);
  EXPECT_NEAR(k.mutual_information, std::log2(1.5), 1e-12);
  EXPECT_NEAR(k.holevo, 0.0, 1e-9);
  const auto zero = devetak_winter_rate(tmsv_cm(1.0), {1.0});
  EXPECT_NEAR(zero.raw, 0.0, 1e-12);
  EXPECT_THROW(devetak_winter_rate(tmsv_cm(1.5), {0.0}), std::domain_error);
}

TEST(KeyRate, MonotoneInLinksAndSymmetric) {
  for (double beta : {0.95, 1.0}) {
    double prev = devetak_winter_rate(swap_chain(1.8, 1), {beta}).raw;
    for (unsigned links = 2; links <= 8; ++links) {
      const auto v = swap_chain(1.8, links);
      const auto rev = devetak_winter_rate(v, {beta, Reconciliation::reverse});
      const auto dir = devetak_winter_rate(v, {beta, Reconciliation::direct});
      EXPECT_LE(rev.raw, prev);
      EXPECT_NEAR(rev.raw, dir.raw, 1e-12);
      prev = rev.raw;
    }
  }
}

TEST(KeyRate, HolevoMatchesExplicitEavesdropper) {
  for (double eta : {0.2, 0.6, 0.9}) {
    const auto abe = lossy_tmsv_with_eve(3.0, eta);
    const auto k = devetak_winter_rate(abe.reduced({0, 1}), {0.95});
    // Eve's state and her state after Bob's q homodyne.
    const double s_e = symplectic_entropy(abe.reduced({2}));
    const double s_e_given_b = symplectic_entropy(homodyne_condition(abe, 1, Quadrature::q).reduced({1}));
    EXPECT_NEAR(k.holevo, s_e - s_e_given_b, 1e-10);
    EXPECT_GE(k.rate, 0.0);
    if (k.raw < 0) {
      EXPECT_EQ(k.rate, 0.0);
    }
  }
}

TEST(PseudoInverse, SingularProjection) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
  m(0, 0) = 4.0;
  const Eigen::MatrixXd p = pseudo_inverse(m);
  EXPECT_NEAR(p(0, 0), 0.25, 1e-15);
  EXPECT_EQ(p(1, 1), 0.0);
}
