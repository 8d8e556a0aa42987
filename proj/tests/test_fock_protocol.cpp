#include <gtest/gtest.h>

#include <cmath>

#include "qpurify/fock_protocol.hpp"
#include "qpurify/rates.hpp"

using namespace qpurify;
using namespace qpurify::fock;

namespace {

std::vector<std::size_t> first(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

double closed_form_success(const CodeParams& p, double eta) {
  return std::pow(eta, p.k) / std::pow(2.0, p.m * (p.k - 1.0)) / resource_norm_S(p).convert_to<double>();
}

}  // namespace

TEST(Tmsv, AmplitudesAndTail) {
  const auto t = make_tmsv(SqueezingSpec(0.5), 4);
  EXPECT_NEAR(t.state.amplitude({2, 2}).real(), std::sqrt(0.75) * 0.25, 1e-15);
  EXPECT_NEAR(t.tail_weight, std::pow(0.5, 10), 1e-18);
  EXPECT_NEAR(t.state.norm2(), 1.0 - t.tail_weight, 1e-15);
  EXPECT_TRUE(t.warning.has_value());
  EXPECT_FALSE(make_tmsv(SqueezingSpec(0.1), 6).warning.has_value());
  EXPECT_EQ(make_tmsv(SqueezingSpec(0.0), 3).state.size(), 1u);
}

TEST(Heralded, DirectStateNormAndStructure) {
  const FockArray psi = heralded_state_direct(2, 1, 2);
  EXPECT_NEAR(psi.norm2(), 1.0, 1e-14);
  for (const auto& [n, a] : psi.amplitudes()) {
    EXPECT_EQ(n[0] + n[1], 2u);
    EXPECT_EQ(n[2] + n[3], 1u);
    EXPECT_EQ(n[0], n[2] + n[4]);
    EXPECT_EQ(n[1], n[3] + n[5]);
  }
  EXPECT_THROW(heralded_state_direct(1, 2, 2), std::domain_error);
}

TEST(Heralded, UnnormalizedNormIsJointProbability) {
  const SqueezingSpec s(0.4);
  for (unsigned k1 = 0; k1 <= 3; ++k1)
    for (unsigned j1 = 0; j1 <= k1; ++j1) {
      const double expect = herald_prob_alice({k1, 2}, s) * herald_prob_bob(k1, j1, 0.35);
      EXPECT_NEAR(heralded_state_unnormalized(k1, j1, 2, s, 0.35).norm2(), expect, 1e-15);
    }
}

TEST(Heralded, MatchesChannelSimulation) {
  const SqueezingSpec s(0.45);
  for (unsigned m = 1; m <= 2; ++m)
    for (unsigned k1 = 1; k1 <= 3; ++k1)
      for (unsigned j1 = 0; j1 <= k1; ++j1)
        for (double eta : {0.3, 0.7}) {
          const auto sim = heralded_state_simulated(k1, j1, m, s, eta, 6);
          const auto full = heralded_state_simulated(k1, j1, m, s, eta, 6, true);
          const auto direct = reduced_state(heralded_state_direct(k1, j1, m), first(2 * m));
          EXPECT_LT(trace_distance(sim.state_ab, direct), 1e-10);
          EXPECT_LT(trace_distance(full.state_ab, direct), 1e-10);
          EXPECT_NEAR(sim.probability, herald_prob_alice({k1, m}, s) * herald_prob_bob(k1, j1, eta), 1e-14);
        }
}

TEST(Heralded, RciMatchesLogBinomialFormula) {
  for (unsigned m = 1; m <= 3; ++m)
    for (unsigned k = 0; k <= 3; ++k)
      for (unsigned j = 0; j <= k; ++j) {
        const auto rho = reduced_state(heralded_state_direct(k, j, m), first(2 * m));
        EXPECT_NEAR(rci_numeric(rho, first(m)), rates::rci_heralded(k, j, m), 1e-9);
      }
}

TEST(Resource, LexicographicSmallExample) {
  const FockArray omega = build_resource_state({1, 2}, CodewordOrder::lexicographic);
  EXPECT_EQ(omega.size(), 2u);
  EXPECT_NEAR(omega.amplitude({0, 1, 0}).real(), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(omega.amplitude({1, 0, 1}).real(), std::sqrt(0.5), 1e-15);
}

TEST(Resource, WeightsFollowBinomials) {
  const CodeParams p{2, 2};
  const FockArray omega = build_resource_state(p);
  const double s = resource_norm_S(p).convert_to<double>();
  EXPECT_NEAR(omega.norm2(), 1.0, 1e-15);
  // Code word (1,1) has weight 1/(C(2,1) C(2,1)).
  double found = 0;
  for (const auto& [n, a] : omega.amplitudes())
    if (n[1] == 1 && n[2] == 1) found = std::norm(a);
  EXPECT_NEAR(found, 0.25 / s, 1e-15);
}

TEST(LinearOptics, SuccessProbabilityAndFidelity) {
  for (const CodeParams p : {CodeParams{1, 2}, CodeParams{1, 3}, CodeParams{2, 2}})
    for (double eta : {0.4, 0.8}) {
      ChannelModel ch;
      ch.eta = eta;
      const auto r = linear_optics_purify(p, ch);
      EXPECT_NEAR(r.success_probability, closed_form_success(p, eta), 1e-9);
      EXPECT_NEAR(r.fidelity, 1.0, 1e-9);
      EXPECT_NEAR(r.purity, 1.0, 1e-9);
    }
}

TEST(LinearOptics, OrderDoesNotChangeOutcome) {
  ChannelModel ch;
  ch.eta = 0.6;
  LinearOpticsOptions lex;
  lex.order = CodewordOrder::lexicographic;
  const auto a = linear_optics_purify({2, 3}, ch);
  const auto b = linear_optics_purify({2, 3}, ch, lex);
  EXPECT_NEAR(a.success_probability, b.success_probability, 1e-14);
  EXPECT_NEAR(b.fidelity, 1.0, 1e-12);
}

TEST(LinearOptics, UnequalRailsStayPure) {
  ChannelModel ch;
  ch.rail_eta = {0.8, 0.5};
  const auto r = linear_optics_purify({1, 2}, ch);
  EXPECT_NEAR(r.purity, 1.0, 1e-12);
  EXPECT_NEAR(r.success_probability, 0.325, 1e-14);
  EXPECT_LT(r.fidelity, 0.99);
  ch.rail_eta = {0.8};
  EXPECT_THROW(linear_optics_purify({1, 2}, ch), std::invalid_argument);
}

TEST(LinearOptics, NoisyRateDegradesWithDistance) {
  double previous = 1.0;
  for (double km : {1.0, 10.0, 20.0, 40.0}) {
    ChannelModel ch;
    ch.eta = rates::LinkSpec{km, 0.2}.transmissivity();
    ch.nbar = 0.01;
    ch.eta_eff = 0.5;
    ch.dark_nbar = 1e-6;
    const auto r = linear_optics_rate({1, 2}, ch);
    EXPECT_GT(r.rci, 0.0);
    EXPECT_LT(r.rci, previous);
    previous = r.rci;
    if (km == 10.0) {
      EXPECT_NEAR(r.rci, 0.91413961774668906, 1e-9);
      EXPECT_NEAR(r.success_probability, 0.079208727678610716, 1e-9);
    }
  }
}

TEST(Detector, ModelValidation) {
  EXPECT_THROW((DetectorModel{1.0, 1e-6}.validate()), std::domain_error);
  EXPECT_THROW((DetectorModel{1.2, 0.0}.validate()), std::domain_error);
  EXPECT_DOUBLE_EQ((DetectorModel{0.5, 1e-6}.environment_nbar()), 2e-6);
  ChannelModel ch;
  ch.eta_eff = 1.0;
  ch.dark_nbar = 0.1;
  EXPECT_THROW(linear_optics_purify({1, 2}, ch), std::domain_error);
}

TEST(Detector, Statistics) {
  const auto q = detector_statistics({0.0, 1.0}, {0.5, 0.0}, 3);
  EXPECT_NEAR(q[0], 0.5, 1e-15);
  EXPECT_NEAR(q[1], 0.5, 1e-15);
  const auto dark = detector_statistics({1.0}, {0.5, 1e-3}, 4);
  EXPECT_NEAR(dark[1] + 2 * dark[2] + 3 * dark[3] + 4 * dark[4], 1e-3, 1e-9);
  EXPECT_THROW(detector_statistics({}, {}, 2), std::invalid_argument);
}

TEST(Csum, Tables) {
  const auto a = distorted_csum(1, 1, 1);
  EXPECT_EQ(a.output, (Occupation{1, 2}));
  EXPECT_DOUBLE_EQ(a.factor, 1.0);
  EXPECT_DOUBLE_EQ(distorted_csum(0, 0, 1).factor, std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(distorted_csum(1, 2, 2).factor, std::sqrt(3.0) / (2 * std::sqrt(2.0)));
  EXPECT_DOUBLE_EQ(distorted_csum(2, 1, 2).factor, std::sqrt(3.0) / 2);
  EXPECT_EQ(distorted_csum(2, 2, 2).output, (Occupation{2, 4}));
  EXPECT_THROW(distorted_csum(0, 0, 3), UnsupportedError);
  EXPECT_THROW(distorted_csum(2, 0, 1), UnsupportedError);
}

TEST(BruteForce, MatchesIterativeRate) {
  for (const auto& [k1, m, eta] : {std::tuple{2u, 2u, 0.5}, std::tuple{1u, 3u, 0.4}, std::tuple{2u, 3u, 0.5},
                                   std::tuple{3u, 3u, 0.7}}) {
    const auto brute = iterative_rate_bruteforce(k1, m, eta);
    const auto analytic = rates::iterative_rate(k1, m, eta);
    EXPECT_NEAR(brute.rate, analytic.result.rate, 1e-9);
    EXPECT_NEAR(brute.success_probability, analytic.result.probability, 1e-9);
    EXPECT_NEAR(brute.residual_failure_probability, analytic.residual_failure_probability, 1e-9);
  }
}

TEST(Json, RoundTrip) {
  FockArray psi(2, 3);
  psi.set({0, 3}, {0.1, -0.2});
  psi.set({2, 1}, 1.0 / 3);
  const auto j = to_json(psi);
  EXPECT_EQ(j.at("format"), "qpurify.fock_array");
  const FockArray back = fock_array_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(back.amplitudes(), psi.amplitudes());
  auto bad = j;
  bad["version"] = 2;
  EXPECT_THROW(fock_array_from_json(bad), std::invalid_argument);
}

TEST(Tmsv, TailAndReducedEntropy) {
  const SqueezingSpec s(0.6);
  const auto t = make_tmsv(s, 20);
  EXPECT_LT(1.0 - t.state.norm2(), 1e-8);
  EXPECT_NEAR(von_neumann_entropy(reduced_state(t.state.normalized(), {0})), tmsv_entropy(s), 1e-6);
}

TEST(Qnd, AliceHeraldProbabilities) {
  const SqueezingSpec s(0.5);
  const unsigned m = 2;
  const FockArray rails = make_tmsv_rails(s, m, 6);
  for (const auto& r : qnd_total_number(rails, first(m))) {
    if (r.outcome <= 6) {
      EXPECT_NEAR(r.probability, herald_prob_alice({r.outcome, m}, s), 1e-10);
    }
  }
  FockArray two(2, 2);
  two.set({2, 0}, 1.0);
  const auto recs = qnd_total_number(two, {0, 1});
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].outcome, 2u);
  EXPECT_DOUBLE_EQ(recs[0].probability, 1.0);
}

TEST(Heralded, IndependentOfTransmissivity) {
  const SqueezingSpec s(0.3);
  for (unsigned j1 = 0; j1 <= 2; ++j1) {
    const auto a = heralded_state_simulated(2, j1, 2, s, 0.3, 4);
    const auto b = heralded_state_simulated(2, j1, 2, s, 0.7, 4);
    EXPECT_LT(trace_distance(a.state_ab, b.state_ab), 1e-12);
  }
}

TEST(Heralded, NoLossGivesMaximalEntanglement) {
  for (unsigned m = 1; m <= 3; ++m)
    for (unsigned k = 1; k <= 3; ++k) {
      const auto rho = reduced_state(heralded_state_direct(k, k, m), first(m));
      EXPECT_NEAR(von_neumann_entropy(rho), log2_multiset_dim({k, m}), 1e-9);
    }
}

TEST(Rci, ProductStateIsZero) {
  FockArray psi(2, 2);
  psi.set({1, 0}, 0.6);
  psi.set({1, 2}, 0.8);
  EXPECT_NEAR(rci_numeric(DensityOperator::from_pure(psi), {0}), 0.0, 1e-10);
  const auto rho = reduced_state(heralded_state_direct(2, 1, 3), first(6));
  EXPECT_NEAR(rci_numeric(rho, first(3)), 1.0, 1e-9);
}

TEST(Resource, NormalizationAndRatios) {
  for (unsigned k = 1; k <= 3; ++k)
    for (unsigned m = 1; m <= 3; ++m) {
      double sum = 0;
      for (const auto& n : enumerate_codewords({k, m})) {
        double prod = 1;
        for (unsigned x : n) prod *= binomial_double(k, x);
        sum += 1 / prod;
      }
      EXPECT_NEAR(sum, resource_norm_S({k, m}).convert_to<double>(), 1e-12);
      EXPECT_NEAR(build_resource_state({k, m}).norm2(), 1.0, 1e-12);
    }
  // Rails (1,1) against rails (0,2): amplitude ratio f = 1/2.
  const FockArray omega = build_resource_state({2, 2});
  double a11 = 0, a02 = 0;
  for (const auto& [n, a] : omega.amplitudes()) {
    if (n[1] == 1 && n[2] == 1) a11 = a.real();
    if (n[1] == 0 && n[2] == 2) a02 = a.real();
  }
  EXPECT_NEAR(a11 / a02, 0.5, 1e-15);
}

TEST(LinearOptics, ClosedFormAtUnitTransmissivity) {
  ChannelModel ch;
  ch.eta = 1.0;
  EXPECT_NEAR(linear_optics_purify({2, 2}, ch).success_probability, 1.0 / 9, 1e-12);
  ch.eta = 0.5;
  EXPECT_NEAR(linear_optics_purify({1, 2}, ch).success_probability, 0.25, 1e-12);
}

TEST(LinearOptics, DetectorLossKeepsPurity) {
  ChannelModel ideal;
  ideal.eta = 0.7;
  ChannelModel lossy = ideal;
  lossy.eta_eff = 0.6;
  for (const CodeParams p : {CodeParams{1, 2}, CodeParams{2, 2}}) {
    const auto a = linear_optics_purify(p, ideal);
    const auto b = linear_optics_purify(p, lossy);
    EXPECT_LT(b.success_probability, a.success_probability);
    EXPECT_NEAR(b.purity, 1.0, 1e-9);
    EXPECT_NEAR(b.fidelity, 1.0, 1e-9);
  }
}

TEST(LinearOptics, NoisyOutputBelowPureLoss) {
  ChannelModel pure;
  pure.eta = rates::LinkSpec{10.0, 0.2}.transmissivity();
  ChannelModel noisy = pure;
  noisy.nbar = 0.01;
  noisy.eta_eff = 0.5;
  noisy.dark_nbar = 1e-6;
  const double clean = linear_optics_rate({1, 2}, pure).rci;
  const double dirty = linear_optics_rate({1, 2}, noisy).rci;
  EXPECT_NEAR(clean, 1.0, 1e-9);
  EXPECT_GT(dirty, 0.0);
  EXPECT_LT(dirty, clean);
}

TEST(Detector, ClickStatistics) {
  const std::vector<double> in{0.2, 0.5, 0.3};
  const auto same = detector_statistics(in, {1.0, 0.0}, 2);
  for (std::size_t i = 0; i < in.size(); ++i) EXPECT_DOUBLE_EQ(same[i], in[i]);
  const auto vac = detector_statistics({1.0}, {0.5, 1e-6}, 3);
  EXPECT_NEAR(1.0 - vac[0], 1e-6, 1e-11);
}
