#pragma once

#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qpurify/combinatorics.hpp"
#include "qpurify/fock_protocol.hpp"
#include "qpurify/gaussian.hpp"
#include "qpurify/rates.hpp"

namespace qpurify::acceptance {

struct Outcome {
  bool passed = false;
  std::string detail;
};

struct Criterion {
  int id = 0;
  std::string title;
  double budget_seconds = 0.0;  // 0 means no runtime limit
  std::function<Outcome()> run;
};

struct Result {
  int id = 0;
  std::string title;
  bool passed = false;
  double seconds = 0.0;
  std::string detail;
};

namespace detail {

inline double eta_at(double km) { return rates::LinkSpec{km, 0.2}.transmissivity(); }

inline std::vector<std::size_t> first(std::size_t n) {
  std::vector<std::size_t> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = i;
  return v;
}

// Collects failures; passes when nothing was recorded.
class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    ++checks_;
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    if (!ok) ++failed_;
  }
  Outcome outcome(const std::string& summary) const {
    std::ostringstream os;
    os << summary << "; " << checks_ - failed_ << "/" << checks_ << " checks";
    for (const auto& f : failures_) os << "; FAIL " << f;
    return {failed_ == 0 && checks_ > 0, os.str()};
  }

 private:
  std::size_t checks_ = 0, failed_ = 0;
  std::vector<std::string> failures_;
};

inline std::string num(double x) { return format_double(x); }

inline Outcome closed_form_s() {
  Checker c;
  for (unsigned k = 1; k <= 4; ++k)
    for (unsigned m = 1; m <= 8; ++m) {
      const auto closed = resource_norm_S_closed({k, m});
      c.expect(closed && *closed == resource_norm_S({k, m}),
               "S(" + std::to_string(k) + "," + std::to_string(m) + ")");
    }
  return c.outcome("brute-force S equals the closed forms");
}

inline Outcome long_distance_limit() {
  Checker c;
  const auto best = rates::optimize_single_shot(eta_at(200.0), 300, 30);
  const double ratio = best.result.ratio.value_or(0.0);
  c.expect(best.code == CodeParams{1, 3}, "optimum (" + std::to_string(best.code.k) + "," +
                                              std::to_string(best.code.m) + ") instead of (1,3)");
  c.expect(std::abs(ratio - std::log(3.0) / 3.0) <= 0.005, "ratio " + num(ratio));
  return c.outcome("200 km ratio " + num(ratio) + " at (k,m)=(" + std::to_string(best.code.k) + "," +
                   std::to_string(best.code.m) + ")");
}

inline Outcome repeater_crossover() {
  Checker c;
  const auto km = rates::find_plob_crossover(2, 0.2, 20, 20);
  c.expect(km.has_value(), "no crossover found");
  if (km) c.expect(std::abs(*km - 46.3) <= 0.2, "crossover " + num(*km) + " km");
  return c.outcome("crossover at " + (km ? num(*km) : std::string("none")) + " km");
}

inline Outcome heralded_oracle() {
  Checker c;
  const SqueezingSpec s(0.5);
  double worst = 0.0, worst_eta = 0.0;
  for (unsigned m = 1; m <= 3; ++m)
    for (unsigned k1 = 0; k1 <= 3; ++k1)
      for (unsigned j1 = 0; j1 <= k1; ++j1) {
        const auto direct = fock::reduced_state(fock::heralded_state_direct(k1, j1, m), first(2 * m));
        std::optional<fock::DensityOperator> previous;
        for (double eta : {0.3, 0.7}) {
          const std::string tag = "(k1,j1,m,eta)=(" + std::to_string(k1) + "," + std::to_string(j1) + "," +
                                  std::to_string(m) + "," + num(eta) + ")";
          const auto sim = fock::heralded_state_simulated(k1, j1, m, s, eta, 6);
          const double td = fock::trace_distance(sim.state_ab, direct);
          worst = std::max(worst, td);
          c.expect(td < 1e-10, "trace distance " + num(td) + " at " + tag);
          if (m <= 2) {
            const auto full = fock::heralded_state_simulated(k1, j1, m, s, eta, 6, true);
            const double tf = fock::trace_distance(full.state_ab, direct);
            worst = std::max(worst, tf);
            c.expect(tf < 1e-10, "channel-first trace distance " + num(tf) + " at " + tag);
          }
          if (previous) {
            const double d = fock::trace_distance(*previous, sim.state_ab);
            worst_eta = std::max(worst_eta, d);
            c.expect(d < 1e-12, "eta dependence " + num(d) + " at " + tag);
          }
          previous = sim.state_ab;
        }
      }
  return c.outcome("max trace distance " + num(worst) + ", max eta dependence " + num(worst_eta));
}

inline Outcome linear_optics_closed_form() {
  Checker c;
  double worst_p = 0.0, worst_f = 0.0;
  for (const CodeParams p : {CodeParams{1, 2}, CodeParams{1, 3}, CodeParams{2, 2}})
    for (double eta : {0.4, 0.8}) {
      fock::ChannelModel ch;
      ch.eta = eta;
      const auto r = fock::linear_optics_purify(p, ch);
      const double expect = std::pow(eta, p.k) / std::pow(2.0, p.m * (p.k - 1.0)) /
                            resource_norm_S(p).convert_to<double>();
      const double dp = std::abs(r.success_probability - expect), df = std::abs(r.fidelity - 1.0);
      worst_p = std::max(worst_p, dp);
      worst_f = std::max(worst_f, df);
      const std::string tag = "(k,m,eta)=(" + std::to_string(p.k) + "," + std::to_string(p.m) + "," + num(eta) + ")";
      c.expect(dp <= 1e-9, "probability off by " + num(dp) + " at " + tag);
      c.expect(df <= 1e-9, "fidelity off by " + num(df) + " at " + tag);
    }
  return c.outcome("max probability error " + num(worst_p) + ", max fidelity error " + num(worst_f));
}

inline Outcome rci_consistency() {
  Checker c;
  double worst = 0.0;
  for (unsigned m = 1; m <= 3; ++m)
    for (unsigned k = 0; k <= 3; ++k)
      for (unsigned j = 0; j <= k; ++j) {
        const auto rho = fock::reduced_state(fock::heralded_state_direct(k, j, m), first(2 * m));
        const double d = std::abs(fock::rci_numeric(rho, first(m)) - rates::rci_heralded(k, j, m));
        worst = std::max(worst, d);
        c.expect(d <= 1e-9, "(k,j,m)=(" + std::to_string(k) + "," + std::to_string(j) + "," + std::to_string(m) +
                                ") off by " + num(d));
      }
  return c.outcome("max RCI difference " + num(worst));
}

inline Outcome round_one_trend() {
  Checker c;
  std::ostringstream summary;
  for (double eta : {0.3, 0.5, 0.7}) {
    const unsigned m = 3;
    const auto r = rates::avg_rci_round1(2000, m, eta);
    const double scaled = m / (m - 1.0) * (r.success + r.failure);
    const double cap = rates::plob_capacity(eta).value();
    const double rel = std::abs(scaled - cap) / cap;
    summary << (eta == 0.3 ? "" : ", ") << "eta " << num(eta) << " rel err " << num(rel);
    c.expect(rel < 0.01, "eta " + num(eta) + " relative error " + num(rel));
  }
  return c.outcome(summary.str());
}

inline Outcome ratio_limits() {
  Checker c;
  const double g1 = rates::entanglement_ratio_round1(SqueezingSpec(0.999), 2);
  const auto gn = rates::entanglement_ratio_round_n(3, 200, 2);
  const double target = 199.0 / 200.0;
  c.expect(g1 > 0.45 && g1 < 0.5, "Gamma_1 " + num(g1));
  c.expect(!gn.degenerate && std::abs(gn.value - target) / target < 0.01, "Gamma_n " + num(gn.value));
  return c.outcome("Gamma_1 " + num(g1) + ", Gamma_n " + num(gn.value));
}

inline Outcome gaussian_swap() {
  Checker c;
  const auto v = gaussian::dual_homodyne_swap(gaussian::tmsv_cm(2.0), gaussian::tmsv_cm(2.0));
  const double t = 1.25, x = 0.75;
  Eigen::Matrix4d expect;
  expect << t, 0, -x, 0,
            0, t, 0, x,
            -x, 0, t, 0,
            0, x, 0, t;
  const double err = (v.matrix() - expect).cwiseAbs().maxCoeff();
  c.expect(err <= 1e-10, "max entry error " + num(err));
  return c.outcome("max entry error " + num(err));
}

inline Outcome finite_m_iterative() {
  Checker c;
  double worst_brute = 0.0;
  for (double km : {1.0, 10.0, 100.0}) {
    const double eta = eta_at(km);
    const double cap = rates::plob_capacity(eta).value();
    for (unsigned m = 2; m <= 5; ++m)
      for (unsigned k1 = 1; k1 <= 4; ++k1) {
        const std::string tag = "(k1,m,km)=(" + std::to_string(k1) + "," + std::to_string(m) + "," + num(km) + ")";
        const double it = rates::iterative_rate(k1, m, eta).result.rate;
        const double ss = rates::single_shot_rate({k1, m}, eta).rate;
        c.expect(it <= cap, "iterative above capacity at " + tag);
        c.expect(it >= ss, "iterative below single-shot at " + tag);
        if (k1 == 1) c.expect(it == ss, "k1 = 1 differs from single-shot at " + tag);
      }
    const double brute = fock::iterative_rate_bruteforce(2, 2, eta).rate;
    const double d = std::abs(brute - rates::iterative_rate(2, 2, eta).result.rate);
    worst_brute = std::max(worst_brute, d);
    c.expect(d <= 1e-9, "brute force differs by " + num(d) + " at " + num(km) + " km");
  }
  return c.outcome("max brute-force difference " + num(worst_brute));
}

inline Outcome imperfection_robustness() {
  Checker c;
  std::ostringstream summary;
  double previous = 0.0;
  bool first_point = true;
  for (double km : {1.0, 10.0, 20.0, 40.0}) {
    fock::ChannelModel ch;
    ch.eta = eta_at(km);
    ch.nbar = 0.01;
    ch.eta_eff = 0.5;
    ch.dark_nbar = 1e-6;
    const double rci = fock::linear_optics_rate({1, 2}, ch).rci;
    summary << (first_point ? "" : ", ") << num(km) << " km RCI " << num(rci);
    if (km == 10.0) c.expect(rci > 0.0, "RCI at 10 km is " + num(rci));
    if (!first_point) c.expect(rci < previous, "RCI does not decrease at " + num(km) + " km");
    previous = rci;
    first_point = false;
  }
  return c.outcome(summary.str());
}

}  // namespace detail

inline std::vector<Criterion> suite() {
  return {
      {1, "closed-form resource normalization", 1.0, detail::closed_form_s},
      {2, "long-distance single-shot limit", 10.0, detail::long_distance_limit},
      {3, "one-repeater capacity crossover", 30.0, detail::repeater_crossover},
      {4, "heralded state channel-simulation oracle", 120.0, detail::heralded_oracle},
      {5, "linear-optics success probability and fidelity", 120.0, detail::linear_optics_closed_form},
      {6, "numerical RCI of heralded states", 0.0, detail::rci_consistency},
      {7, "round-one capacity trend", 5.0, detail::round_one_trend},
      {8, "entanglement-ratio limits", 0.0, detail::ratio_limits},
      {9, "dual-homodyne swap covariance", 0.0, detail::gaussian_swap},
      {10, "finite-m iterative rates", 300.0, detail::finite_m_iterative},
      {11, "imperfection robustness", 0.0, detail::imperfection_robustness},
  };
}

/// Runs the selected criteria (all when empty); an empty selection result is an error.
inline std::vector<Result> run(const std::vector<int>& only = {}) {
  std::vector<Result> out;
  for (const auto& crit : suite()) {
    if (!only.empty() && std::find(only.begin(), only.end(), crit.id) == only.end()) continue;
    Result r{crit.id, crit.title, false, 0.0, {}};
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const Outcome o = crit.run();
      r.passed = o.passed;
      r.detail = o.detail;
    } catch (const std::exception& e) {
      r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (crit.budget_seconds > 0 && r.seconds > crit.budget_seconds) {
      r.passed = false;
      r.detail += "; runtime " + format_double(r.seconds) + " s exceeds " + format_double(crit.budget_seconds) + " s";
    }
    out.push_back(std::move(r));
  }
  if (out.empty()) throw std::invalid_argument("acceptance: no criteria selected");
  return out;
}

/// One line per criterion; returns true when all passed.
inline bool report(std::ostream& os, const std::vector<Result>& results) {
  bool all = true;
  for (const auto& r : results) {
    char secs[32];
    std::snprintf(secs, sizeof secs, "%.2f", r.seconds);
    os << (r.passed ? "PASS" : "FAIL") << "  [" << r.id << "] " << r.title << " (" << secs << " s): " << r.detail
       << '\n';
    all = all && r.passed;
  }
  os << (all ? "all " : "") << std::count_if(results.begin(), results.end(), [](const Result& r) { return r.passed; })
     << "/" << results.size() << " criteria passed\n";
  return all;
}

}  // namespace qpurify::acceptance
