// qpurify: rate sweeps, Fock-space circuit simulation, Gaussian swap key rates
// and the verification suite.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qpurify/qpurify.hpp"

namespace {

using namespace qpurify;

struct Options {
  std::vector<std::string> distance_km;
  double loss_db_per_km = 0.2;
  std::optional<unsigned> k;
  std::optional<unsigned> m;
  unsigned k_max = 20;
  unsigned m_max = 20;
  unsigned links = 1;
  std::optional<double> chi;
  std::optional<double> nu;
  std::optional<double> eta;
  double nbar = 0.0;
  double eta_eff = 1.0;
  double dark = 0.0;
  double beta = 0.95;
  std::string reconciliation = "reverse";
  unsigned cutoff = 0;
  std::string out;
  std::string format = "csv";
  unsigned threads = 1;
  bool find_crossover = false;
  std::vector<int> criteria;
};

sweep::SweepConfig sweep_config(const Options& o, bool needs_grid) {
  sweep::SweepConfig cfg;
  if (!o.distance_km.empty()) {
    // Config files deliver "a,b,c" already split.
    std::string grid;
    for (const auto& part : o.distance_km) grid += (grid.empty() ? "" : ",") + part;
    cfg.distances_km = sweep::parse_distance_grid(grid);
  } else if (needs_grid) {
    throw std::invalid_argument("--distance-km is required");
  }
  cfg.loss_db_per_km = o.loss_db_per_km;
  cfg.k = o.k;
  cfg.m = o.m;
  cfg.k_max = o.k_max;
  cfg.m_max = o.m_max;
  cfg.links = o.links;
  cfg.threads = o.threads;
  return cfg;
}

void emit(const Options& o, const sweep::Table& t) {
  const auto fmt = o.format == "json" ? sweep::OutputFormat::json : sweep::OutputFormat::csv;
  if (o.out.empty()) {
    sweep::write_table(std::cout, t, fmt);
    return;
  }
  std::ofstream f(o.out, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + o.out + " for writing");
  sweep::write_table(f, t, fmt);
  if (!f) throw std::runtime_error("failed writing " + o.out);
}

int run(const std::string& cmd, const Options& o) {
  if (cmd == "capacity") {
    emit(o, sweep::capacity_table(sweep_config(o, true)).table());
  } else if (cmd == "single-shot") {
    if (o.find_crossover) {
      const auto links = o.links == 1 ? 2u : o.links;
      auto cfg = sweep_config(o, false);
      cfg.links = links;
      if (cfg.distances_km.empty()) cfg.distances_km = {0.0};
      emit(o, sweep::crossover_table(cfg));
    } else {
      emit(o, sweep::single_shot_table(sweep_config(o, true)).table());
    }
  } else if (cmd == "iterate") {
    emit(o, sweep::iterate_table(sweep_config(o, true)).table());
  } else if (cmd == "fock") {
    sweep::FockSettings fs;
    fs.eta = o.eta;
    fs.nbar = o.nbar;
    fs.eta_eff = o.eta_eff;
    fs.dark_nbar = o.dark;
    fs.cutoff = o.cutoff;
    emit(o, sweep::fock_table(sweep_config(o, !o.eta), fs).table());
  } else if (cmd == "swap") {
    if (o.chi.has_value() == o.nu.has_value()) throw std::invalid_argument("swap needs exactly one of --chi or --nu");
    const double nu = o.nu ? *o.nu : SqueezingSpec(*o.chi).nu();
    gaussian::KeyRateInputs in;
    in.beta = o.beta;
    in.direction = o.reconciliation == "direct" ? gaussian::Reconciliation::direct : gaussian::Reconciliation::reverse;
    emit(o, sweep::swap_table(nu, o.links, in));
  } else if (cmd == "verify") {
    return acceptance::report(std::cout, acceptance::run(o.criteria)) ? 0 : 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entanglement purification rates and simulations over pure-loss channels"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Flat key = value file mirroring the long flags; flags override it");

  Options o;
  app.add_option("--distance-km", o.distance_km, "Distances: a,b,c or start:stop:step");
  app.add_option("--loss-db-per-km", o.loss_db_per_km, "Fiber loss")->capture_default_str();
  app.add_option("--k", o.k, "Code k (photons per block)");
  app.add_option("--m", o.m, "Code m (rails per block)");
  app.add_option("--k-max", o.k_max, "Largest k in the optimization")->capture_default_str();
  app.add_option("--m-max", o.m_max, "Largest m in the optimization")->capture_default_str();
  app.add_option("--links", o.links, "Elementary links in the chain")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--chi", o.chi, "TMSV squeezing parameter chi = tanh r");
  app.add_option("--nu", o.nu, "TMSV symplectic parameter (instead of --chi)");
  app.add_option("--eta", o.eta, "Fixed channel transmissivity (fock)");
  app.add_option("--nbar", o.nbar, "Channel thermal photons")->capture_default_str();
  app.add_option("--eta-eff", o.eta_eff, "Detector efficiency")->capture_default_str();
  app.add_option("--dark", o.dark, "Dark-count mean photon number")->capture_default_str();
  app.add_option("--beta", o.beta, "Reconciliation efficiency")->capture_default_str();
  app.add_option("--reconciliation", o.reconciliation, "reverse or direct")
      ->capture_default_str()
      ->check(CLI::IsMember({"reverse", "direct"}));
  app.add_option("--cutoff", o.cutoff, "Fock cutoff; 0 picks one automatically")->capture_default_str();
  app.add_option("--out", o.out, "Output file (default stdout)");
  app.add_option("--format", o.format, "csv or json")->capture_default_str()->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--threads", o.threads, "Worker threads for sweeps")->capture_default_str()->check(CLI::PositiveNumber);

  app.add_subcommand("capacity", "Transmissivity and repeaterless capacity per distance");
  app.add_subcommand("single-shot", "Optimized single-shot rate per distance")
      ->add_flag("--find-crossover", o.find_crossover, "Report where the chain beats the end-to-end capacity");
  app.add_subcommand("iterate", "Iterative protocol rate at fixed k, m");
  app.add_subcommand("fock", "Linear-optics circuit in a truncated Fock space");
  app.add_subcommand("swap", "Gaussian swap chain and secret-key rate");
  app.add_subcommand("verify", "Run the verification suite")->add_option("--criteria", o.criteria, "Criterion ids");

  CLI11_PARSE(app, argc, argv);
  try {
    return run(app.get_subcommands().front()->get_name(), o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
