#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <exception>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "qpurify/errors.hpp"
#include "qpurify/fock_protocol.hpp"
#include "qpurify/gaussian.hpp"
#include "qpurify/rates.hpp"

namespace qpurify::sweep {

enum class OutputFormat { csv, json };

/// One table cell: empty, integer, real, or an infinite capacity.
struct Infinite {};
using Cell = std::variant<std::monostate, long long, double, Infinite>;

inline Cell cell(std::optional<double> v) { return v ? Cell{*v} : Cell{}; }
inline Cell cell(std::optional<unsigned> v) { return v ? Cell{static_cast<long long>(*v)} : Cell{}; }
inline Cell cell(const rates::Capacity& c) {
  return c.is_infinite() ? Cell{Infinite{}} : Cell{c.value()};
}

/// Column-ordered table serialized to CSV or JSON.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row) {
    if (row.size() != columns.size()) throw std::invalid_argument("Table: row width does not match columns");
    rows.push_back(std::move(row));
  }
};

inline std::string csv_text(const Cell& c) {
  struct {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(long long v) const { return std::to_string(v); }
    std::string operator()(double v) const { return format_double(v); }
    std::string operator()(Infinite) const { return "inf"; }
  } visit;
  return std::visit(visit, c);
}

inline nlohmann::json json_value(const Cell& c) {
  struct {
    nlohmann::json operator()(std::monostate) const { return nullptr; }
    nlohmann::json operator()(long long v) const { return v; }
    nlohmann::json operator()(double v) const { return v; }
    nlohmann::json operator()(Infinite) const { return nullptr; }
  } visit;
  return std::visit(visit, c);
}

/// Header row plus one line per row, LF endings.
inline void write_csv(std::ostream& os, const Table& t) {
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_text(row[i]);
    os << '\n';
  }
}

/// Array of row objects keyed by column name.
inline nlohmann::ordered_json to_json(const Table& t) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& row : t.rows) {
    nlohmann::ordered_json obj = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < row.size(); ++i) obj[t.columns[i]] = json_value(row[i]);
    arr.push_back(std::move(obj));
  }
  return arr;
}

inline void write_table(std::ostream& os, const Table& t, OutputFormat f) {
  if (f == OutputFormat::csv) write_csv(os, t);
  else os << to_json(t).dump(2) << '\n';
}

inline std::string render(const Table& t, OutputFormat f) {
  std::ostringstream os;
  write_table(os, t, f);
  return os.str();
}

/// Rate row with the fixed leading columns; absent values stay empty.
struct RateRow {
  std::optional<double> distance_km;
  double eta = 1.0;
  std::optional<unsigned> k;
  std::optional<unsigned> m;
  std::optional<double> rate;
  rates::Capacity capacity = rates::Capacity::infinite();
  std::optional<double> ratio;
  std::optional<double> probability;
  std::vector<std::optional<double>> extra;
};

inline const std::vector<std::string>& rate_columns() {
  static const std::vector<std::string> cols{"distance_km", "eta",      "k",     "m",
                                             "rate",        "capacity", "ratio", "probability"};
  return cols;
}

/// Rows plus the names of any trailing columns.
struct RateTable {
  std::vector<std::string> extra_columns;
  std::vector<RateRow> rows;
  // Repeater chains can beat the end-to-end capacity, so they clear this.
  bool capacity_bounded = true;

  /// Every row with a rate and a finite capacity satisfies ratio = rate /
  /// capacity, and rate <= capacity when capacity_bounded is set.
  void check_invariants(double tol = 1e-12) const {
    for (const auto& r : rows) {
      if (r.extra.size() != extra_columns.size())
        throw std::logic_error("RateTable: row has the wrong number of extra cells");
      const auto cap = r.capacity.finite_value();
      if (!r.rate || !cap) continue;
      if (capacity_bounded && *r.rate > *cap * (1 + tol) + tol)
        throw std::logic_error("RateTable: rate exceeds capacity at eta " + format_double(r.eta));
      if (r.ratio && *cap > 0 && std::abs(*r.ratio - *r.rate / *cap) > tol)
        throw std::logic_error("RateTable: ratio inconsistent with rate and capacity");
    }
  }

  Table table() const {
    check_invariants();
    Table t;
    t.columns = rate_columns();
    t.columns.insert(t.columns.end(), extra_columns.begin(), extra_columns.end());
    for (const auto& r : rows) {
      std::vector<Cell> row{cell(r.distance_km), Cell{r.eta}, cell(r.k),        cell(r.m),
                            cell(r.rate),        cell(r.capacity), cell(r.ratio), cell(r.probability)};
      for (const auto& x : r.extra) row.push_back(cell(x));
      t.add_row(std::move(row));
    }
    return t;
  }
};

/// Parses "a,b,c" or "start:stop:step" (inclusive of stop up to rounding).
inline std::vector<double> parse_distance_grid(const std::string& text) {
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("distance grid: cannot parse '" + s + "'");
    }
    if (used != s.size()) throw std::invalid_argument("distance grid: cannot parse '" + s + "'");
    return v;
  };
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) throw std::invalid_argument("distance grid: expected start:stop:step");
    const double start = number(parts[0]), stop = number(parts[1]), step = number(parts[2]);
    if (!(step > 0) || stop < start) throw std::invalid_argument("distance grid: need step > 0 and stop >= start");
    const auto n = static_cast<long long>(std::floor((stop - start) / step + 1e-9));
    for (long long i = 0; i <= n; ++i) out.push_back(start + static_cast<double>(i) * step);
  } else {
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');)
      if (!p.empty()) out.push_back(number(p));
  }
  if (out.empty()) throw std::invalid_argument("distance grid: empty");
  for (double d : out)
    if (!(d >= 0) || !std::isfinite(d)) throw std::invalid_argument("distance grid: distances must be >= 0");
  return out;
}

/// Evaluates fn(i) for i in [0, n) on up to `threads` workers and returns the
/// results in index order. The first failing index's exception is rethrown.
template <class Fn>
auto parallel_map(std::size_t n, unsigned threads, Fn&& fn) -> std::vector<decltype(fn(std::size_t{}))> {
  using T = decltype(fn(std::size_t{}));
  std::vector<std::optional<T>> slots(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        slots[i].emplace(fn(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1))));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<T> out;
  out.reserve(n);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

/// Sweep parameters shared by the subcommands.
struct SweepConfig {
  std::vector<double> distances_km;
  double loss_db_per_km = 0.2;
  std::optional<unsigned> k;
  std::optional<unsigned> m;
  unsigned k_max = 20;
  unsigned m_max = 20;
  unsigned links = 1;
  unsigned threads = 1;

  void validate() const {
    if (distances_km.empty()) throw std::invalid_argument("sweep: distance grid is empty");
    if (!(loss_db_per_km > 0)) throw std::invalid_argument("sweep: loss must be positive");
    if (k_max < 1 || m_max < 2) throw std::invalid_argument("sweep: need k-max >= 1 and m-max >= 2");
    if (links < 1) throw std::invalid_argument("sweep: links must be >= 1");
    if (m && *m < 1) throw std::invalid_argument("sweep: m must be >= 1");
  }
  double eta_at(double km) const { return rates::LinkSpec{km, loss_db_per_km}.transmissivity(); }
};

/// eta and PLOB capacity per distance.
inline RateTable capacity_table(const SweepConfig& cfg) {
  cfg.validate();
  RateTable t;
  for (double km : cfg.distances_km) {
    RateRow r;
    r.distance_km = km;
    r.eta = cfg.eta_at(km);
    r.capacity = rates::plob_capacity(r.eta);
    t.rows.push_back(r);
  }
  return t;
}

/// Optimized single-shot rate per distance (per link for chains, against the
/// end-to-end capacity). The trailing column is the k = 1, m = 2 rate.
inline RateTable single_shot_table(const SweepConfig& cfg) {
  cfg.validate();
  const rates::Log2DimTable dims(cfg.k_max, cfg.m_max);
  RateTable t;
  t.extra_columns = {"links", "qubit_rate"};
  t.capacity_bounded = cfg.links == 1;
  t.rows = parallel_map(cfg.distances_km.size(), cfg.threads, [&](std::size_t i) {
    const double km = cfg.distances_km[i];
    RateRow r;
    r.distance_km = km;
    r.eta = cfg.eta_at(km);
    const auto best = rates::optimize_repeater_chain({km, cfg.loss_db_per_km}, cfg.links, cfg.k_max, cfg.m_max, &dims);
    const auto& res = best.chain.result;
    r.k = best.code.k;
    r.m = best.code.m;
    r.rate = res.rate;
    r.capacity = res.capacity;
    r.ratio = res.ratio;
    r.probability = res.probability;
    r.extra = {static_cast<double>(cfg.links), rates::single_shot_rate({1, 2}, best.chain.link_eta).rate};
    return r;
  });
  return t;
}

/// Iterative protocol at fixed (k1, m) per distance, with the single-shot
/// rate and the residual failure probability alongside.
inline RateTable iterate_table(const SweepConfig& cfg) {
  cfg.validate();
  if (!cfg.k || !cfg.m) throw std::invalid_argument("iterate: --k and --m are required");
  RateTable t;
  t.extra_columns = {"single_shot_rate", "residual_failure"};
  t.rows = parallel_map(cfg.distances_km.size(), cfg.threads, [&](std::size_t i) {
    const double km = cfg.distances_km[i];
    RateRow r;
    r.distance_km = km;
    r.eta = cfg.eta_at(km);
    const auto it = rates::iterative_rate(*cfg.k, *cfg.m, r.eta);
    r.k = *cfg.k;
    r.m = *cfg.m;
    r.rate = it.result.rate;
    r.capacity = it.result.capacity;
    r.ratio = it.result.ratio;
    r.probability = it.result.probability;
    r.extra = {rates::single_shot_rate({*cfg.k, *cfg.m}, r.eta).rate, it.residual_failure_probability};
    return r;
  });
  return t;
}

/// Crossover distance of the optimized chain against end-to-end capacity.
inline Table crossover_table(const SweepConfig& cfg, const rates::CrossoverSearch& search = {}) {
  cfg.validate();
  const auto km = rates::find_plob_crossover(cfg.links, cfg.loss_db_per_km, cfg.k_max, cfg.m_max, search);
  Table t;
  t.columns = {"links", "loss_db_per_km", "crossover_km", "k", "m"};
  std::optional<unsigned> k, m;
  if (km) {
    const auto best = rates::optimize_repeater_chain({*km, cfg.loss_db_per_km}, cfg.links, cfg.k_max, cfg.m_max);
    k = best.code.k;
    m = best.code.m;
  }
  t.add_row({Cell{static_cast<long long>(cfg.links)}, Cell{cfg.loss_db_per_km}, cell(km), cell(k), cell(m)});
  return t;
}

/// Imperfections for the linear-optics circuit sweep.
struct FockSettings {
  std::optional<double> eta;  // overrides the distance grid
  double nbar = 0.0;
  double eta_eff = 1.0;
  double dark_nbar = 0.0;
  unsigned cutoff = 0;
};

/// Linear-optics circuit per distance: probability is the success
/// probability, rate is P * RCI / m.
inline RateTable fock_table(const SweepConfig& cfg, const FockSettings& fs) {
  if (!cfg.k || !cfg.m) throw std::invalid_argument("fock: --k and --m are required");
  if (!fs.eta) cfg.validate();
  const CodeParams p{*cfg.k, *cfg.m};
  const std::vector<std::optional<double>> grid =
      fs.eta ? std::vector<std::optional<double>>{std::nullopt}
             : std::vector<std::optional<double>>(cfg.distances_km.begin(), cfg.distances_km.end());
  RateTable t;
  t.extra_columns = {"rci", "fidelity", "purity"};
  t.rows = parallel_map(grid.size(), cfg.threads, [&](std::size_t i) {
    RateRow r;
    r.distance_km = grid[i];
    r.eta = fs.eta ? *fs.eta : cfg.eta_at(*grid[i]);
    fock::ChannelModel ch;
    ch.eta = r.eta;
    ch.nbar = fs.nbar;
    ch.eta_eff = fs.eta_eff;
    ch.dark_nbar = fs.dark_nbar;
    fock::LinearOpticsOptions opt;
    opt.cutoff = fs.cutoff;
    const auto lo = fock::linear_optics_rate(p, ch, opt);
    r.k = p.k;
    r.m = p.m;
    r.rate = lo.rate;
    r.capacity = rates::plob_capacity(r.eta);
    if (const auto cap = r.capacity.finite_value(); cap && *cap > 0) r.ratio = lo.rate / *cap;
    r.probability = lo.success_probability;
    r.extra = {lo.rci, lo.fidelity, lo.purity};
    return r;
  });
  return t;
}

/// Key rate after 1..links swaps of TMSV(nu) links.
inline Table swap_table(double nu, unsigned links, const gaussian::KeyRateInputs& in) {
  if (links < 1) throw std::invalid_argument("swap: links must be >= 1");
  Table t;
  t.columns = {"links", "nu", "beta", "key_rate", "key_rate_raw", "mutual_information", "holevo"};
  for (unsigned l = 1; l <= links; ++l) {
    const double nu_l = gaussian::chain_nu(nu, l);
    const auto k = gaussian::devetak_winter_rate(gaussian::tmsv_cm(nu_l), in);
    t.add_row({Cell{static_cast<long long>(l)}, Cell{nu_l}, Cell{in.beta}, Cell{k.rate}, Cell{k.raw},
               Cell{k.mutual_information}, Cell{k.holevo}});
  }
  return t;
}

}  // namespace qpurify::sweep
