#include "franson/pipeline.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <Eigen/Core>

#include "franson/analytics.hpp"
#include "franson/correlator.hpp"
#include "franson/errors.hpp"
#include "franson/fringe.hpp"
#include "franson/interferometer.hpp"
#include "franson/parallel.hpp"

namespace franson::pipeline {
namespace {

using nlohmann::json;
using interferometer::Detector;
constexpr double kPi = std::numbers::pi;
constexpr const char* kVersion = "1.0.0";

struct Context {
  const Experiment& e;
  const config::Config& cfg;
  Report& report;

  bool analytic() const { return e.mode != Mode::kMonteCarlo; }
  bool simulated() const { return e.mode != Mode::kAnalytic; }
  int jobs() const { return cfg.analysis.jobs; }
  double bins() const { return static_cast<double>(cfg.run_config(0, 0).bins()); }

  void emit(const std::string& file, const std::string& content) const {
    write_file(e.out_dir / file, content);
    report.files.push_back(file);
  }
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// The four (phi_a, phi_b) panels of the coincidence maps.
const std::array<std::pair<double, double>, 4> kPanels = {
    std::pair{0.0, 0.0}, std::pair{0.0, kPi}, std::pair{kPi, 0.0}, std::pair{kPi, kPi}};

std::vector<montecarlo::RunResult> simulate(const config::Config& c, const std::vector<std::pair<double, double>>& phases,
                                            int jobs) {
  std::vector<montecarlo::RunResult> out(phases.size());
  parallel_for(phases.size(), jobs, [&](std::size_t k) {
    auto rc = c.run_config(phases[k].first, phases[k].second);
    rc.seed = run_seed(c, k);
    out[k] = montecarlo::generate(rc);
  });
  return out;
}

// Bob's phase for the four fringes of a scan.
constexpr std::array<double, 4> kFringePhases = {0.0, kPi / 2, kPi, 3 * kPi / 2};

// ---- g2_map -------------------------------------------------------------

void run_g2_map(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  auto model = cfg.model();
  json results;
  if (ctx.analytic()) {
    const auto map = analytics::g2_map(phase_grid(cfg.analysis.phi_points, true), cfg.network.phi_b, model,
                                       cfg.map_options());
    ctx.emit("map.csv", map.to_csv());
    ctx.emit("map.json", map.to_json().dump(2));
  }
  // Baseline-normalized g2 at integer lags for the four panels.
  model.rate = analytics::RateModel::kClick;
  const int max_lag = static_cast<int>(cfg.correlator.max_lag_ps / static_cast<std::uint64_t>(cfg.network.tau_ps));
  model.n_bins = std::max(model.n_bins, max_lag + 1);
  std::vector<std::vector<double>> predicted(kPanels.size());
  for (std::size_t k = 0; k < kPanels.size(); ++k) {
    auto [pa, pb] = kPanels[k];
    const double norm = analytics::single_rate(model, pa, Detector::kA1) * analytics::single_rate(model, pb, Detector::kB1);
    for (int lag = -max_lag; lag <= max_lag; ++lag) {
      predicted[k].push_back(analytics::coincidence_rate(model, pa, pb, lag) / norm);
    }
  }
  std::vector<correlator::G2Curve> measured;
  if (ctx.simulated()) {
    if (cfg.correlator.bin_ps != static_cast<std::uint64_t>(cfg.network.tau_ps)) {
      throw ConfigError("g2_map Monte-Carlo panels need correlator.bin_ps equal to network.tau_ps");
    }
    const auto runs = simulate(cfg, {kPanels.begin(), kPanels.end()}, ctx.jobs());
    for (const auto& r : runs) {
      correlator::Options opt;
      opt.duration_ps = r.truth.bins * static_cast<std::uint64_t>(cfg.network.tau_ps);
      opt.jobs = ctx.jobs();
      measured.push_back(correlator::normalize_g2(correlator::cross_correlate(
          r.streams[0].timestamps, r.streams[2].timestamps, cfg.correlator.bin_ps, cfg.correlator.max_lag_ps, opt)));
    }
  }
  std::ostringstream csv;
  csv << "phi_a,phi_b,lag,g2_model" << (ctx.simulated() ? ",g2_mc,sigma_mc" : "") << '\n';
  json panels = json::array();
  double worst_z = 0;
  for (std::size_t k = 0; k < kPanels.size(); ++k) {
    json panel = {{"phi_a", kPanels[k].first}, {"phi_b", kPanels[k].second}, {"g2_model", predicted[k]}};
    std::vector<double> mc;
    for (int i = 0; i < 2 * max_lag + 1; ++i) {
      csv << fmt(kPanels[k].first) << ',' << fmt(kPanels[k].second) << ',' << i - max_lag << ','
          << fmt(predicted[k][static_cast<std::size_t>(i)]);
      if (ctx.simulated()) {
        const auto& g = measured[k];
        const double v = g.g2[static_cast<std::size_t>(i)];
        // Poisson error on the raw count behind v.
        const double t = static_cast<double>(g.duration_ps);
        const double expected = (g.rate_x * t * 1e-12) * (g.rate_y * t * 1e-12) * static_cast<double>(g.bin_width_ps) / t;
        const double sigma = std::sqrt(std::max(v * expected, 1.0)) / expected;
        csv << ',' << fmt(v) << ',' << fmt(sigma);
        mc.push_back(v);
        worst_z = std::max(worst_z, std::abs(v - predicted[k][static_cast<std::size_t>(i)]) / sigma);
      }
      csv << '\n';
    }
    if (ctx.simulated()) panel["g2_mc"] = mc;
    panels.push_back(panel);
  }
  ctx.emit("panels.csv", csv.str());
  results["panels"] = panels;
  results["lags"] = max_lag;
  if (ctx.simulated()) results["max_abs_z"] = worst_z;
  ctx.report.results = results;
}

// ---- fringe_scan --------------------------------------------------------

void run_fringe_scan(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto model = cfg.model();
  const auto& phi_bs = kFringePhases;
  json results = {{"beta", cfg.source.beta}};
  std::ostringstream csv;
  csv << "source,phi_a,phi_b,count\n";

  auto summarize = [&](const std::string& label, const std::array<std::vector<fringe::Point>, 4>& scans,
                       const fringe::FitOptions& opt) {
    json fits = json::array();
    double v_sum = 0, var_sum = 0;
    for (std::size_t b = 0; b < 4; ++b) {
      const auto fit = fringe::fit_fringe(scans[b], phi_bs[b], opt);
      auto j = fit.to_json();
      j["phi_b"] = phi_bs[b];
      fits.push_back(j);
      v_sum += fit.visibility;
      var_sum += fit.sigma_visibility * fit.sigma_visibility;
      for (const auto& p : scans[b]) csv << label << ',' << fmt(p.phi) << ',' << fmt(phi_bs[b]) << ',' << fmt(p.count) << '\n';
    }
    const double v = v_sum / 4, sigma = std::sqrt(var_sum) / 4;
    results[label] = {{"fits", fits}, {"visibility", v}, {"sigma_visibility", sigma}};
    return std::pair{v, sigma};
  };

  const bool tuned_v = cfg.analysis.target_visibility > 0;
  if (ctx.analytic()) {
    std::array<std::vector<fringe::Point>, 4> scans;
    const auto grid = phase_grid(cfg.analysis.phi_points);
    for (std::size_t b = 0; b < 4; ++b) {
      for (double pa : grid) scans[b].push_back({pa, ctx.bins() * analytics::coincidence_rate(model, pa, phi_bs[b], 0)});
    }
    fringe::FitOptions opt;
    opt.poisson_weights = false;
    const auto [v, s] = summarize("analytic", scans, opt);
    ctx.report.comparisons.push_back(anchors::compare_to_anchor(
        v, s, "visibility", tuned_v ? "background tuned to this visibility" : "model-ideal upper bound", true));
  }
  if (ctx.simulated()) {
    const auto grid = phase_grid(cfg.montecarlo.phi_points);
    std::vector<std::pair<double, double>> phases;
    for (double pb : phi_bs) {
      for (double pa : grid) phases.emplace_back(pa, pb);
    }
    std::vector<double> counts(phases.size());
    parallel_for(phases.size(), ctx.jobs(), [&](std::size_t k) {
      auto rc = cfg.run_config(phases[k].first, phases[k].second);
      rc.seed = run_seed(cfg, k);
      const auto r = montecarlo::generate(rc);
      counts[k] = static_cast<double>(
          correlator::coincidences_at(r.streams[0].timestamps, r.streams[2].timestamps, 0, cfg.correlator.window_ps));
    });
    std::array<std::vector<fringe::Point>, 4> scans;
    for (std::size_t k = 0; k < phases.size(); ++k) scans[k / grid.size()].push_back({phases[k].first, counts[k]});
    const auto [v, s] = summarize("montecarlo", scans, {});
    ctx.report.comparisons.push_back(anchors::compare_to_anchor(
        v, s, "visibility", tuned_v ? "simulated, background tuned" : "simulated, ideal model", !tuned_v));
  }
  ctx.emit("fringes.csv", csv.str());
  ctx.report.results = results;
}

// ---- chsh_table ---------------------------------------------------------

std::string chsh_csv(const chsh::Result& r) {
  std::ostringstream os;
  os << "phi_a,phi_b,n11,n12,n21,n22,E,sigma_E\n";
  for (std::size_t k = 0; k < 4; ++k) {
    const auto& c = r.correlations[k];
    const auto& n = r.counts.per_setting[k];
    os << fmt(c.phi_a) << ',' << fmt(c.phi_b) << ',' << fmt(n.n11) << ',' << fmt(n.n12) << ',' << fmt(n.n21) << ','
       << fmt(n.n22) << ',' << fmt(c.e) << ',' << fmt(std::sqrt(c.variance)) << '\n';
  }
  return os.str();
}

void run_chsh_table(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const chsh::Settings settings;
  json results = {{"beta", cfg.source.beta}};
  const bool ideal = cfg.source.beta == 0 && cfg.analysis.target_visibility == 0;
  std::optional<chsh::Result> exact;
  if (ctx.analytic()) {
    exact = analytics::chsh_analytic(cfg.model(), settings, cfg.analysis.chsh_bins);
    results["analytic"] = exact->to_json();
    ctx.emit("chsh_analytic.csv", chsh_csv(*exact));
    ctx.emit("chsh_analytic.json", results["analytic"].dump(2));
    ctx.report.comparisons.push_back(anchors::compare_to_anchor(
        exact->s, exact->sigma_s, "chsh_s", ideal ? "model-ideal upper bound" : "analytic, background model", ideal));
    const double v = anchors::anchor("visibility").value;
    const double s_v = chsh::s_for_visibility(settings, v);
    results["s_from_reference_visibility"] = s_v;
    ctx.report.comparisons.push_back(
        anchors::compare_to_anchor(s_v, 0.0, "chsh_s", "2 sqrt2 times the reference visibility"));
  }
  if (ctx.simulated()) {
    const auto counts = simulate_chsh(cfg, settings, ctx.jobs());
    const auto r = chsh::chsh(counts);
    results["montecarlo"] = r.to_json();
    ctx.emit("chsh_montecarlo.csv", chsh_csv(r));
    ctx.emit("chsh_montecarlo.json", results["montecarlo"].dump(2));
    ctx.report.comparisons.push_back(anchors::compare_to_anchor(
        r.s, r.sigma_s, "chsh_s", ideal ? "simulated, ideal model" : "simulated, background model", ideal));
    if (exact) results["montecarlo_z"] = (r.s - exact->s) / r.sigma_s;
  }
  // The primary table: simulated when only simulated, exact otherwise.
  ctx.emit("chsh.json", results[ctx.analytic() ? "analytic" : "montecarlo"].dump(2));
  ctx.report.results = results;
}

// ---- background_sweep ---------------------------------------------------

void run_background_sweep(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  if (cfg.analysis.betas.empty()) throw ConfigError("analysis.betas must not be empty");
  auto model = cfg.model();
  json results;
  if (ctx.analytic()) {
    const auto sweep = analytics::s_vs_background(cfg.analysis.betas, model, ctx.jobs());
    ctx.emit("sweep.csv", sweep.to_csv());
    results["analytic"] = sweep.to_json();
    if (sweep.crossover_beta) {
      ctx.report.comparisons.push_back(
          anchors::compare_to_anchor(*sweep.crossover_beta, 0, "crossover_beta", "model S = 2 crossing"));
      ctx.report.comparisons.push_back(
          anchors::compare_to_anchor(*sweep.crossover_g2, 0, "crossover_g2", "model S = 2 crossing"));
    }
    for (auto [g2_id, s_id] : {std::pair{"g2_weak", "chsh_s"}, std::pair{"g2_strong", "chsh_s_strong"}}) {
      const double g2 = anchors::anchor(g2_id).value;
      try {
        auto p = model;
        p.beta = analytics::beta_for_model_g2(model, g2);
        const double s = analytics::chsh_analytic(p).s;
        ctx.report.comparisons.push_back(anchors::compare_to_anchor(
            s, 0, s_id, "model S where model g2(0) = " + fmt(g2) + " (beta " + fmt(p.beta) + ")", true));
      } catch (const std::invalid_argument&) {
        results["unreached_g2"].push_back(g2);
      }
    }
  }
  if (ctx.simulated()) {
    std::ostringstream csv;
    csv << "beta,S,sigma_S\n";
    json rows = json::array();
    for (double beta : cfg.analysis.betas) {
      auto c = cfg;
      c.source.beta = beta;
      const auto r = chsh::chsh(simulate_chsh(c, {}, ctx.jobs()));
      csv << fmt(beta) << ',' << fmt(r.s) << ',' << fmt(r.sigma_s) << '\n';
      rows.push_back({{"beta", beta}, {"S", r.s}, {"sigma_S", r.sigma_s}});
    }
    ctx.emit("sweep_montecarlo.csv", csv.str());
    results["montecarlo"] = rows;
  }
  ctx.report.results = results;
}

// ---- baseline_study -----------------------------------------------------

void run_baseline_study(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto model = cfg.model();
  json results;
  if (ctx.analytic()) {
    const auto grid = phase_grid(cfg.analysis.phi_points, true);
    const std::size_t n = grid.size();
    std::vector<double> lag0(n * n), base(n * n);
    parallel_for(n * n, ctx.jobs(), [&](std::size_t k) {
      const double pa = grid[k / n], pb = grid[k % n];
      lag0[k] = analytics::coincidence_rate(model, pa, pb, 0);
      base[k] = analytics::coincidence_rate(model, pa, pb, 2);
    });
    // Factorized law B0 (1 + V_A cos phi_a)(1 + V_B cos phi_b), anchored at quadrature.
    const double b0 = analytics::coincidence_rate(model, kPi / 2, kPi / 2, 2);
    const double va = analytics::coincidence_rate(model, 0, kPi / 2, 2) / b0 - 1;
    const double vb = analytics::coincidence_rate(model, kPi / 2, 0, 2) / b0 - 1;
    double worst = 0, peak = 0;
    std::ostringstream csv;
    csv << "phi_a,phi_b,lag0_rate,baseline_rate,g2_lag0\n";
    for (std::size_t k = 0; k < n * n; ++k) {
      const double pa = grid[k / n], pb = grid[k % n];
      const double law = b0 * (1 + va * std::cos(pa)) * (1 + vb * std::cos(pb));
      worst = std::max(worst, std::abs(base[k] - law));
      peak = std::max(peak, base[k]);
      csv << fmt(pa) << ',' << fmt(pb) << ',' << fmt(lag0[k]) << ',' << fmt(base[k]) << ','
          << fmt(base[k] > 0 ? lag0[k] / base[k] : 0.0) << '\n';
    }
    ctx.emit("baseline.csv", csv.str());
    const double bunching = analytics::coincidence_rate(model, kPi, kPi, 0) / analytics::coincidence_rate(model, kPi, kPi, 2);
    results["analytic"] = {{"visibility_a", va},
                           {"visibility_b", vb},
                           {"one_minus_q", 1 - cfg.source.q},
                           {"factorization_residual", peak > 0 ? worst / peak : 0.0},
                           {"g2_lag0_pi_pi", bunching}};
  }
  if (ctx.simulated()) {
    const std::vector<std::pair<double, double>> phases = {{0.0, 0.0}, {kPi, kPi}};
    const auto runs = simulate(cfg, phases, ctx.jobs());
    const auto tau = static_cast<std::int64_t>(cfg.network.tau_ps);
    const int far = std::max(2, static_cast<int>(cfg.correlator.max_lag_ps / static_cast<std::uint64_t>(tau)));
    json rows = json::array();
    for (std::size_t k = 0; k < phases.size(); ++k) {
      const auto& x = runs[k].streams[0].timestamps;
      const auto& y = runs[k].streams[2].timestamps;
      const double zero = static_cast<double>(correlator::coincidences_at(x, y, 0, cfg.correlator.window_ps));
      double side = 0;
      int count = 0;
      for (int lag = 2; lag <= far; ++lag) {
        for (int s : {-1, 1}) {
          side += static_cast<double>(correlator::coincidences_at(x, y, s * lag * tau, cfg.correlator.window_ps));
          ++count;
        }
      }
      side /= count;
      const double g2 = side > 0 ? zero / side : 0.0;
      const double sigma = (zero > 0 && side > 0) ? g2 * std::sqrt(1 / zero + 1 / (side * count)) : 0.0;
      rows.push_back({{"phi_a", phases[k].first}, {"phi_b", phases[k].second}, {"g2_lag0", g2}, {"sigma", sigma}});
    }
    results["montecarlo"] = rows;
  }
  ctx.emit("baseline.json", results.dump(2));
  ctx.report.results = results;
}

// ---- multiport_postselect -----------------------------------------------

void run_multiport(const Context& ctx) {
  if (ctx.e.mode != Mode::kAnalytic) throw ConfigError("multiport_postselect has only an analytic path");
  const int n = ctx.cfg.network.multiport_n;
  std::ostringstream csv;
  csv << "n,probability,n_factorial_over_n_pow_n\n";
  json rows = json::array();
  double p_n = 0;
  for (int m = 2; m <= n; ++m) {
    const double p = multiport_probability(m);
    const double law = std::tgamma(m + 1) / std::pow(m, m);
    csv << m << ',' << fmt(p) << ',' << fmt(law) << '\n';
    rows.push_back({{"n", m}, {"probability", p}, {"law", law}});
    if (m == n) p_n = p;
  }
  ctx.emit("multiport.csv", csv.str());
  if (n >= 3) {
    const double p3 = rows[1]["probability"].get<double>();
    ctx.report.comparisons.push_back(anchors::compare_to_anchor(p3, 0, "tripartite_probability", "n = 3"));
  }
  ctx.report.results = {{"rows", rows}, {"probability", p_n}};
}

}  // namespace

std::string_view name(Kind k) {
  switch (k) {
    case Kind::kG2Map: return "g2_map";
    case Kind::kFringeScan: return "fringe_scan";
    case Kind::kChshTable: return "chsh_table";
    case Kind::kBackgroundSweep: return "background_sweep";
    case Kind::kBaselineStudy: return "baseline_study";
    case Kind::kMultiportPostselect: return "multiport_postselect";
  }
  return "?";
}

std::string_view name(Mode m) {
  switch (m) {
    case Mode::kAnalytic: return "analytic";
    case Mode::kMonteCarlo: return "montecarlo";
    case Mode::kBoth: return "both";
  }
  return "?";
}

Kind kind_from_name(std::string_view s) {
  for (Kind k : {Kind::kG2Map, Kind::kFringeScan, Kind::kChshTable, Kind::kBackgroundSweep, Kind::kBaselineStudy,
                 Kind::kMultiportPostselect}) {
    if (name(k) == s) return k;
  }
  throw ConfigError("unknown experiment '" + std::string(s) + "'");
}

Mode mode_from_name(std::string_view s) {
  for (Mode m : {Mode::kAnalytic, Mode::kMonteCarlo, Mode::kBoth}) {
    if (name(m) == s) return m;
  }
  throw ConfigError("unknown mode '" + std::string(s) + "'");
}

std::string Report::markdown() const {
  std::ostringstream os;
  os << "# " << name(kind) << " (" << name(mode) << ")\n\n";
  if (comparisons.empty()) {
    os << "No reference values apply to this experiment.\n";
  } else {
    os << anchors::markdown_table(comparisons);
  }
  os << "\nFiles: ";
  for (std::size_t i = 0; i < files.size(); ++i) os << (i ? ", " : "") << files[i];
  os << "\n";
  return os.str();
}

std::vector<double> phase_grid(int n, bool closed) {
  if (n < 2) throw std::invalid_argument("phase grid needs at least 2 points");
  std::vector<double> g(static_cast<std::size_t>(n));
  const double step = 2 * kPi / (closed ? n - 1 : n);
  for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = i * step;
  return g;
}

double multiport_probability(int n) {
  interferometer::MultiportConfig cfg;
  cfg.n = n;
  cfg.n_bins = n;
  const auto net = interferometer::build_multiport(cfg);
  auto basis = fock::make_basis(net.inputs(), n);
  std::vector<std::uint8_t> occ(net.size(), 0);
  for (int t = 0; t < n; ++t) occ[*net.input_index(fock::photonic("src", t))] = 1;
  const auto out = fock::apply_network(fock::FockState::from_occupation(basis, fock::Occupation(occ)), net);
  return interferometer::postselect_one_per_port(out, n).second;
}

double model_visibility(const analytics::ModelParams& p) {
  fringe::FitOptions opt;
  opt.poisson_weights = false;
  double sum = 0;
  for (double pb : kFringePhases) {
    std::vector<fringe::Point> pts;
    for (double pa : phase_grid(12)) pts.push_back({pa, analytics::coincidence_rate(p, pa, pb, 0)});
    double scale = 0;
    for (const auto& pt : pts) scale = std::max(scale, pt.count);
    for (auto& pt : pts) pt.count /= scale;
    sum += fringe::fit_fringe(pts, pb, opt).visibility;
  }
  return sum / kFringePhases.size();
}

double beta_for_visibility(const analytics::ModelParams& p, double v) {
  auto at = [&](double beta) {
    auto q = p;
    q.beta = beta;
    return model_visibility(q) - v;
  };
  double lo = 0.0, hi = 0.95;
  if (at(lo) < 0 || at(hi) > 0) throw std::invalid_argument("visibility " + fmt(v) + " is not reachable");
  for (int i = 0; i < 30; ++i) {
    const double mid = 0.5 * (lo + hi);
    (at(mid) > 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

config::Config tuned(const config::Config& c) {
  if (c.analysis.target_visibility <= 0) return c;
  auto out = c;
  out.source.beta = beta_for_visibility(c.model(), c.analysis.target_visibility);
  return out;
}

chsh::PairCounts count_pairs(const std::array<timetag::TimeTagStream, 4>& streams, std::uint64_t window_ps) {
  auto n = [&](Detector x, Detector y) {
    return static_cast<double>(correlator::coincidences_at(streams[static_cast<std::size_t>(x)].timestamps,
                                                           streams[static_cast<std::size_t>(y)].timestamps, 0,
                                                           window_ps));
  };
  return {n(Detector::kA1, Detector::kB1), n(Detector::kA1, Detector::kB2), n(Detector::kA2, Detector::kB1),
          n(Detector::kA2, Detector::kB2)};
}

std::uint64_t run_seed(const config::Config& c, std::size_t k) { return c.montecarlo.seed + k; }

chsh::Counts simulate_chsh(const config::Config& c, const chsh::Settings& settings, int jobs) {
  chsh::Counts counts;
  counts.settings = settings;
  std::vector<std::pair<double, double>> phases;
  for (int k = 0; k < 4; ++k) phases.push_back(settings.pair(k));
  const auto runs = simulate(c, phases, jobs);
  for (std::size_t k = 0; k < 4; ++k) counts.per_setting[k] = count_pairs(runs[k].streams, c.correlator.window_ps);
  return counts;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + tmp.string());
    os << content;
    if (!os) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Report run(const Experiment& e) {
  const std::string where = std::string(name(e.kind)) + " (" + std::string(name(e.mode)) + "): ";
  try {
    const auto cfg = tuned(e.config);
    Report report;
    report.kind = e.kind;
    report.mode = e.mode;
    std::filesystem::create_directories(e.out_dir);
    const Context ctx{e, cfg, report};
    switch (e.kind) {
      case Kind::kG2Map: run_g2_map(ctx); break;
      case Kind::kFringeScan: run_fringe_scan(ctx); break;
      case Kind::kChshTable: run_chsh_table(ctx); break;
      case Kind::kBackgroundSweep: run_background_sweep(ctx); break;
      case Kind::kBaselineStudy: run_baseline_study(ctx); break;
      case Kind::kMultiportPostselect: run_multiport(ctx); break;
    }
    json comparisons = json::array();
    for (const auto& c : report.comparisons) comparisons.push_back(c.to_json());
    const json results = {{"experiment", name(e.kind)},
                          {"mode", name(e.mode)},
                          {"results", report.results},
                          {"comparisons", comparisons}};
    ctx.emit("results.json", results.dump(2));
    ctx.emit("report.md", report.markdown());
    const json manifest = {{"tool", "franson"},
                           {"version", kVersion},
                           {"experiment", name(e.kind)},
                           {"mode", name(e.mode)},
                           {"config_hash", e.config.hash()},
                           {"seed", e.config.montecarlo.seed},
                           {"effective_beta", cfg.source.beta},
                           {"config", e.config.to_json()},
                           {"compiler", __VERSION__},
                           {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                         "." + std::to_string(EIGEN_MINOR_VERSION)},
                           {"files", report.files}};
    write_file(e.out_dir / "manifest.json", manifest.dump(2));
    return report;
  } catch (const ConfigError& err) {
    throw ConfigError(where + err.what());
  } catch (const std::exception& err) {
    throw std::runtime_error(where + err.what());
  }
}

}  // namespace franson::pipeline
