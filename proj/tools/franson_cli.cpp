// franson: command-line front end to the simulation and analysis pipeline.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "franson/chsh.hpp"
#include "franson/config.hpp"
#include "franson/correlator.hpp"
#include "franson/errors.hpp"
#include "franson/montecarlo.hpp"
#include "franson/pipeline.hpp"
#include "franson/source.hpp"
#include "franson/timetag.hpp"

namespace fs = std::filesystem;
using namespace franson;

namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  int verbosity = 0;
};

config::Config load_config(const Common& c) {
  auto overrides = c.overrides;
  if (c.seed) overrides.push_back("montecarlo.seed=" + std::to_string(*c.seed));
  if (c.jobs) overrides.push_back("analysis.jobs=" + std::to_string(*c.jobs));
  std::optional<fs::path> file;
  if (!c.config_path.empty()) file = c.config_path;
  return config::load(file, overrides);
}

fs::path out_dir(const Common& c) {
  fs::path p = c.out.empty() ? fs::path("franson-out") : fs::path(c.out);
  fs::create_directories(p);
  return p;
}

void note(const Common& c, const std::string& msg) {
  if (c.verbosity > 0) std::cerr << msg << '\n';
}

// "100ps", "10ns", "1.5us", "2ms", "1s" or a bare number of picoseconds.
std::uint64_t parse_duration_ps(const std::string& text) {
  static const std::regex re(R"(^\s*([0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*(ps|ns|us|ms|s)?\s*$)");
  std::smatch m;
  if (!std::regex_match(text, m, re)) throw ConfigError("cannot parse duration '" + text + "'");
  double scale = 1;
  const std::string unit = m[2];
  if (unit == "ns") scale = 1e3;
  if (unit == "us") scale = 1e6;
  if (unit == "ms") scale = 1e9;
  if (unit == "s") scale = 1e12;
  const double ps = std::stod(m[1]) * scale;
  if (std::abs(ps - std::round(ps)) > 1e-6) throw ConfigError("duration '" + text + "' is not a whole number of ps");
  return static_cast<std::uint64_t>(std::llround(ps));
}

timetag::TimeTagStream pick_stream(const std::string& file, const std::string& channel) {
  const auto streams = timetag::read_tags(file);
  if (!channel.empty()) return timetag::find_channel(streams, interferometer::detector_from_name(channel));
  if (streams.size() != 1) {
    throw ConfigError(file + " holds " + std::to_string(streams.size()) + " channels; choose one with --a-channel/--b-channel");
  }
  return streams.front();
}

void print_report(const pipeline::Report& r, const fs::path& dir) {
  std::cout << r.markdown();
  std::cout << "output: " << dir.string() << '\n';
}

pipeline::Report run_experiment(const Common& common, pipeline::Kind kind, const std::string& mode) {
  pipeline::Experiment e;
  e.kind = kind;
  e.mode = pipeline::mode_from_name(mode);
  e.config = load_config(common);
  e.out_dir = out_dir(common);
  note(common, "running " + std::string(pipeline::name(kind)) + " into " + e.out_dir.string());
  auto r = pipeline::run(e);
  print_report(r, e.out_dir);
  return r;
}

void write_streams(const fs::path& dir, const std::array<timetag::TimeTagStream, 4>& streams, const std::string& format) {
  fs::create_directories(dir);
  for (const auto& s : streams) {
    const fs::path p = dir / ("tags_" + std::string(interferometer::name(s.channel)) + "." + format);
    if (format == "qtt") {
      timetag::write_qtt(p, {s});
    } else {
      timetag::write_csv(p, {s});
    }
  }
}

fs::path channel_file(const fs::path& dir, interferometer::Detector d) {
  for (const char* ext : {"qtt", "csv"}) {
    const fs::path p = dir / ("tags_" + std::string(interferometer::name(d)) + "." + ext);
    if (fs::exists(p)) return p;
  }
  throw std::runtime_error("no tag file for " + std::string(interferometer::name(d)) + " in " + dir.string());
}

void print_chsh(const chsh::Result& r) {
  std::printf("S = %.6f +- %.6f\n", r.s, r.sigma_s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Franson time-bin entanglement: simulation, correlation and CHSH analysis"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", "franson 1.0.0");

  Common common;
  app.add_option("--config", common.config_path, "JSON configuration file")->check(CLI::ExistingFile);
  app.add_option("--set", common.overrides, "Override a key: section.key=value (repeatable)");
  app.add_option("--out", common.out, "Output directory (default: $FRANSON_OUT or ./franson-out)")->envname("FRANSON_OUT");
  app.add_option("--seed", common.seed, "Monte-Carlo seed");
  app.add_option("--jobs", common.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_flag("-v,--verbose", common.verbosity, "Progress on standard error");

  std::string mode = "analytic";
  auto add_mode = [&](CLI::App* sub) {
    sub->add_option("--mode", mode, "analytic, montecarlo or both")
        ->check(CLI::IsMember({"analytic", "montecarlo", "both"}));
  };

  auto* map = app.add_subcommand("map", "Phase-dependent coincidence maps and g2 panels");
  add_mode(map);
  bool baseline = false;
  map->add_flag("--baseline", baseline, "Run the baseline study instead");

  auto* fringes = app.add_subcommand("fringes", "Two-photon fringes and visibility fit");
  add_mode(fringes);

  auto* chsh_cmd = app.add_subcommand("chsh", "CHSH table");
  bool chsh_analytic = false, chsh_mc = false;
  std::string counts_file;
  auto* o_an = chsh_cmd->add_flag("--analytic", chsh_analytic, "Exact model counts (default)");
  auto* o_mc = chsh_cmd->add_flag("--montecarlo", chsh_mc, "Simulated counts");
  auto* o_counts = chsh_cmd->add_option("--counts", counts_file, "Counts JSON from 'correlate --chsh-dir'")
                       ->check(CLI::ExistingFile);
  o_an->excludes(o_mc)->excludes(o_counts);
  o_mc->excludes(o_counts);

  auto* sweep = app.add_subcommand("sweep", "S and g2(0) versus laser background");
  add_mode(sweep);

  auto* tags = app.add_subcommand("tags", "Generate detector time tags");
  std::optional<double> tag_phi_a, tag_phi_b;
  std::string tag_format = "qtt";
  bool tags_chsh = false;
  tags->add_option("--phi-a", tag_phi_a, "Alice phase (default network.phi_a)");
  tags->add_option("--phi-b", tag_phi_b, "Bob phase (default network.phi_b)");
  tags->add_option("--format", tag_format, "qtt or csv")->check(CLI::IsMember({"qtt", "csv"}));
  tags->add_flag("--chsh", tags_chsh, "One run per CHSH setting, in setting_0..3");

  auto* correlate = app.add_subcommand("correlate", "Cross-correlate time-tag files");
  std::string file_a, file_b, chan_a, chan_b, bin_text = "100ps", lag_text = "10ns", chsh_dir, window_text;
  bool auto_corr = false;
  correlate->add_option("--a", file_a, "First tag file")->check(CLI::ExistingFile);
  correlate->add_option("--b", file_b, "Second tag file")->check(CLI::ExistingFile);
  correlate->add_option("--a-channel", chan_a, "Channel in the first file (A1..B2)");
  correlate->add_option("--b-channel", chan_b, "Channel in the second file");
  correlate->add_option("--bin", bin_text, "Bin width, e.g. 100ps");
  correlate->add_option("--max-lag", lag_text, "Largest |lag|, e.g. 10ns");
  correlate->add_flag("--auto", auto_corr, "Autocorrelation: skip self pairs");
  correlate->add_option("--chsh-dir", chsh_dir, "Directory written by 'tags --chsh'")->check(CLI::ExistingDirectory);
  correlate->add_option("--window", window_text, "Coincidence window for --chsh-dir (default correlator.window_ps)");

  auto* multiport = app.add_subcommand("multiport", "One-photon-per-port post-selection");
  std::optional<int> ports;
  multiport->add_option("--n", ports, "Number of ports")->check(CLI::Range(2, 5));

  auto* calibrate = app.add_subcommand("calibrate", "Drive power for a mean photon number");
  std::optional<double> nbar;
  calibrate->add_option("--nbar", nbar, "Mean photon number per lifetime (default source.nbar)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*map) {
      run_experiment(common, baseline ? pipeline::Kind::kBaselineStudy : pipeline::Kind::kG2Map, mode);
    } else if (*fringes) {
      run_experiment(common, pipeline::Kind::kFringeScan, mode);
    } else if (*sweep) {
      run_experiment(common, pipeline::Kind::kBackgroundSweep, mode);
    } else if (*multiport) {
      if (ports) common.overrides.push_back("network.multiport_n=" + std::to_string(*ports));
      run_experiment(common, pipeline::Kind::kMultiportPostselect, "analytic");
    } else if (*chsh_cmd) {
      if (!counts_file.empty()) {
        std::ifstream is(counts_file);
        const auto j = nlohmann::json::parse(is, nullptr, false);
        if (j.is_discarded()) throw ConfigError(counts_file + " is not valid JSON");
        const auto r = chsh::chsh(chsh::counts_from_json(j));
        const auto dir = out_dir(common);
        pipeline::write_file(dir / "chsh.json", r.to_json().dump(2));
        print_chsh(r);
      } else {
        const auto r = run_experiment(common, pipeline::Kind::kChshTable, chsh_mc ? "montecarlo" : "analytic");
        const auto& res = r.results[chsh_mc ? "montecarlo" : "analytic"];
        std::printf("S = %.6f +- %.6f\n", res["S"].get<double>(), res["sigma_S"].get<double>());
      }
    } else if (*tags) {
      const auto cfg = pipeline::tuned(load_config(common));
      const auto dir = out_dir(common);
      std::vector<std::pair<double, double>> phases;
      if (tags_chsh) {
        const chsh::Settings s;
        for (int k = 0; k < 4; ++k) phases.push_back(s.pair(k));
      } else {
        phases.emplace_back(tag_phi_a.value_or(cfg.network.phi_a), tag_phi_b.value_or(cfg.network.phi_b));
      }
      nlohmann::json truths = nlohmann::json::array();
      for (std::size_t k = 0; k < phases.size(); ++k) {
        auto rc = cfg.run_config(phases[k].first, phases[k].second);
        rc.seed = pipeline::run_seed(cfg, k);
        note(common, "generating " + std::to_string(rc.bins()) + " bins at phases (" + std::to_string(phases[k].first) +
                         ", " + std::to_string(phases[k].second) + ")");
        const auto r = montecarlo::generate(rc);
        const fs::path sub = tags_chsh ? dir / ("setting_" + std::to_string(k)) : dir;
        write_streams(sub, r.streams, tag_format);
        auto t = r.truth.to_json();
        t["run"] = rc.to_json();
        truths.push_back(t);
      }
      pipeline::write_file(dir / "truth.json", truths.dump(2));
      pipeline::write_file(dir / "config.json", cfg.to_json().dump(2));
      std::cout << "output: " << dir.string() << '\n';
    } else if (*correlate) {
      const auto cfg = load_config(common);
      const auto dir = out_dir(common);
      if (!chsh_dir.empty()) {
        const std::uint64_t window = window_text.empty() ? cfg.correlator.window_ps : parse_duration_ps(window_text);
        chsh::Counts counts;
        for (int k = 0; k < 4; ++k) {
          const fs::path sub = fs::path(chsh_dir) / ("setting_" + std::to_string(k));
          std::array<timetag::TimeTagStream, 4> streams;
          for (auto d : interferometer::kDetectors) {
            streams[static_cast<std::size_t>(d)] =
                timetag::find_channel(timetag::read_tags(channel_file(sub, d)), d);
          }
          counts.per_setting[static_cast<std::size_t>(k)] = pipeline::count_pairs(streams, window);
        }
        pipeline::write_file(dir / "counts.json", chsh::to_json(counts).dump(2));
        print_chsh(chsh::chsh(counts));
      } else {
        if (file_a.empty() || file_b.empty()) throw ConfigError("correlate needs --a and --b, or --chsh-dir");
        const std::uint64_t bin = parse_duration_ps(bin_text), max_lag = parse_duration_ps(lag_text);
        if (bin == 0 || max_lag % bin != 0) throw ConfigError("--max-lag must be a multiple of a non-zero --bin");
        const auto a = pick_stream(file_a, chan_a);
        const auto b = pick_stream(file_b, chan_b);
        correlator::Options opt;
        opt.autocorrelation = auto_corr;
        opt.jobs = cfg.analysis.jobs;
        const auto h = correlator::cross_correlate(a.timestamps, b.timestamps, bin, max_lag, opt);
        pipeline::write_file(dir / "histogram.csv", h.to_csv());
        if (h.n_x > 0 && h.n_y > 0) pipeline::write_file(dir / "g2.json", correlator::normalize_g2(h).to_json().dump(2));
        std::cout << "output: " << (dir / "histogram.csv").string() << '\n';
      }
    } else if (*calibrate) {
      const auto cfg = load_config(common);
      const double p = source::power_calibration(nbar.value_or(cfg.source.nbar), cfg.source.t1, cfg.source.nu);
      std::printf("%.4e W\n", p);
    }
  } catch (const ConfigError& e) {
    std::cerr << "franson: configuration error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "franson: error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
