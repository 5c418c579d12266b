#include "franson/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "franson/errors.hpp"

namespace franson::config {
namespace {

using nlohmann::json;

class Reader {
 public:
  Reader(const json& root, const std::string& name, std::set<std::string> keys) : name_(name) {
    if (!root.contains(name)) return;
    node_ = &root.at(name);
    if (!node_->is_object()) throw ConfigError("section '" + name + "' must be an object");
    for (const auto& [key, value] : node_->items()) {
      if (!keys.count(key)) throw ConfigError("unknown key '" + name + "." + key + "'");
    }
  }

  void number(const char* key, double& out) const {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(where(key) + " must be a number");
      out = v->get<double>();
    }
  }
  void integer(const char* key, int& out) const {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) throw ConfigError(where(key) + " must be an integer");
      out = v->get<int>();
    }
  }
  void unsigned_integer(const char* key, std::uint64_t& out) const {
    if (const json* v = find(key)) {
      if (!v->is_number_unsigned()) throw ConfigError(where(key) + " must be a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }
  void string(const char* key, std::string& out) const {
    if (const json* v = find(key)) {
      if (!v->is_string()) throw ConfigError(where(key) + " must be a string");
      out = v->get<std::string>();
    }
  }
  void numbers(const char* key, std::vector<double>& out) const {
    if (const json* v = find(key)) {
      if (!v->is_array()) throw ConfigError(where(key) + " must be an array");
      out.clear();
      for (const auto& x : *v) {
        if (!x.is_number()) throw ConfigError(where(key) + " must hold numbers");
        out.push_back(x.get<double>());
      }
    }
  }
  const json* find(const char* key) const {
    if (!node_ || !node_->contains(key)) return nullptr;
    return &node_->at(key);
  }

 private:
  std::string where(const char* key) const { return name_ + "." + key; }

  std::string name_;
  const json* node_ = nullptr;
};

void check_one_of(const std::string& what, const std::string& value, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed) {
    if (value == a) return;
  }
  std::string list;
  for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
  throw ConfigError(what + " must be one of: " + list);
}

}  // namespace

void Config::validate() const {
  source.validate();
  if (!(network.tau_ps >= 1) || std::abs(network.tau_ps - std::round(network.tau_ps)) > 1e-9) {
    throw ConfigError("network.tau_ps must be a positive whole number");
  }
  source.check_timescales(network.tau_ps * 1e-12);
  if (network.multiport_n < 2 || network.multiport_n > 6) throw ConfigError("network.multiport_n must lie in [2, 6]");
  for (double t : {network.fbs_transmission, network.amzi_transmission}) {
    if (!(t > 0.0 && t < 1.0)) throw ConfigError("network transmissions must lie in (0, 1)");
  }
  if (!(montecarlo.duration_s > 0)) throw ConfigError("montecarlo.duration_s must be positive");
  if (montecarlo.phi_points < 5) throw ConfigError("montecarlo.phi_points must be >= 5");
  if (correlator.bin_ps == 0) throw ConfigError("correlator.bin_ps must be >= 1");
  if (correlator.max_lag_ps % correlator.bin_ps != 0) {
    throw ConfigError("correlator.max_lag_ps must be a multiple of correlator.bin_ps");
  }
  if (correlator.window_ps == 0) throw ConfigError("correlator.window_ps must be >= 1");
  check_one_of("analysis.background", analysis.background, {"coherent", "incoherent"});
  check_one_of("analysis.rate_model", analysis.rate_model, {"intensity", "click"});
  check_one_of("analysis.normalization", analysis.normalization, {"max", "baseline"});
  if (analysis.max_lag < 0 || analysis.fine_steps < 0) throw ConfigError("analysis.max_lag and fine_steps must be >= 0");
  if (analysis.phi_points < 5) throw ConfigError("analysis.phi_points must be >= 5");
  if (!(analysis.chsh_bins > 0)) throw ConfigError("analysis.chsh_bins must be positive");
  for (double b : analysis.betas) {
    if (!(b >= 0.0 && b < 1.0)) throw ConfigError("analysis.betas must lie in [0, 1)");
  }
  if (!(analysis.target_visibility >= 0.0 && analysis.target_visibility <= 1.0)) {
    throw ConfigError("analysis.target_visibility must lie in [0, 1]");
  }
  if (analysis.jobs < 1) throw ConfigError("analysis.jobs must be >= 1");
  model().validate();
  run_config(network.phi_a, network.phi_b).validate();
}

nlohmann::json Config::to_json() const {
  json j;
  j["source"] = source::to_json(source);
  j["network"] = {{"tau_ps", network.tau_ps},
                  {"phi_a", network.phi_a},
                  {"phi_b", network.phi_b},
                  {"fbs_transmission", network.fbs_transmission},
                  {"amzi_transmission", network.amzi_transmission},
                  {"multiport_n", network.multiport_n}};
  const auto& d = montecarlo.detector;
  j["montecarlo"] = {{"duration_s", montecarlo.duration_s},
                     {"seed", montecarlo.seed},
                     {"window", montecarlo.window},
                     {"n_max", montecarlo.n_max},
                     {"phi_points", montecarlo.phi_points},
                     {"detector",
                      {{"efficiency", d.efficiency},
                       {"jitter_ps", d.jitter_ps},
                       {"dark_rate_hz", d.dark_rate_hz},
                       {"dead_time_ps", d.dead_time_ps}}}};
  j["correlator"] = {
      {"bin_ps", correlator.bin_ps}, {"max_lag_ps", correlator.max_lag_ps}, {"window_ps", correlator.window_ps}};
  j["analysis"] = {{"background", analysis.background},
                   {"rate_model", analysis.rate_model},
                   {"normalization", analysis.normalization},
                   {"n_max", analysis.n_max},
                   {"max_lag", analysis.max_lag},
                   {"fine_steps", analysis.fine_steps},
                   {"phi_points", analysis.phi_points},
                   {"chsh_bins", analysis.chsh_bins},
                   {"betas", analysis.betas},
                   {"target_visibility", analysis.target_visibility},
                   {"jobs", analysis.jobs}};
  return j;
}

std::string Config::hash() const { return fnv1a_hex(to_json().dump()); }

source::BackgroundMode Config::background_mode() const {
  return analysis.background == "incoherent" ? source::BackgroundMode::kIncoherent : source::BackgroundMode::kCoherent;
}

analytics::ModelParams Config::model() const {
  analytics::ModelParams p;
  p.q = source.q;
  p.beta = source.beta;
  p.background = background_mode();
  p.rate = analysis.rate_model == "click" ? analytics::RateModel::kClick : analytics::RateModel::kIntensity;
  p.n_max = analysis.n_max;
  p.n_bins = std::max(p.n_bins, analysis.max_lag + 1);
  return p;
}

analytics::MapOptions Config::map_options() const {
  analytics::MapOptions o;
  o.max_lag = analysis.max_lag;
  o.fine_steps = analysis.fine_steps;
  o.tau = network.tau_ps * 1e-12;
  o.t1 = source.t1;
  o.normalization =
      analysis.normalization == "baseline" ? analytics::Normalization::kBaseline : analytics::Normalization::kMax;
  o.jobs = analysis.jobs;
  return o;
}

montecarlo::RunConfig Config::run_config(double phi_a, double phi_b) const {
  montecarlo::RunConfig r;
  r.duration = montecarlo.duration_s;
  r.tau = network.tau_ps * 1e-12;
  r.source = source;
  r.franson.phi_a = phi_a;
  r.franson.phi_b = phi_b;
  r.franson.fbs_transmission = network.fbs_transmission;
  r.franson.amzi_transmission = network.amzi_transmission;
  r.background = background_mode();
  const auto& d = montecarlo.detector;
  for (auto& det : r.detectors) {
    det.efficiency = d.efficiency;
    det.jitter = d.jitter_ps * 1e-12;
    det.dark_rate = d.dark_rate_hz;
    det.dead_time = d.dead_time_ps * 1e-12;
  }
  r.seed = montecarlo.seed;
  r.window = montecarlo.window;
  r.n_max = montecarlo.n_max;
  return r;
}

Config from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  static const std::set<std::string> sections = {"source", "network", "montecarlo", "correlator", "analysis"};
  for (const auto& [key, value] : j.items()) {
    if (!sections.count(key)) throw ConfigError("unknown section '" + key + "'");
  }
  Config c;
  if (j.contains("source")) c.source = source::source_params_from_json(j.at("source"));

  const Reader net(j, "network", {"tau_ps", "phi_a", "phi_b", "fbs_transmission", "amzi_transmission", "multiport_n"});
  net.number("tau_ps", c.network.tau_ps);
  net.number("phi_a", c.network.phi_a);
  net.number("phi_b", c.network.phi_b);
  net.number("fbs_transmission", c.network.fbs_transmission);
  net.number("amzi_transmission", c.network.amzi_transmission);
  net.integer("multiport_n", c.network.multiport_n);

  const Reader mc(j, "montecarlo", {"duration_s", "seed", "window", "n_max", "phi_points", "detector"});
  mc.number("duration_s", c.montecarlo.duration_s);
  mc.unsigned_integer("seed", c.montecarlo.seed);
  mc.integer("window", c.montecarlo.window);
  mc.integer("n_max", c.montecarlo.n_max);
  mc.integer("phi_points", c.montecarlo.phi_points);
  if (const json* det = mc.find("detector")) {
    const json wrapped = {{"montecarlo.detector", *det}};
    const Reader d(wrapped, "montecarlo.detector", {"efficiency", "jitter_ps", "dark_rate_hz", "dead_time_ps"});
    d.number("efficiency", c.montecarlo.detector.efficiency);
    d.number("jitter_ps", c.montecarlo.detector.jitter_ps);
    d.number("dark_rate_hz", c.montecarlo.detector.dark_rate_hz);
    d.number("dead_time_ps", c.montecarlo.detector.dead_time_ps);
  }

  const Reader cor(j, "correlator", {"bin_ps", "max_lag_ps", "window_ps"});
  cor.unsigned_integer("bin_ps", c.correlator.bin_ps);
  cor.unsigned_integer("max_lag_ps", c.correlator.max_lag_ps);
  cor.unsigned_integer("window_ps", c.correlator.window_ps);

  const Reader an(j, "analysis",
                  {"background", "rate_model", "normalization", "n_max", "max_lag", "fine_steps", "phi_points",
                   "chsh_bins", "betas", "target_visibility", "jobs"});
  an.string("background", c.analysis.background);
  an.string("rate_model", c.analysis.rate_model);
  an.string("normalization", c.analysis.normalization);
  an.integer("n_max", c.analysis.n_max);
  an.integer("max_lag", c.analysis.max_lag);
  an.integer("fine_steps", c.analysis.fine_steps);
  an.integer("phi_points", c.analysis.phi_points);
  an.number("chsh_bins", c.analysis.chsh_bins);
  an.numbers("betas", c.analysis.betas);
  an.number("target_visibility", c.analysis.target_visibility);
  an.integer("jobs", c.analysis.jobs);

  c.validate();
  return c;
}

void apply_override(nlohmann::json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override '" + std::string(assignment) + "' must have the form section.key=value");
  }
  const std::string path(assignment.substr(0, eq));
  const std::string text(assignment.substr(eq + 1));
  // Overrides may only touch keys the default document has.
  const json defaults = Config{}.to_json();
  const json* ref = &defaults;
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (!ref->is_object() || !ref->contains(key)) throw ConfigError("unknown key '" + path + "'");
    ref = &ref->at(key);
    if (dot == std::string::npos) {
      json value = json::parse(text, nullptr, false);
      if (value.is_discarded()) value = text;
      (*node)[key] = std::move(value);
      return;
    }
    if (!node->contains(key)) (*node)[key] = json::object();
    node = &(*node)[key];
    start = dot + 1;
  }
}

Config load(const std::optional<std::filesystem::path>& file, const std::vector<std::string>& overrides) {
  json doc = json::object();
  if (file) {
    std::ifstream is(*file);
    if (!is) throw ConfigError("cannot open config file " + file->string());
    doc = json::parse(is, nullptr, false);
    if (doc.is_discarded()) throw ConfigError("config file " + file->string() + " is not valid JSON");
  }
  for (const auto& o : overrides) apply_override(doc, o);
  return from_json(doc);
}

std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace franson::config
