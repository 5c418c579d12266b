#include "franson/chsh.hpp"

#include <cmath>
#include <stdexcept>

namespace franson::chsh {
namespace {

constexpr std::array<double, 4> kSigns = {1.0, -1.0, 1.0, 1.0};

}  // namespace

std::pair<double, double> Settings::pair(int k) const {
  switch (k) {
    case 0: return {a, b};
    case 1: return {a, b_prime};
    case 2: return {a_prime, b};
    case 3: return {a_prime, b_prime};
    default: throw std::out_of_range("CHSH setting index must be 0..3");
  }
}

Result chsh(const Counts& counts) {
  Result r;
  r.settings = counts.settings;
  r.counts = counts;
  double signed_sum = 0.0;
  double var = 0.0;
  for (int k = 0; k < 4; ++k) {
    const PairCounts& c = counts.per_setting[static_cast<std::size_t>(k)];
    if (c.n11 < 0 || c.n12 < 0 || c.n21 < 0 || c.n22 < 0) throw std::invalid_argument("CHSH counts must be >= 0");
    const double d = c.total();
    if (!(d > 0)) throw std::invalid_argument("CHSH setting " + std::to_string(k) + " has no coincidences");
    const double e = (c.n11 + c.n22 - c.n12 - c.n21) / d;
    // dE/dN_i = (s_i - E) / D, Var(N_i) = N_i.
    const double v = (std::pow(1 - e, 2) * (c.n11 + c.n22) + std::pow(-1 - e, 2) * (c.n12 + c.n21)) / (d * d);
    auto [pa, pb] = counts.settings.pair(k);
    r.correlations[static_cast<std::size_t>(k)] = {pa, pb, e, v};
    signed_sum += kSigns[static_cast<std::size_t>(k)] * e;
    var += v;
  }
  r.s = std::abs(signed_sum);
  r.sigma_s = std::sqrt(var);
  return r;
}

double s_for_visibility(const Settings& settings, double visibility) {
  double sum = 0.0;
  for (int k = 0; k < 4; ++k) {
    auto [pa, pb] = settings.pair(k);
    sum += kSigns[static_cast<std::size_t>(k)] * visibility * std::cos(pa - pb);
  }
  return std::abs(sum);
}

Counts fringe_counts(const Settings& settings, double visibility, double scale) {
  Counts c;
  c.settings = settings;
  for (int k = 0; k < 4; ++k) {
    auto [pa, pb] = settings.pair(k);
    const double same = scale * (1 + visibility * std::cos(pa - pb));
    const double diff = scale * (1 - visibility * std::cos(pa - pb));
    c.per_setting[static_cast<std::size_t>(k)] = {same, diff, diff, same};
  }
  return c;
}

nlohmann::json to_json(const Counts& counts) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& c : counts.per_setting) rows.push_back({c.n11, c.n12, c.n21, c.n22});
  const auto& s = counts.settings;
  return {{"settings", {{"a", s.a}, {"a_prime", s.a_prime}, {"b", s.b}, {"b_prime", s.b_prime}}}, {"counts", rows}};
}

Counts counts_from_json(const nlohmann::json& j) {
  Counts c;
  if (j.contains("settings")) {
    const auto& s = j.at("settings");
    c.settings.a = s.at("a").get<double>();
    c.settings.a_prime = s.at("a_prime").get<double>();
    c.settings.b = s.at("b").get<double>();
    c.settings.b_prime = s.at("b_prime").get<double>();
  }
  const auto& rows = j.at("counts");
  if (!rows.is_array() || rows.size() != 4) throw std::invalid_argument("CHSH counts need four settings");
  for (std::size_t k = 0; k < 4; ++k) {
    const auto& row = rows[k];
    if (!row.is_array() || row.size() != 4) throw std::invalid_argument("each CHSH setting needs four counts");
    c.per_setting[k] = {row[0].get<double>(), row[1].get<double>(), row[2].get<double>(), row[3].get<double>()};
  }
  return c;
}

nlohmann::json Result::to_json() const {
  nlohmann::json es = nlohmann::json::array();
  for (const auto& c : correlations) {
    es.push_back({{"phi_a", c.phi_a}, {"phi_b", c.phi_b}, {"E", c.e}, {"sigma_E", std::sqrt(c.variance)}});
  }
  auto j = chsh::to_json(counts);
  j["S"] = s;
  j["sigma_S"] = sigma_s;
  j["E"] = es;
  return j;
}

}  // namespace franson::chsh
