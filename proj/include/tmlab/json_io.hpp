#pragma once

#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "tmlab/closed_sets.hpp"
#include "tmlab/deflation.hpp"
#include "tmlab/sequences.hpp"
#include "tmlab/towers.hpp"

// JSON surfaces: set specifications, energy reports, sequence run specs and
// diagnostics, recovery reports. Unknown keys are rejected so that typos in
// configs fail loudly.

namespace tmlab {

namespace detail {

inline void require_keys(const nlohmann::json& j,
                         const std::vector<std::string>& allowed,
                         const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const auto& k : allowed)
      if (it.key() == k) ok = true;
    if (!ok)
      throw SpecError(where + ": unknown key \"" + it.key() + "\"");
  }
}

}  // namespace detail

inline nlohmann::json set_to_json(const SignedClosedSet& set) {
  nlohmann::json out;
  out["intervals"] = nlohmann::json::array();
  for (const auto& iv : set.intervals()) {
    out["intervals"].push_back(
        {{"t_lo", iv.t_lo}, {"t_hi", iv.t_hi}, {"sign", iv.sign}});
  }
  return out;
}

inline SignedClosedSet set_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SpecError("set spec: expected an object");
  if (j.contains("constructor")) {
    const std::string ctor = j.at("constructor").get<std::string>();
    if (ctor == "cantor") {
      detail::require_keys(j, {"constructor", "t_lo", "t_hi", "depth"},
                           "set spec (cantor)");
      return SignedClosedSet::cantor(j.at("t_lo").get<double>(),
                                     j.at("t_hi").get<double>(),
                                     j.at("depth").get<unsigned>());
    }
    if (ctor == "points") {
      detail::require_keys(j, {"constructor", "t", "sign"},
                           "set spec (points)");
      return SignedClosedSet::from_points(
          j.at("t").get<std::vector<double>>(),
          j.at("sign").get<std::vector<int>>());
    }
    throw SpecError("set spec: unknown constructor \"" + ctor + "\"");
  }
  detail::require_keys(j, {"intervals"}, "set spec");
  if (!j.contains("intervals"))
    throw SpecError("set spec: missing \"intervals\"");
  std::vector<SignedInterval> spans;
  for (const auto& e : j.at("intervals")) {
    detail::require_keys(e, {"t_lo", "t_hi", "sign"}, "set spec interval");
    spans.push_back({e.at("t_lo").get<double>(), e.at("t_hi").get<double>(),
                     e.at("sign").get<int>()});
  }
  return SignedClosedSet::from_intervals(spans);
}

inline nlohmann::json energy_report_json(const TowerProfile& tower,
                                         double quadrature_total) {
  const auto e = energy_closed_form(tower);
  nlohmann::json out;
  out["set_term"] = e.set_term;
  out["same_sign"] = e.same_sign_terms;
  out["sign_change"] = e.sign_change_terms;
  out["total"] = e.total;
  out["quadrature_total"] = quadrature_total;
  out["rel_err"] = std::abs(quadrature_total - e.total) / e.total;
  return out;
}

inline nlohmann::json diagnostics_json(const SequenceDiagnostics& d) {
  nlohmann::json out;
  out["target_level"] = d.target_level;
  out["stages"] = nlohmann::json::array();
  for (const auto& st : d.stages) {
    nlohmann::json row;
    row["s"] = st.s;
    row["J"] = st.J;
    row["ap_residual"] = st.ap_residual;
    row["nonlinear_mass"] = st.nonlinear_mass;
    row["dirichlet"] = st.dirichlet;
    row["grad_v_sq"] = st.grad_v_sq;
    row["orlicz_remainder"] = st.orlicz_remainder;
    row["mass_profile"] = nlohmann::json::array();
    for (const auto& [rho, frac] : st.mass_profile)
      row["mass_profile"].push_back({{"rho", rho}, {"frac", frac}});
    if (st.epsilon > 0.0) {
      row["epsilon"] = st.epsilon;
      row["kappa"] = st.kappa;
    }
    out["stages"].push_back(std::move(row));
  }
  return out;
}

struct RunSpec {
  SignedClosedSet set;
  std::string nonlinearity;  // empty = caller default
  std::vector<double> scales;
  std::vector<double> rho_probes;
  std::vector<double> epsilon_schedule;
};

inline RunSpec run_spec_from_json(const nlohmann::json& j) {
  detail::require_keys(
      j, {"set", "nonlinearity", "scales", "rho_probes", "epsilon_schedule"},
      "run spec");
  if (!j.contains("set")) throw SpecError("run spec: missing \"set\"");
  if (!j.contains("scales")) throw SpecError("run spec: missing \"scales\"");
  RunSpec spec{set_from_json(j.at("set")), {}, {}, {}, {}};
  spec.scales = j.at("scales").get<std::vector<double>>();
  if (j.contains("nonlinearity"))
    spec.nonlinearity = j.at("nonlinearity").get<std::string>();
  if (j.contains("rho_probes"))
    spec.rho_probes = j.at("rho_probes").get<std::vector<double>>();
  if (j.contains("epsilon_schedule"))
    spec.epsilon_schedule = j.at("epsilon_schedule").get<std::vector<double>>();
  return spec;
}

inline nlohmann::json recovery_json(const DeflationRecovery& rec,
                                    const std::string& profile_csv_path) {
  nlohmann::json out;
  out["s_hat"] = rec.s_hat;
  out["residual"] = rec.residual;
  out["fit_residual"] = rec.fit_residual;
  out["profile_csv"] = profile_csv_path;
  out["set"] = set_to_json(rec.set);
  return out;
}

// write-temp-then-rename so partial output never lands under the final name
inline void write_text_atomic(const std::string& path,
                              const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::trunc);
    if (!os) throw SpecError("cannot open for writing: " + tmp);
    os << content;
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw SpecError("cannot rename " + tmp + " to " + path);
}

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw SpecError("cannot open " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const std::exception& e) {
    throw SpecError(std::string("malformed JSON in ") + path + ": " + e.what());
  }
  return j;
}

}  // namespace tmlab
