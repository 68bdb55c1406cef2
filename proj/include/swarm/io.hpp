#pragma once

#include <string>

#include "swarm/sim.hpp"

namespace swarm::io {

/// Parses the scenario document. Schema (unknown keys rejected, SI units):
///   agents[]: {id, model: "bicycle"|"double_integrator", x0[], ref[],
///              comm_radius, sigma}
///   ocp: {N, weights{q_t[], r_t[], q_s[], r_s[], t_o[]} (optional), beta,
///         d_min, n_facets}
///   sim: {steps, seed}
sim::Scenario parse_scenario(const std::string& json_text);
sim::Scenario load_scenario(const std::string& path);
std::string scenario_to_json(const sim::Scenario& scenario);

/// One CSV row per agent per step: k, id, state..., input..., cluster, J_t,
/// J_s, J_s_bound, status, fallback; a trailing state-only row carries the
/// final states. Numbers print as shortest round-trip decimals, so equal runs
/// give byte-identical files.
std::string log_to_csv(const sim::SimLog& log, const sim::Scenario& scenario);

/// Full-fidelity JSON: agent metadata (footprints, safe-set polygons),
/// per-step records, plug events, warnings, optional safe predictions.
std::string log_to_json(const sim::SimLog& log, const sim::Scenario& scenario);
sim::SimLog log_from_json(const std::string& json_text, const sim::Scenario& scenario);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace swarm::io
