#pragma once

#include <iosfwd>
#include <string>

#include "ratm/model.hpp"

namespace ratm {

/**
 * JSON model format:
 *   { "num_states": N, "num_actions": A, "discount": g, "measure_cost": c,
 *     "initial_state": s, "terminals": [..],
 *     "rows": [{"s":..,"a":..,"entries":[{"sp":..,"lo":..,"hi":..},..]},..],
 *     "rewards": [{"s":..,"a":..,"r":..},..] }
 * Probabilities are written with 17 significant digits, so a write/read
 * round trip reproduces the model exactly.
 */
void write_model(std::ostream& out, const ram_mdp& m);
void write_model_file(const std::string& path, const ram_mdp& m);

ram_mdp read_model(std::istream& in);
ram_mdp read_model_file(const std::string& path);

} // namespace ratm
