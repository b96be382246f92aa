#pragma once

#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "popdyn/dynamics.hpp"
#include "popdyn/games.hpp"
#include "popdyn/rules.hpp"

namespace popdyn {

struct AuditConfig {
  bool enabled = true;
  bool contractive_game = false;
};

/// One batch of closed-loop runs: a game, a set of rules, a set of initial
/// conditions, integrator settings, and output options.
struct RunConfig {
  std::shared_ptr<Game> game;
  std::string game_id;
  nlohmann::json game_json;  // retained for round-tripping
  std::vector<std::pair<std::string, LearningRule>> rules;
  std::vector<Vector> initial_conditions;
  IntegratorConfig integrator;
  AuditConfig audit;
  std::string output_dir = "out";
  std::uint64_t seed = 1;
  int field_resolution = 10;  // 0 disables the payoff-field export

  static RunConfig from_json(const nlohmann::json& doc);
  static RunConfig from_file(const std::string& path);
  nlohmann::json to_json() const;
};

LearningRule rule_from_json(const nlohmann::json& doc);
nlohmann::json rule_to_json(const LearningRule& rule);

std::shared_ptr<Game> game_from_json(const nlohmann::json& doc);

struct RunManifest {
  std::string config_hash;
  std::string tool_version;
  std::vector<std::string> files;
  double wall_seconds = 0.0;
};

nlohmann::json manifest_to_json(const RunManifest& manifest);

/// The bundled three-road congestion setup: BR, Smith, BNN and the equal
/// thirds hybrid, started from the simplex vertices and the barycenter.
nlohmann::json bundled_congestion_config();

}  // namespace popdyn
