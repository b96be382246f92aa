#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "popdyn/dynamics.hpp"
#include "popdyn/games.hpp"
#include "popdyn/passivity.hpp"

namespace popdyn {

/// Shortest round-trippable decimal (17 significant digits).
std::string format_double(double value);

/// CSV with header t,x1..xn,p1..pn,V1..Vn, LF line endings, one row per
/// sample in time order.
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

/// CSV with header x1..xn,f1..fn for a projected payoff field.
void write_field_csv(const std::string& path,
                     const std::vector<std::pair<Vector, Vector>>& field);

nlohmann::json audit_to_json(const PassivityAudit& audit);
nlohmann::json nash_to_json(const NashSet& set);
nlohmann::json contractivity_to_json(const ContractivityReport& report);

void write_json(const std::string& path, const nlohmann::json& doc);

}  // namespace popdyn
