#include "popdyn/io.hpp"

#include <cstdio>
#include <fstream>

#include <json.hpp>

namespace popdyn {

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // binary keeps LF endings
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

}  // namespace

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  auto out = open_out(path);
  const int n = traj.dim();
  out << "t";
  for (int i = 1; i <= n; ++i) out << ",x" << i;
  for (int i = 1; i <= n; ++i) out << ",p" << i;
  for (int i = 1; i <= n; ++i) out << ",V" << i;
  out << "\n";
  for (const auto& s : traj.samples) {
    out << format_double(s.t);
    for (int i = 0; i < n; ++i) out << "," << format_double(s.x(i));
    for (int i = 0; i < n; ++i) out << "," << format_double(s.p(i));
    for (int i = 0; i < n; ++i) out << "," << format_double(s.v(i));
    out << "\n";
  }
}

void write_field_csv(const std::string& path,
                     const std::vector<std::pair<Vector, Vector>>& field) {
  auto out = open_out(path);
  if (field.empty()) return;
  const int n = static_cast<int>(field.front().first.size());
  for (int i = 1; i <= n; ++i) out << (i == 1 ? "" : ",") << "x" << i;
  for (int i = 1; i <= n; ++i) out << ",f" << i;
  out << "\n";
  for (const auto& [x, f] : field) {
    for (int i = 0; i < n; ++i) out << (i == 0 ? "" : ",") << format_double(x(i));
    for (int i = 0; i < n; ++i) out << "," << format_double(f(i));
    out << "\n";
  }
}

nlohmann::json audit_to_json(const PassivityAudit& audit) {
  return nlohmann::json{
      {"rule", audit.rule_id},
      {"storage_spec", audit.rule_id},
      {"n_samples", audit.n_samples},
      {"violations", audit.violations},
      {"worst_margin", audit.worst_margin},
      {"contractive_violations", audit.contractive_violations},
      {"monotonicity_violations", audit.monotonicity_violations},
      {"final_storage", audit.final_storage},
      {"verdict", audit.pass ? "pass" : "fail"},
      {"theorem_coverage", audit.theorem_coverage},
  };
}

nlohmann::json nash_to_json(const NashSet& set) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& pt : set.equilibria) {
    points.push_back({
        {"x", std::vector<double>(pt.x.x.data(), pt.x.x.data() + pt.x.x.size())},
        {"gap", pt.gap},
    });
  }
  return nlohmann::json{{"tol", set.tol}, {"equilibria", points}};
}

nlohmann::json contractivity_to_json(const ContractivityReport& report) {
  return nlohmann::json{
      {"resolution", report.resolution},
      {"max_eigenvalue", report.max_eigenvalue},
      {"slope_condition_holds", report.slope_condition_holds},
      {"uniform_slope_condition_holds", report.uniform_slope_condition_holds},
      {"contractive", report.contractive},
  };
}

void write_json(const std::string& path, const nlohmann::json& doc) {
  auto out = open_out(path);
  out << doc.dump(2) << "\n";
}

}  // namespace popdyn
