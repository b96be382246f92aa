// popdyn command-line front end: run closed-loop simulations with audits,
// run verification batteries, locate Nash equilibria, export payoff fields.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "popdyn/certificates.hpp"
#include "popdyn/config.hpp"
#include "popdyn/dynamics.hpp"
#include "popdyn/games.hpp"
#include "popdyn/io.hpp"
#include "popdyn/passivity.hpp"
#include "popdyn/rng.hpp"

namespace fs = std::filesystem;
using namespace popdyn;

namespace {

constexpr const char* kVersion = "0.1.0";

// Exit codes: 0 success, 1 validation error, 2 verification failure,
// 3 runtime error.
enum ExitCode { kOk = 0, kValidation = 1, kVerification = 2, kRuntime = 3 };

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

fs::path output_root(const RunConfig& cfg) {
  if (const char* env = std::getenv("POPDYN_OUTPUT_ROOT")) {
    return fs::path(env) / cfg.output_dir;
  }
  return fs::path(cfg.output_dir);
}

RunConfig load_config(const std::string& path) {
  if (path == "bundled") return RunConfig::from_json(bundled_congestion_config());
  return RunConfig::from_file(path);
}

int cmd_run(const std::string& config_path) {
  const auto t_start = std::chrono::steady_clock::now();
  RunConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kValidation;
  }

  const fs::path root = output_root(cfg);
  fs::create_directories(root);

  RunManifest manifest;
  manifest.tool_version = kVersion;
  manifest.config_hash = fnv1a_hex(cfg.to_json().dump());

  auto record = [&](const fs::path& p) {
    manifest.files.push_back(p.string());
  };

  if (cfg.field_resolution > 0) {
    const auto grid = simplex_grid(cfg.game->dim(), cfg.field_resolution);
    const auto field = payoff_projection_field(*cfg.game, grid);
    const fs::path path = root / "field.csv";
    write_field_csv(path.string(), field);
    record(path);
  }

  nlohmann::json summary = nlohmann::json::array();
  for (const auto& [rule_name, rule] : cfg.rules) {
    for (std::size_t ic = 0; ic < cfg.initial_conditions.size(); ++ic) {
      const std::string tag = rule_name + "_ic" + std::to_string(ic);
      try {
        Trajectory traj = simulate(*cfg.game, rule,
                                   SimplexState{cfg.initial_conditions[ic]},
                                   cfg.integrator);
        traj.game_id = cfg.game_id;
        traj.seed = cfg.seed;
        const fs::path csv = root / (tag + ".csv");
        write_trajectory_csv(csv.string(), traj);
        record(csv);

        nlohmann::json entry{{"rule", rule_name}, {"initial_condition", ic}};
        if (const auto tc = convergence_time(traj)) entry["t_conv"] = *tc;

        if (cfg.audit.enabled && rule.kind != LearningRule::Kind::Logit) {
          AuditOptions opts;
          opts.contractive_game = cfg.audit.contractive_game;
          const PassivityAudit audit =
              audit_trajectory(traj, StorageSpec::for_rule(rule), opts);
          const fs::path report = root / (tag + "_audit.json");
          write_json(report.string(), audit_to_json(audit));
          record(report);
          entry["audit_verdict"] = audit.pass ? "pass" : "fail";
        }
        summary.push_back(entry);
      } catch (const std::exception& e) {
        // A blown-up integration aborts this run only.
        std::cerr << "run " << tag << " failed: " << e.what() << "\n";
        summary.push_back({{"rule", rule_name},
                           {"initial_condition", ic},
                           {"error", e.what()}});
      }
    }
  }

  const fs::path summary_path = root / "summary.json";
  write_json(summary_path.string(), summary);
  record(summary_path);

  manifest.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  write_json((root / "manifest.json").string(), manifest_to_json(manifest));
  std::cout << "wrote " << manifest.files.size() + 1 << " files under " << root
            << "\n";
  return kOk;
}

int cmd_nash(const std::string& config_path) {
  RunConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kValidation;
  }
  const NashSet set = nash_oracle(*cfg.game);
  const fs::path root = output_root(cfg);
  fs::create_directories(root);
  write_json((root / "nash.json").string(), nash_to_json(set));
  std::cout << nash_to_json(set).dump(2) << "\n";
  return kOk;
}

int cmd_field(const std::string& config_path) {
  RunConfig cfg;
  try {
    cfg = load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kValidation;
  }
  const int res = cfg.field_resolution > 0 ? cfg.field_resolution : 10;
  const auto grid = simplex_grid(cfg.game->dim(), res);
  const auto field = payoff_projection_field(*cfg.game, grid);
  const fs::path root = output_root(cfg);
  fs::create_directories(root);
  const fs::path path = root / "field.csv";
  write_field_csv(path.string(), field);
  std::cout << "wrote " << path << " (" << field.size() << " points)\n";
  return kOk;
}

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

void check_passivity(std::vector<CheckResult>& out) {
  const std::vector<std::pair<std::string, LearningRule>> families = {
      {"br", LearningRule::best_response()},
      {"smith", LearningRule::smith(1.0)},
      {"bnn", LearningRule::bnn(1.0)},
      {"hybrid",
       LearningRule::hybrid(1.0 / 3, 1.0 / 3, 1.0 / 3, LearningRule::bnn(1.0),
                            LearningRule::smith(1.0))},
  };

  for (const auto& [name, rule] : families) {
    const PcReport pc = pc_check(rule, 10000, 1);
    std::ostringstream detail;
    detail << "min p'V = " << pc.min_correlation << ", violations "
           << pc.violations << "/" << pc.samples;
    out.push_back({"pc/" + name, pc.pass, detail.str()});
  }

  for (const auto& [name, rule] : families) {
    if (rule.kind == LearningRule::Kind::BestResponse) continue;
    const double worst =
        gradient_cone_check(StorageSpec::for_rule(rule), 10000, 1);
    std::ostringstream detail;
    detail << "worst (dS/dx).V_BR = " << worst;
    out.push_back({"gradcone/" + name, worst <= 1e-10, detail.str()});
  }

  for (const auto& [name, rule] : families) {
    const EquivalenceScanReport scan =
        equivalence_scan(StorageSpec::for_rule(rule), 30, 20, 1e-8, 1);
    std::ostringstream detail;
    detail << scan.mismatches << " mismatches over " << scan.points_checked
           << " points";
    out.push_back({"equivalence/" + name, scan.pass, detail.str()});
  }
}

void check_appendix(std::vector<CheckResult>& out) {
  Rng rng(7);
  long h_bad = 0, j_bad = 0, mm_bad = 0, lp_bad = 0;
  double j_worst = 0.0;
  const LearningRule bnn = LearningRule::bnn(1.0);
  for (int k = 0; k < 2000; ++k) {
    const int n = 2 + static_cast<int>(k % 5);
    const SimplexState x{random_simplex_point(rng, n)};
    const PayoffVector p{random_payoff(rng, n)};

    // h is nonincreasing along the ascending payoff order.
    const auto ctx = order_payoffs(x, p);
    const Vector h = h_vector(p);
    for (int j = 0; j + 1 < n; ++j) {
      if (h(ctx.permutation[j]) < h(ctx.permutation[j + 1]) - 1e-12) ++h_bad;
    }

    const double j_val = j_value(x, p, bnn);
    j_worst = std::max(j_worst, j_val);
    if (j_val > 1e-10) ++j_bad;

    const MinMaxCheck mm = minmax_check(x, p);
    if (!mm.vacuous && !mm.holds) ++mm_bad;

    const LPCertificate lp = lp_certificate(x, p);
    if (!lp.verified) ++lp_bad;
  }
  out.push_back({"appendix/h-sorted", h_bad == 0,
                 std::to_string(h_bad) + " order violations"});
  out.push_back(
      {"appendix/J<=0", j_bad == 0, std::to_string(j_bad) + " positives"});
  out.push_back(
      {"appendix/minmax", mm_bad == 0, std::to_string(mm_bad) + " failures"});
  out.push_back({"appendix/lp-kkt", lp_bad == 0,
                 std::to_string(lp_bad) + " unverified certificates"});
}

void check_contractivity(std::vector<CheckResult>& out) {
  const auto game = AffineCongestionGame::standard();
  const ContractivityReport report = contractivity_check(game, 100);
  std::ostringstream detail;
  detail << "contractive: " << (report.contractive ? "yes" : "no")
         << ", slope condition 4r' >= g1' satisfied ("
         << 4.0 * game.r_slope() << " >= " << game.g1_slope()
         << "), max eigenvalue " << report.max_eigenvalue;
  out.push_back({"contractivity/congestion",
                 report.contractive && report.uniform_slope_condition_holds,
                 detail.str()});
}

int cmd_verify(const std::string& suite) {
  std::vector<CheckResult> results;
  if (suite == "passivity" || suite == "all") check_passivity(results);
  if (suite == "appendix" || suite == "all") check_appendix(results);
  if (suite == "contractivity" || suite == "all") check_contractivity(results);
  if (results.empty()) {
    std::cerr << "unknown suite: " << suite
              << " (expected passivity|appendix|contractivity|all)\n";
    return kValidation;
  }

  std::size_t width = 0;
  for (const auto& r : results) width = std::max(width, r.name.size());
  for (const auto& r : results) {
    std::cout << r.name << std::string(width - r.name.size() + 2, ' ')
              << (r.pass ? "pass" : "FAIL") << "  " << r.detail << "\n";
  }
  int failures = 0;
  for (const auto& r : results) {
    if (!r.pass && ++failures <= 10)
      std::cerr << "failure: " << r.name << ": " << r.detail << "\n";
  }
  std::cout << (failures == 0 ? "all checks passed"
                              : std::to_string(failures) + " checks failed")
            << "\n";
  return failures == 0 ? kOk : kVerification;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"popdyn: population-game dynamics simulator and verifier"};
  app.require_subcommand(1);

  std::string config_path, suite;
  auto* run = app.add_subcommand("run", "simulate a config with audits");
  run->add_option("config", config_path,
                  "config file path, or 'bundled' for the built-in setup")
      ->required();
  auto* verify = app.add_subcommand("verify", "run a verification battery");
  verify->add_option("suite", suite, "passivity|appendix|contractivity|all")
      ->required();
  auto* nash = app.add_subcommand("nash", "locate Nash equilibria of a game");
  nash->add_option("config", config_path, "config file path or 'bundled'")
      ->required();
  auto* field = app.add_subcommand("field", "export the projected payoff field");
  field->add_option("config", config_path, "config file path or 'bundled'")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kValidation;
  }

  try {
    if (run->parsed()) return cmd_run(config_path);
    if (verify->parsed()) return cmd_verify(suite);
    if (nash->parsed()) return cmd_nash(config_path);
    if (field->parsed()) return cmd_field(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kValidation;
}
