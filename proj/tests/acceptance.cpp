// End-to-end acceptance suite. Each numbered check prints exactly one
// pass/fail line; the process exits nonzero if any check fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "popdyn/certificates.hpp"
#include "popdyn/config.hpp"
#include "popdyn/dynamics.hpp"
#include "popdyn/games.hpp"
#include "popdyn/io.hpp"
#include "popdyn/passivity.hpp"
#include "popdyn/rng.hpp"

namespace fs = std::filesystem;
using namespace popdyn;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int index, const std::string& name, bool pass,
            const std::string& detail) {
  std::printf("[%2d/10] %-38s %s  (%s)\n", index, name.c_str(),
              pass ? "pass" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

Vector vec3(double a, double b, double c) {
  Vector v(3);
  v << a, b, c;
  return v;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<std::pair<std::string, LearningRule>> benchmark_rules() {
  return {
      {"br", LearningRule::best_response()},
      {"smith", LearningRule::smith(1.0)},
      {"bnn", LearningRule::bnn(1.0)},
      {"hybrid",
       LearningRule::hybrid(1.0 / 3, 1.0 / 3, 1.0 / 3, LearningRule::bnn(1.0),
                            LearningRule::smith(1.0))},
  };
}

std::vector<Vector> benchmark_ics() {
  return {vec3(1, 0, 0), vec3(0, 1, 0), vec3(0, 0, 1),
          vec3(1.0 / 3, 1.0 / 3, 1.0 / 3)};
}

struct BenchmarkRun {
  std::string rule_name;
  LearningRule rule;
  Trajectory traj;
};

// ---------------------------------------------------------------------------
// 1. Congestion benchmark: four rule families from four starts all converge
//    to the oracle equilibrium within budgeted time.
std::vector<BenchmarkRun> check_congestion_benchmark() {
  const auto t0 = Clock::now();
  const auto game = AffineCongestionGame::standard();
  const NashSet nash = nash_oracle(game);
  std::vector<BenchmarkRun> runs;
  bool pass = !nash.equilibria.empty();
  double worst_dist = 0.0, worst_tconv = 0.0;
  if (pass) {
    const Vector ne = nash.equilibria.front().x.x;
    IntegratorConfig cfg;  // rk4, h = 1e-3, T = 10
    for (const auto& [name, rule] : benchmark_rules()) {
      for (const Vector& x0 : benchmark_ics()) {
        BenchmarkRun run{name, rule,
                         simulate(game, rule, SimplexState{x0}, cfg)};
        const auto tc = convergence_time(run.traj);
        const double dist = (run.traj.samples.back().x - ne).lpNorm<1>();
        worst_dist = std::max(worst_dist, dist);
        if (!tc || *tc >= cfg.horizon) pass = false;
        if (tc) worst_tconv = std::max(worst_tconv, *tc);
        if (dist >= 1e-2) pass = false;
        runs.push_back(std::move(run));
      }
    }
  }
  const double elapsed = seconds_since(t0);
  if (elapsed >= 30.0) pass = false;
  std::ostringstream detail;
  detail << "16 runs, worst NE distance " << worst_dist << ", worst t_conv "
         << worst_tconv << ", " << elapsed << " s";
  report(1, "congestion benchmark convergence", pass, detail.str());
  return runs;
}

// 2. Contractivity certificate for the benchmark game.
void check_contractivity() {
  const auto t0 = Clock::now();
  const ContractivityReport rep =
      contractivity_check(AffineCongestionGame::standard(), 100);
  const double elapsed = seconds_since(t0);
  const bool pass = rep.contractive && rep.max_eigenvalue <= 1e-10 &&
                    rep.uniform_slope_condition_holds && elapsed < 1.0;
  std::ostringstream detail;
  detail << "max eigenvalue " << rep.max_eigenvalue << " on 100-grid, "
         << elapsed << " s";
  report(2, "contractivity certificate", pass, detail.str());
}

// 3. Dissipation audits along every benchmark run: the storage inequality
//    holds at >= 99% of samples, storage is nonincreasing, and it drains.
void check_benchmark_audits(const std::vector<BenchmarkRun>& runs) {
  bool pass = !runs.empty();
  long total_viol = 0;
  double worst_final = 0.0;
  for (const auto& run : runs) {
    AuditOptions opts;
    opts.contractive_game = true;
    const PassivityAudit audit =
        audit_trajectory(run.traj, StorageSpec::for_rule(run.rule), opts);
    total_viol += audit.violations;
    worst_final = std::max(worst_final, audit.final_storage);
    if (!audit.pass) pass = false;
    if (audit.violations * 100 > audit.n_samples) pass = false;
    if (audit.monotonicity_violations != 0) pass = false;
    if (audit.final_storage >= 1e-3) pass = false;
  }
  std::ostringstream detail;
  detail << total_viol << " flagged samples across 16 audits, worst final "
         << "storage " << worst_final;
  report(3, "trajectory dissipation audits", pass, detail.str());
}

// 4. Hybrid-cone sweeps: random weight vectors inside each proved cone keep
//    the audits green, on the benchmark game and on random two-strategy
//    contractive games.
void check_cone_sweeps() {
  const auto t0 = Clock::now();
  const auto game = AffineCongestionGame::standard();
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  bool pass = true;
  long audits = 0, failed = 0;

  std::vector<Vector> ics = benchmark_ics();
  ics.push_back(vec3(0.2, 0.5, 0.3));

  const auto run_audit = [&](const Game& g, const LearningRule& rule,
                             const Vector& x0) {
    IntegratorConfig cfg;
    const Trajectory traj = simulate(g, rule, SimplexState{x0}, cfg);
    const PassivityAudit audit =
        audit_trajectory(traj, StorageSpec::for_rule(rule));
    ++audits;
    if (!audit.pass) {
      ++failed;
      pass = false;
    }
  };

  // Cone 1: best-response + pairwise-comparison parts; power shapes with
  // exponents 1..4, gains scaled so the rate at a 60-point payoff gap stays
  // at the linear rule's magnitude.
  for (int k = 0; k < 20; ++k) {
    const double expo = 1.0 + k % 4;
    const double gain = 60.0 * std::pow(60.0, -expo);
    const LearningRule ipc =
        LearningRule::ipc({RateShapeFunction::power(gain, expo)});
    const LearningRule rule = LearningRule::hybrid(
        unit(rng), 0.0, unit(rng), LearningRule::bnn(1.0), ipc);
    for (const Vector& x0 : ics) run_audit(game, rule, x0);
  }

  // Cone 2: best-response + excess-payoff + linear pairwise-comparison.
  for (int k = 0; k < 20; ++k) {
    const LearningRule rule =
        LearningRule::hybrid(unit(rng), unit(rng), unit(rng),
                             LearningRule::bnn(1.0), LearningRule::smith(1.0));
    for (const Vector& x0 : ics) run_audit(game, rule, x0);
  }

  // Cone 3: general three-part hybrids on random contractive affine
  // two-strategy games (the two-strategy case admits arbitrary shapes).
  std::uniform_real_distribution<double> entry(-2.0, 2.0);
  std::vector<AffineGame> games2;
  while (games2.size() < 5) {
    Matrix A(2, 2);
    A << entry(rng), entry(rng), entry(rng), entry(rng);
    // Force the tangent quadratic form w'(A + A')w, w = (1, -1), negative.
    const double q = A(0, 0) + A(1, 1) - A(0, 1) - A(1, 0);
    if (q > -0.1) A(0, 0) -= q + 0.5;
    Vector b(2);
    b << entry(rng), entry(rng);
    const AffineGame candidate(A, b);
    if (contractivity_check(candidate, 20).contractive)
      games2.push_back(candidate);
  }
  for (int k = 0; k < 20; ++k) {
    const double expo = 1.0 + k % 2;
    const LearningRule ipc =
        LearningRule::ipc({RateShapeFunction::power(1.0, expo)});
    const LearningRule rule = LearningRule::hybrid(
        unit(rng), unit(rng), unit(rng), LearningRule::bnn(1.0), ipc);
    Vector x0(2);
    x0 << 0.9, 0.1;
    for (const auto& g : games2) run_audit(g, rule, x0);
  }

  const double elapsed = seconds_since(t0);
  if (elapsed >= 300.0) pass = false;
  std::ostringstream detail;
  detail << audits << " audits, " << failed << " failed, " << elapsed << " s";
  report(4, "hybrid-cone weight sweeps", pass, detail.str());
}

// 5. Pointwise batteries over 1e5 random (x, p) samples each.
void check_pointwise_batteries() {
  const auto t0 = Clock::now();
  bool pass = true;
  std::ostringstream detail;

  // Positive correlation for every family.
  double pc_worst = 0.0;
  for (const auto& [name, rule] : benchmark_rules()) {
    const PcReport rep = pc_check(rule, 100000, 1);
    pc_worst = std::min(pc_worst, rep.min_correlation);
    if (!rep.pass || rep.min_correlation < -1e-10) pass = false;
  }

  // Storage gradients point against the best-response flow.
  const double worst_smith = gradient_cone_check(
      StorageSpec::for_rule(LearningRule::smith(1.0)), 100000, 2);
  const double worst_bnn = gradient_cone_check(
      StorageSpec::for_rule(LearningRule::bnn(1.0)), 100000, 3);
  if (worst_smith > 1e-10 || worst_bnn > 1e-10) pass = false;

  // The excess-payoff storage gradient equals -(total switch rate) * p.
  Rng rng(5);
  const StorageSpec bnn_spec = StorageSpec::for_rule(LearningRule::bnn(1.0));
  double identity_worst = 0.0;
  for (int k = 0; k < 100000; ++k) {
    const int n = 2 + k % 4;
    const SimplexState x{random_simplex_point(rng, n)};
    const Vector p = random_payoff(rng, n);
    const Vector p_hat = excess_payoff(x, PayoffVector{p}).p_hat;
    const double rate = p_hat.cwiseMax(0.0).sum();
    const Vector expected = -rate * p;
    const double resid =
        (grad_x_storage(bnn_spec, x, PayoffVector{p}) - expected)
            .lpNorm<Eigen::Infinity>();
    identity_worst = std::max(identity_worst, resid);
  }
  if (identity_worst >= 1e-9) pass = false;

  // Quadratic-comparison directional derivative stays nonpositive; the
  // quotient inequality holds; two-strategy cross terms stay nonpositive.
  Rng rng2(7);
  double j_worst = 0.0;
  long mm_bad = 0;
  const LearningRule bnn = LearningRule::bnn(1.0);
  for (int k = 0; k < 100000; ++k) {
    const int n = 2 + k % 5;
    const SimplexState x{random_simplex_point(rng2, n)};
    const PayoffVector p{random_payoff(rng2, n)};
    j_worst = std::max(j_worst, j_value(x, p, bnn));
    if (!minmax_check(x, p).holds) ++mm_bad;
  }
  if (j_worst > 1e-10 || mm_bad != 0) pass = false;

  const CrossTermReport cross = cross_term_check(
      LearningRule::smith(1.0), LearningRule::bnn(1.0), 100000, 2, 11);
  if (!cross.pass || cross.worst > 1e-10) pass = false;

  const double elapsed = seconds_since(t0);
  if (elapsed >= 120.0) pass = false;
  detail << "pc min " << pc_worst << ", grad-cone max "
         << std::max(worst_smith, worst_bnn) << ", identity resid "
         << identity_worst << ", J max " << j_worst << ", cross max "
         << cross.worst << ", " << elapsed << " s";
  report(5, "pointwise certificate batteries", pass, detail.str());
}

// 6. Zero storage <=> zero dissipation <=> best-response optimality.
void check_equivalence() {
  bool pass = true;
  long mismatches = 0;
  for (const auto& [name, rule] : benchmark_rules()) {
    const EquivalenceScanReport rep =
        equivalence_scan(StorageSpec::for_rule(rule), 50, 100, 1e-8, 1);
    mismatches += rep.mismatches;
    if (!rep.pass) pass = false;
  }
  report(6, "storage/dissipation equivalence scan", pass,
         std::to_string(mismatches) + " mismatches across 4 families");
}

// 7. Analytic storage gradients vs central finite differences.
void check_gradients() {
  Rng rng(23);
  const std::vector<StorageSpec> specs = {
      StorageSpec::for_rule(LearningRule::best_response()),
      StorageSpec::for_rule(LearningRule::smith(1.0)),
      StorageSpec::for_rule(LearningRule::bnn(1.0)),
      StorageSpec::for_rule(
          LearningRule::ipc({RateShapeFunction::power(1.0, 2.0)})),
      StorageSpec::for_rule(LearningRule::hybrid(
          0.4, 0.3, 0.3, LearningRule::bnn(1.0), LearningRule::smith(1.0))),
  };
  bool pass = true;
  double worst_rel = 0.0;
  const double fd_step = 1e-6;
  for (const auto& spec : specs) {
    for (int k = 0; k < 1000; ++k) {
      Vector x = random_simplex_point(rng, 3);
      x = (x.array() + 0.05) / (1.0 + 3 * 0.05);
      const Vector p = random_payoff(rng, 3);
      const Vector analytic =
          grad_x_storage(spec, SimplexState{x}, PayoffVector{p});
      for (int i = 0; i < 3; ++i) {
        Vector hi = x, lo = x;
        hi(i) += fd_step;
        lo(i) -= fd_step;
        const double fd =
            (storage(spec, SimplexState{hi}, PayoffVector{p}) -
             storage(spec, SimplexState{lo}, PayoffVector{p})) /
            (2 * fd_step);
        const double rel = std::abs(analytic(i) - fd) / (1.0 + std::abs(fd));
        worst_rel = std::max(worst_rel, rel);
        if (rel >= 1e-5) pass = false;
      }
    }
  }
  std::ostringstream detail;
  detail << "worst relative error " << worst_rel << " over 5000 points";
  report(7, "storage gradient finite differences", pass, detail.str());
}

// 8. Linear-program certificates with exhaustive enumeration cross-checks.
void check_lp_certificates() {
  Rng rng(29);
  bool pass = true;
  long bad = 0;
  double worst_resid = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const int n = 2 + k % 5;
    const SimplexState x{random_simplex_point(rng, n)};
    const PayoffVector p{random_payoff(rng, n)};
    const LPCertificate lp = lp_certificate(x, p);
    const double resid = std::max(
        {lp.stationarity_residual, lp.feasibility_residual,
         lp.slackness_residual, lp.dual_feasibility_residual});
    worst_resid = std::max(worst_resid, resid);
    if (!lp.verified || resid >= 1e-8) {
      ++bad;
      pass = false;
    }
  }
  std::ostringstream detail;
  detail << bad << " failures over 10000 instances, worst residual "
         << worst_resid;
  report(8, "linear-program certificates", pass, detail.str());
}

// 9. Mass conservation, boundary repulsion, and simplex invariance.
void check_conservation(const std::vector<BenchmarkRun>& runs) {
  Rng rng(31);
  bool pass = true;
  double worst_sum = 0.0;
  for (const auto& [name, rule] : benchmark_rules()) {
    for (int k = 0; k < 10000; ++k) {
      const SimplexState x{random_simplex_point(rng, 3)};
      const PayoffVector p{random_payoff(rng, 3)};
      const double s = std::abs(edm_field(rule, x, p).sum());
      worst_sum = std::max(worst_sum, s);
      if (s > 1e-12) pass = false;
    }
    for (int k = 0; k < 10000; ++k) {
      const Vector xb = random_boundary_point(rng, 3);
      const PayoffVector p{random_payoff(rng, 3)};
      const FlowVector v = edm_field(rule, SimplexState{xb}, p);
      for (int i = 0; i < 3; ++i) {
        if (xb(i) == 0.0 && v(i) < -1e-14) pass = false;
      }
    }
  }
  for (const auto& run : runs) {
    for (const auto& s : run.traj.samples) {
      if (!SimplexState{s.x}.feasible(1e-9)) pass = false;
    }
  }
  std::ostringstream detail;
  detail << "worst |1'V| " << worst_sum
         << ", all stored states on the simplex";
  report(9, "conservation and invariance", pass, detail.str());
}

// 10. Byte-identical re-runs of the command-line tool.
void check_determinism() {
#ifndef POPDYN_CLI_PATH
#error "POPDYN_CLI_PATH must point at the command-line binary"
#endif
  const fs::path base = fs::temp_directory_path() / "popdyn_determinism";
  std::error_code ec;
  fs::remove_all(base, ec);
  bool pass = true;
  std::string detail = "two runs compared byte for byte";
  for (const char* leg : {"a", "b"}) {
    const std::string cmd = std::string("POPDYN_OUTPUT_ROOT=") +
                            (base / leg).string() + " " + POPDYN_CLI_PATH +
                            " run bundled > /dev/null 2>&1";
    if (std::system(cmd.c_str()) != 0) {
      pass = false;
      detail = "command-line run failed";
    }
  }
  long compared = 0;
  if (pass) {
    for (const auto& entry :
         fs::recursive_directory_iterator(base / "a")) {
      if (!entry.is_regular_file()) continue;
      // The manifest records wall-clock time and is expected to differ.
      if (entry.path().filename() == "manifest.json") continue;
      const fs::path twin =
          base / "b" / fs::relative(entry.path(), base / "a");
      std::ifstream fa(entry.path(), std::ios::binary);
      std::ifstream fb(twin, std::ios::binary);
      std::stringstream sa, sb;
      sa << fa.rdbuf();
      sb << fb.rdbuf();
      ++compared;
      if (!fb || sa.str() != sb.str()) {
        pass = false;
        detail = "mismatch in " + twin.filename().string();
        break;
      }
    }
    if (compared == 0) pass = false;
    if (pass) detail = std::to_string(compared) + " files byte-identical";
  }
  fs::remove_all(base, ec);
  report(10, "deterministic outputs", pass, detail);
}

}  // namespace

int main() {
  const auto runs = check_congestion_benchmark();
  check_contractivity();
  check_benchmark_audits(runs);
  check_cone_sweeps();
  check_pointwise_batteries();
  check_equivalence();
  check_gradients();
  check_lp_certificates();
  check_conservation(runs);
  check_determinism();
  if (g_failures == 0) {
    std::printf("acceptance: all 10 checks passed\n");
    return 0;
  }
  std::printf("acceptance: %d checks FAILED\n", g_failures);
  return 1;
}
