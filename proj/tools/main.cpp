#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "gfnoma/evaluation.hpp"
#include "gfnoma/numerics.hpp"

namespace {

using namespace gfnoma;

struct CommonFlags {
  std::string config_path;
  std::string out_path;
  int trials = -1;
  long long seed = -1;
  std::string receiver;
  int threads = -1;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool config_required) {
  auto* opt = cmd->add_option("--config", flags.config_path, "experiment config file");
  if (config_required) opt->required();
  cmd->add_option("--out", flags.out_path, "CSV output path");
  cmd->add_option("--trials", flags.trials, "override trial count");
  cmd->add_option("--seed", flags.seed, "override master seed");
  cmd->add_option("--receiver", flags.receiver, "override receiver selection");
  cmd->add_option("--threads", flags.threads, "worker count (0 = hardware)");
}

ExperimentConfig resolve_config(const CommonFlags& flags) {
  ExperimentConfig cfg = load_config(flags.config_path);
  if (flags.trials >= 0) cfg.trials = flags.trials;
  if (flags.seed >= 0) cfg.seed = static_cast<std::uint64_t>(flags.seed);
  if (!flags.receiver.empty()) cfg.receiver = flags.receiver;
  if (flags.threads >= 0) cfg.threads = flags.threads;
  cfg.validate();
  return cfg;
}

void print_table(const SweepTable& table) {
  std::printf("%-12s %12s %-10s %-7s %12s %12s\n", "sweep", "value", "receiver",
              "cluster", "der", "ser");
  for (const SweepRow& r : table) {
    std::printf("%-12s %12.4g %-10s %-7s %12.6g %12.6g\n", r.sweep_param.c_str(),
                r.sweep_value, r.receiver.c_str(), r.cluster.c_str(), r.der, r.ser);
  }
}

int run_command(const CommonFlags& flags, bool force_single) {
  ExperimentConfig cfg = resolve_config(flags);
  if (force_single) cfg.sweep = "none";
  SweepTable table = run_sweep(cfg);
  print_table(table);
  if (!flags.out_path.empty()) {
    emit_csv(table, flags.out_path);
    std::printf("wrote %s\n", flags.out_path.c_str());
  }
  return 0;
}

bool report(const char* name, bool ok) {
  std::printf("[%s] %s\n", ok ? "ok" : "FAIL", name);
  return ok;
}

// A fast battery of library invariants, runnable in the field without the
// test suite.
int selftest() {
  bool all = true;
  Rng rng(20240917);

  {
    bool ok = true;
    for (int trial = 0; trial < 20 && ok; ++trial) {
      const int rows = 6 + rng.uniform_int(10);
      const int n = 1 + rng.uniform_int(3);
      const int q = 1 + rng.uniform_int(3);
      ComplexMatrix a(rows, n), b(rows, q);
      for (int i = 0; i < a.size(); ++i) a(i / n, i % n) = rng.complex_gaussian(1.0);
      for (int i = 0; i < b.size(); ++i) b(i / q, i % q) = rng.complex_gaussian(1.0);
      auto bp = block_pinv(a, b);
      ComplexMatrix concat(rows, n + q);
      concat << a, b;
      ComplexMatrix stacked(n + q, rows);
      stacked << bp.top, bp.bottom;
      ok = (stacked - pinv_full_col(concat)).cwiseAbs().maxCoeff() < 1e-9;
    }
    all &= report("block pseudo-inverse matches the direct route", ok);
  }
  {
    bool ok = true;
    for (int trial = 0; trial < 20 && ok; ++trial) {
      ComplexMatrix x(2 + rng.uniform_int(4), 1 + rng.uniform_int(5));
      for (int i = 0; i < x.size(); ++i) x(i / x.cols(), i % x.cols()) = rng.complex_gaussian(1.0);
      ok = (unvec(vec(x), x.rows()) - x).cwiseAbs().maxCoeff() == 0.0;
    }
    all &= report("vec / unvec round trip", ok);
  }
  {
    bool ok = true;
    for (int trial = 0; trial < 30 && ok; ++trial) {
      ComplexVector a = steering_vector(rng.uniform(-85.0, 85.0), 6, 0.5);
      ok = std::abs(a(0) - Complex(1, 0)) == 0.0;
      for (int m = 0; m < 6 && ok; ++m) ok = std::abs(std::abs(a(m)) - 1.0) < 1e-14;
    }
    all &= report("steering vectors are unit modulus with leading one", ok);
  }
  {
    bool ok = true;
    for (int shift = 0; shift < 20 && ok; ++shift) {
      ok = (zadoff_chu(20, 3, shift) - zadoff_chu(20, 3, shift + 20)).cwiseAbs().maxCoeff() == 0.0;
    }
    SignatureSet set = assign_signatures(20, 40, default_roots(20, 2), rng);
    for (int i = 0; i < 40 && ok; ++i) {
      for (int j = i + 1; j < 40 && ok; ++j) {
        ok = (set.codes[i] - set.codes[j]).cwiseAbs().maxCoeff() > 1e-9;
      }
    }
    all &= report("spreading signatures: shift periodicity and distinctness", ok);
  }
  {
    ExperimentConfig cfg;
    cfg.system = {5, 3, 40, 20, 7, 0.5};
    cfg.snr_db = {2.0};
    cfg.trials = 2;
    cfg.threads = 1;
    TrialResult a = run_trial(cfg, 0, 0);
    TrialResult b = run_trial(cfg, 0, 0);
    bool ok = true;
    for (int n = 0; n < 3; ++n) {
      ok = ok && a.clusters[n].der == b.clusters[n].der &&
           a.clusters[n].ser == b.clusters[n].ser;
    }
    all &= report("trials are deterministic under a fixed seed", ok);

    cfg.system.clusters = 1;
    cfg.cluster_centers_deg = {-10.0};
    cfg.snr_db = {std::numeric_limits<double>::infinity()};
    TrialResult clean = run_trial(cfg, 0, 1);
    all &= report("noiseless single-cluster trials come back error-free",
                  clean.clusters[0].der == 0.0 && clean.clusters[0].ser == 0.0);

    cfg.system.clusters = 3;
    cfg.cluster_centers_deg = {-30.0, -10.0, 10.0};
    cfg.snr_db = {4.0};
    cfg.sweep = "none";
    cfg.trials = 4;
    cfg.threads = 1;
    const std::string serial = csv_string(run_sweep(cfg));
    cfg.threads = 3;
    const std::string parallel = csv_string(run_sweep(cfg));
    all &= report("sweeps are independent of the worker count", serial == parallel);
  }

  std::printf(all ? "selftest passed\n" : "selftest FAILED\n");
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grant-free NOMA uplink link-level simulator"};
  app.require_subcommand(1);

  CommonFlags run_flags, sweep_flags;
  CLI::App* run_cmd = app.add_subcommand("run", "single-point experiment from a config");
  add_common(run_cmd, run_flags, true);
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "sweep the axis configured in the file");
  add_common(sweep_cmd, sweep_flags, true);
  CLI::App* selftest_cmd = app.add_subcommand("selftest", "run the built-in invariant checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return run_command(run_flags, true);
    if (sweep_cmd->parsed()) return run_command(sweep_flags, false);
    if (selftest_cmd->parsed()) return selftest();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
