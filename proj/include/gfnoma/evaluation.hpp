#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gfnoma/config.hpp"
#include "gfnoma/recovery.hpp"

namespace gfnoma {

struct DetectionScore {
  double der = 0.0;
  int false_detections = 0;  // estimated actives that are inactive
  int missed = 0;            // true actives not detected
};

/// der = (false detections + misses) / users.
DetectionScore compute_der(const BlockIndexSet& estimated, const BlockIndexSet& truth,
                           int users);

struct SymbolScore {
  double ser = 0.0;
  int symbol_errors = 0;  // among correctly detected actives
};

/// Hard-demodulates rows of correctly detected actives to the nearest
/// constellation point and counts mismatches against the transmitted
/// symbols; ser = der + errors / (users * slots).
SymbolScore compute_ser(const ComplexMatrix& estimated, const ComplexMatrix& truth,
                        const BlockIndexSet& estimated_support,
                        const BlockIndexSet& true_support, Constellation constellation,
                        double symbol_power, int users, int slots);

/// Power bookkeeping for a per-cluster SNR list: the first cluster keeps
/// unit symbol power, the noise power follows from its SNR, and the other
/// clusters scale so every ratio symbol_power[n]/noise_power matches its
/// configured value. An all-infinite list gives a noiseless frame.
struct PowerScaling {
  double noise_power = 0.0;
  std::vector<double> symbol_power;
};

PowerScaling derive_powers(const std::vector<double>& snr_db);

struct ClusterOutcome {
  double der = 0.0;
  double ser = 0.0;
  int false_detections = 0;
  int missed = 0;
  int symbol_errors = 0;
  int decided_sparsity = 0;
  bool fallback_decision = false;
};

struct TrialResult {
  std::vector<ClusterOutcome> clusters;
  std::vector<RecoveryResult> recovery;   // per cluster
  std::vector<BlockIndexSet> true_support;  // ground truth, for diagnostics
};

/// One full generate -> receive -> score pass. Deterministic in
/// (cfg.seed, sweep_index, trial_index); the receiver sees only the
/// configured knowledge (channels, optionally perturbed; signatures;
/// steering averages; the empirical SNR and activity hints).
TrialResult run_trial(const ExperimentConfig& cfg, std::uint64_t sweep_index,
                      std::uint64_t trial_index);

struct SweepRow {
  std::string sweep_param;
  double sweep_value = 0.0;
  std::string receiver;
  std::string cluster;  // "1".."N" or "ave"
  double der = 0.0;
  double ser = 0.0;
  double f_mean = 0.0;
  double m_mean = 0.0;
  int trials = 0;
  std::uint64_t seed = 0;
};

using SweepTable = std::vector<SweepRow>;

/// Copy of the config with one sweep value applied to its axis.
ExperimentConfig apply_sweep_value(const ExperimentConfig& cfg, const std::string& axis,
                                   double value);

/// Averages run_trial over cfg.trials seeded trials per sweep value;
/// trials are distributed over cfg.threads workers with per-trial derived
/// seeds, so the table is independent of the worker count. Rows come out
/// canonically sorted.
SweepTable run_sweep(const ExperimentConfig& cfg);

/// UTF-8 CSV with a fixed 10-column header; floats at 10 significant
/// digits.
void emit_csv(const SweepTable& table, const std::string& path);
std::string csv_string(const SweepTable& table);
SweepTable parse_csv(const std::string& path);

}  // namespace gfnoma
