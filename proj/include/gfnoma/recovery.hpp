#pragma once

#include <limits>
#include <vector>

#include "gfnoma/beamforming.hpp"

namespace gfnoma {

/// Indices of the `count` largest values; ties broken toward the lowest
/// index. Result sorted ascending.
BlockIndexSet find_top(const Eigen::Ref<const RealVector>& values, int count);

/// Block least squares on a fixed support. The block parameter matrix is
/// beam_gain (x) I_T, so the problem decouples into one K x s system
/// shared by all T slots. Rows outside the support are zero.
/// Rank-deficient supports raise RankError (callers treat that as a
/// failed sparsity hypothesis).
ComplexMatrix ls_on_support(const Measurement& meas, const BlockIndexSet& support);

struct AspResult {
  ComplexMatrix symbols;   // Q x T
  BlockIndexSet support;
  ComplexVector residual;  // K*T, same layout as Measurement::combined
};

/// Block-sparse subspace pursuit with residual-driven support refinement:
/// expand by the `sparsity` strongest block correlations, solve on the
/// union, prune by block energy, re-solve, and stop as soon as the
/// residual energy stops shrinking (or the iteration cap is reached),
/// returning the best triple seen.
AspResult asp(const Measurement& meas, const BlockIndexSet& initial_support,
              const ComplexVector& initial_residual, int sparsity, int max_iterations);

/// Temporal power ratio: max over supported rows of the row energy
/// divided by the min. Empty supports or zero-energy supported rows give
/// +infinity (the hypothesis is rejected).
double tpr(const ComplexMatrix& symbols, const BlockIndexSet& support);

struct SparsityRecord {
  double residual_energy = std::numeric_limits<double>::infinity();
  BlockIndexSet support;
  ComplexMatrix symbols;  // Q x T
  double tpr_value = std::numeric_limits<double>::infinity();
  ComplexVector beam;
  bool failed = false;
};

struct SparsityDecision {
  int sparsity = 0;  // 0 when every hypothesis failed
  bool fallback = false;
};

/// Keep hypotheses whose TPR is within the threshold, then pick the one
/// with the smallest residual energy; ties go to the smaller sparsity.
/// An empty candidate set falls back to the overall residual minimum.
SparsityDecision decide_sparsity(const std::vector<SparsityRecord>& records,
                                 double threshold);

enum class InitialWeight { sbf, zfbf };

struct ReceiverConfig {
  int s_max = 8;               // sparsity search upper bound
  double epsilon = -1.0;       // diagonal loading; <= 0 selects automatic
  double theta1 = 1e-3;        // beamforming-loop stop factor
  int asp_iterations = 10;     // L1
  double tpr_threshold = 3.0;
  double esnr_db = 13.0;       // empirical SNR fed to the statistical weight
  double alpha_hint = 0.1;     // activity guess fed to the statistical weight
  int ic_rounds = 3;           // L2
  int ic_inner = 5;            // L3
  int max_alternations = 25;   // safety cap on the beamforming loop
  double noise_power = -1.0;   // known sigma_v^2 (enables K*sigma_v^2 loading)
  InitialWeight initial_weight = InitialWeight::sbf;
};

struct RecoveryResult {
  int cluster = 0;
  BlockIndexSet support;
  ComplexMatrix symbols;  // Q x T, zero rows off-support
  double residual_energy = 0.0;
  ComplexVector beam;
  int decided_sparsity = 0;
  bool fallback_decision = false;
  bool all_failed = false;
  std::vector<SparsityRecord> search;  // one record per s = 1..s_max
};

/// Joint adaptive beamforming and subspace pursuit detection: per cluster,
/// statistically initialized measurements, a sparsity sweep with warm
/// started supports and alternating ASP / adaptive-weight updates, then
/// the TPR-gated sparsity decision.
std::vector<RecoveryResult> jabfsp(const ReceivedFrame& frame, const EquivalentChannel& eqch,
                                   const std::vector<ComplexVector>& abar,
                                   const ReceiverConfig& cfg);

/// Interference-cancellation refinement of jabfsp estimates: rounds of
/// reconstruct-and-cancel using the other clusters' previous-round
/// estimates, each followed by LS + weight refinement on the fixed
/// detected support. Returns the refined symbol matrices.
std::vector<ComplexMatrix> jabfsp_ic(const ReceivedFrame& frame, const EquivalentChannel& eqch,
                                     const std::vector<ComplexVector>& abar,
                                     const std::vector<RecoveryResult>& init,
                                     const ReceiverConfig& cfg);

/// Known-sparsity block subspace pursuit on a single antenna's rows, with
/// no beamforming: the single-antenna comparison condition.
RecoveryResult oracle_blocksp_baseline(const ReceivedFrame& frame,
                                       const EquivalentChannel& eqch, int cluster,
                                       int sparsity, int antenna, int max_iterations);

}  // namespace gfnoma
