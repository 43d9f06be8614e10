#include "gfnoma/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "gfnoma/numerics.hpp"

namespace gfnoma {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double effective_loading(const ReceiverConfig& cfg, int subcarriers) {
  if (cfg.epsilon > 0.0) return cfg.epsilon;
  if (cfg.noise_power > 0.0) return subcarriers * cfg.noise_power;
  return -1.0;  // trace-based automatic loading in dbf_weight
}

ComplexVector residual_of(const Measurement& meas, const ComplexMatrix& symbols) {
  ComplexMatrix fit = meas.beam_gain * symbols;  // K x T
  return meas.combined - vec(fit.transpose().eval());
}

}  // namespace

BlockIndexSet find_top(const Eigen::Ref<const RealVector>& values, int count) {
  const int n = static_cast<int>(values.size());
  if (count > n) {
    throw DimensionError("find_top: more indices requested than values");
  }
  if (count <= 0) return {};
  BlockIndexSet order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return values(a) > values(b);  // stable: equal values keep index order
  });
  BlockIndexSet top(order.begin(), order.begin() + count);
  std::sort(top.begin(), top.end());
  return top;
}

ComplexMatrix ls_on_support(const Measurement& meas, const BlockIndexSet& support) {
  const int users = static_cast<int>(meas.beam_gain.cols());
  ComplexMatrix x = ComplexMatrix::Zero(users, meas.slots);
  if (support.empty()) return x;
  const int s = static_cast<int>(support.size());
  if (s > meas.beam_gain.rows()) {
    throw RankError("ls_on_support: support exceeds measurement rows");
  }
  ComplexMatrix sub(meas.beam_gain.rows(), s);
  for (int i = 0; i < s; ++i) {
    if (support[i] < 0 || support[i] >= users) {
      throw DimensionError("ls_on_support: support index out of range");
    }
    sub.col(i) = meas.beam_gain.col(support[i]);
  }
  ComplexMatrix est = pinv_full_col(sub) * meas.combined_matrix();  // s x T
  for (int i = 0; i < s; ++i) x.row(support[i]) = est.row(i);
  return x;
}

AspResult asp(const Measurement& meas, const BlockIndexSet& initial_support,
              const ComplexVector& initial_residual, int sparsity, int max_iterations) {
  if (sparsity < 1) {
    throw ConfigError("asp: sparsity must be at least 1");
  }
  if (static_cast<Eigen::Index>(sparsity) * meas.slots > meas.combined.size()) {
    throw DimensionError("asp: sparsity exceeds the measurement size");
  }
  if (initial_residual.size() != meas.combined.size()) {
    throw DimensionError("asp: residual length does not match the measurement");
  }

  AspResult best;
  best.symbols = ComplexMatrix::Zero(meas.beam_gain.cols(), meas.slots);
  best.support = initial_support;
  best.residual = initial_residual;
  double best_energy = initial_residual.squaredNorm();

  const ComplexMatrix gain_conj = meas.beam_gain.conjugate();
  for (int iter = 0; iter < max_iterations; ++iter) {
    // Support expansion by block correlation with the residual.
    ComplexMatrix rmat = unvec(best.residual, meas.slots);  // T x K
    RealVector correlation = (rmat * gain_conj).colwise().squaredNorm().transpose();
    BlockIndexSet expanded = union_sorted(best.support, find_top(correlation, sparsity));
    // LS over the union, prune to the strongest blocks, re-estimate.
    ComplexMatrix w = ls_on_support(meas, expanded);
    BlockIndexSet pruned = find_top(w.rowwise().squaredNorm(), sparsity);
    ComplexMatrix c = ls_on_support(meas, pruned);
    ComplexVector r = residual_of(meas, c);
    const double energy = r.squaredNorm();
    if (energy >= best_energy) break;  // non-improving iterate is discarded
    best.symbols = std::move(c);
    best.support = std::move(pruned);
    best.residual = std::move(r);
    best_energy = energy;
  }
  return best;
}

double tpr(const ComplexMatrix& symbols, const BlockIndexSet& support) {
  if (support.empty()) return kInf;
  double emax = 0.0;
  double emin = kInf;
  for (int q : support) {
    const double e = symbols.row(q).squaredNorm();
    emax = std::max(emax, e);
    emin = std::min(emin, e);
  }
  if (emin <= 0.0) return kInf;
  return emax / emin;
}

SparsityDecision decide_sparsity(const std::vector<SparsityRecord>& records,
                                 double threshold) {
  int best = -1;
  for (int i = 0; i < static_cast<int>(records.size()); ++i) {
    if (records[i].failed || records[i].tpr_value > threshold) continue;
    if (best < 0 || records[i].residual_energy < records[best].residual_energy) {
      best = i;
    }
  }
  if (best >= 0) return {best + 1, false};
  // Every hypothesis rejected by the TPR gate: take the residual minimum.
  for (int i = 0; i < static_cast<int>(records.size()); ++i) {
    if (records[i].failed) continue;
    if (best < 0 || records[i].residual_energy < records[best].residual_energy) {
      best = i;
    }
  }
  return {best + 1, true};  // sparsity 0 when everything failed
}

namespace {

struct Alternation {
  ComplexMatrix symbols;
  BlockIndexSet support;
  ComplexVector residual;
  double energy = kInf;
  ComplexVector beam;
};

RecoveryResult recover_cluster(const ReceivedFrame& frame, const EquivalentChannel& eqch,
                               const std::vector<ComplexVector>& abar,
                               const ReceiverConfig& cfg, int cluster,
                               const BeamWeight& initial) {
  const double loading = effective_loading(cfg, eqch.subcarriers);
  const Measurement sbf_meas = build_measurement(frame.samples, eqch, initial);

  RecoveryResult out;
  out.cluster = cluster;
  out.search.reserve(cfg.s_max);

  BlockIndexSet warm;  // support handed from sparsity s-1 to s
  for (int s = 1; s <= cfg.s_max; ++s) {
    SparsityRecord rec;
    try {
      // Each sparsity level restarts from the statistically combined
      // measurement; only the support survives from the previous level.
      Measurement meas = sbf_meas;
      BlockIndexSet gamma = warm;
      ComplexVector residual = meas.combined;
      double previous_energy = residual.squaredNorm();

      std::optional<Alternation> prev, cur;
      for (int z = 0; z < cfg.max_alternations; ++z) {
        AspResult a = asp(meas, gamma, residual, s, cfg.asp_iterations);
        const double energy = a.residual.squaredNorm();
        ComplexMatrix ipnc = estimate_ipnc(frame.samples, eqch, cluster, a.symbols);
        BeamWeight updated = dbf_weight(ipnc, loading, cluster, abar[cluster]);
        meas = build_measurement(frame.samples, eqch, updated);

        prev = std::move(cur);
        cur = Alternation{a.symbols, a.support, a.residual, energy, updated.weight};
        gamma = cur->support;
        residual = cur->residual;

        if (previous_energy <= 0.0) break;  // already an exact fit
        if (std::abs(energy - previous_energy) < cfg.theta1 * previous_energy) break;
        previous_energy = energy;
      }
      // The stop compares alternation z against z-1; the z-1 state is the
      // recorded one whenever it exists.
      const Alternation& chosen = prev ? *prev : *cur;
      rec.residual_energy = chosen.energy;
      rec.support = chosen.support;
      rec.symbols = chosen.symbols;
      rec.beam = chosen.beam;
      rec.tpr_value = tpr(chosen.symbols, chosen.support);
      rec.failed = false;
      warm = rec.support;
    } catch (const RankError&) {
      // A rank-deficient hypothesis scores as unusable; the sweep goes on.
      rec.failed = true;
      rec.residual_energy = kInf;
      rec.tpr_value = kInf;
      rec.symbols = ComplexMatrix::Zero(eqch.users, sbf_meas.slots);
    }
    out.search.push_back(std::move(rec));
  }

  const SparsityDecision decision = decide_sparsity(out.search, cfg.tpr_threshold);
  out.fallback_decision = decision.fallback;
  if (decision.sparsity <= 0) {
    out.all_failed = true;
    out.symbols = ComplexMatrix::Zero(eqch.users, sbf_meas.slots);
    out.beam = initial.weight;
    return out;
  }
  const SparsityRecord& rec = out.search[decision.sparsity - 1];
  out.decided_sparsity = decision.sparsity;
  out.support = rec.support;
  out.symbols = rec.symbols;
  out.residual_energy = rec.residual_energy;
  out.beam = rec.beam;
  return out;
}

}  // namespace

std::vector<RecoveryResult> jabfsp(const ReceivedFrame& frame, const EquivalentChannel& eqch,
                                   const std::vector<ComplexVector>& abar,
                                   const ReceiverConfig& cfg) {
  if (static_cast<int>(abar.size()) != eqch.cluster_count()) {
    throw DimensionError("jabfsp: steering average count != cluster count");
  }
  if (cfg.s_max < 1) {
    throw ConfigError("jabfsp: sparsity bound must be at least 1");
  }
  std::vector<BeamWeight> initial;
  if (cfg.initial_weight == InitialWeight::zfbf) {
    initial = zfbf_weights(abar);
  } else {
    std::vector<double> alpha(eqch.cluster_count(), cfg.alpha_hint);
    for (int n = 0; n < eqch.cluster_count(); ++n) {
      initial.push_back(sbf_weight(eqch, n, alpha, cfg.esnr_db, abar[n]));
    }
  }
  std::vector<RecoveryResult> results;
  results.reserve(eqch.cluster_count());
  for (int n = 0; n < eqch.cluster_count(); ++n) {
    results.push_back(recover_cluster(frame, eqch, abar, cfg, n, initial[n]));
  }
  return results;
}

std::vector<ComplexMatrix> jabfsp_ic(const ReceivedFrame& frame, const EquivalentChannel& eqch,
                                     const std::vector<ComplexVector>& abar,
                                     const std::vector<RecoveryResult>& init,
                                     const ReceiverConfig& cfg) {
  const int clusters = eqch.cluster_count();
  if (static_cast<int>(init.size()) != clusters ||
      static_cast<int>(abar.size()) != clusters) {
    throw DimensionError("jabfsp_ic: cluster count mismatch");
  }
  const double loading = effective_loading(cfg, eqch.subcarriers);

  std::vector<ComplexMatrix> symbols(clusters);
  std::vector<BeamWeight> beams;
  std::vector<double> error(clusters);
  beams.reserve(clusters);
  for (int n = 0; n < clusters; ++n) {
    symbols[n] = init[n].symbols;
    ComplexMatrix ipnc = estimate_ipnc(frame.samples, eqch, n, symbols[n]);
    beams.push_back(dbf_weight(ipnc, loading, n, abar[n]));
    error[n] = init[n].residual_energy;
  }

  for (int round = 0; round < cfg.ic_rounds; ++round) {
    // Jacobi rounds: every cluster cancels with the previous round's
    // estimates, so concurrent cluster processing stays deterministic.
    const std::vector<ComplexMatrix> snapshot = symbols;
    for (int n = 0; n < clusters; ++n) {
      ComplexMatrix cancelled = frame.samples;
      for (int l = 0; l < clusters; ++l) {
        if (l != n) cancelled -= eqch.stacked[l] * snapshot[l];
      }
      double previous = error[n];
      for (int inner = 1; inner <= cfg.ic_inner; ++inner) {
        Measurement meas = build_measurement(cancelled, eqch, beams[n]);
        ComplexMatrix estimate = ls_on_support(meas, init[n].support);
        const double current = residual_of(meas, estimate).squaredNorm();
        if (current < previous && inner < cfg.ic_inner) {
          symbols[n] = std::move(estimate);
          // The weight keeps tracking the raw received frame.
          ComplexMatrix ipnc = estimate_ipnc(frame.samples, eqch, n, symbols[n]);
          beams[n] = dbf_weight(ipnc, loading, n, abar[n]);
          previous = current;
        } else {
          error[n] = previous;
          break;
        }
      }
    }
  }
  return symbols;
}

RecoveryResult oracle_blocksp_baseline(const ReceivedFrame& frame,
                                       const EquivalentChannel& eqch, int cluster,
                                       int sparsity, int antenna, int max_iterations) {
  if (antenna < 0 || antenna >= eqch.antennas) {
    throw ConfigError("oracle_blocksp_baseline: antenna index out of range");
  }
  ComplexVector selector = ComplexVector::Zero(eqch.antennas);
  selector(antenna) = Complex(1, 0);
  BeamWeight weight = make_beam_weight(cluster, selector, selector);
  Measurement meas = build_measurement(frame.samples, eqch, weight);
  AspResult a = asp(meas, {}, meas.combined, sparsity, max_iterations);

  RecoveryResult out;
  out.cluster = cluster;
  out.support = a.support;
  out.symbols = a.symbols;
  out.residual_energy = a.residual.squaredNorm();
  out.beam = weight.weight;
  out.decided_sparsity = sparsity;
  return out;
}

}  // namespace gfnoma
