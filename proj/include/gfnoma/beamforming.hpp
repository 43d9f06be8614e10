#pragma once

#include <vector>

#include "gfnoma/spreading.hpp"
#include "gfnoma/transceiver.hpp"
#include "gfnoma/types.hpp"

namespace gfnoma {

/// Receive combining weight for one cluster; always normalized so
/// b^H abar = 1 (within tol::beam_constraint).
struct BeamWeight {
  int cluster = 0;
  ComplexVector weight;  // length M
  ComplexVector target;  // abar the constraint refers to
};

/// Normalizes an unnormalized solve output onto the unit-gain constraint
/// and verifies it. Throws ContractError for a degenerate (near-zero
/// gain) weight.
BeamWeight make_beam_weight(int cluster, const ComplexVector& unnormalized,
                            const ComplexVector& abar);

/// Combined observations for one cluster's sparse recovery problem.
/// The full block parameter matrix is beam_gain (x) I_T and is never
/// materialized; `combined` keeps the vec-of-transpose layout, so entries
/// group by subcarrier with T consecutive slots each.
struct Measurement {
  int cluster = 0;
  int slots = 0;
  ComplexVector combined;   // K*T
  ComplexMatrix beam_gain;  // K x Q

  /// K x T matrix view of `combined`.
  ComplexMatrix combined_matrix() const;
};

/// Closed-form statistical weight: interference covariance from the
/// interfering clusters' spread channels weighted by activity guesses and
/// an empirical SNR, plus the K-scaled noise loading.
BeamWeight sbf_weight(const EquivalentChannel& eqch, int cluster,
                      const std::vector<double>& activity_guess, double esnr_db,
                      const ComplexVector& abar);

/// Sample-covariance weight from interference-plus-noise samples
/// (columns of `ipnc`), diagonally loaded. epsilon < 0 selects the
/// trace-based automatic loading.
BeamWeight dbf_weight(const ComplexMatrix& ipnc, double epsilon, int cluster,
                      const ComplexVector& abar);

/// Interference-plus-noise component per (subcarrier, slot):
/// column k*T + t holds y_{k,t} - G_{n,k} x_t for the current estimate.
ComplexMatrix estimate_ipnc(const ComplexMatrix& samples, const EquivalentChannel& eqch,
                            int cluster, const ComplexMatrix& symbols);

/// Beamformed measurement and gain matrix for one cluster. `samples` is
/// a received frame or an interference-cancelled copy of it.
Measurement build_measurement(const ComplexMatrix& samples, const EquivalentChannel& eqch,
                              const BeamWeight& weight);

/// Zero-forcing initial weights from the stacked cluster average steering
/// vectors (optional baseline initializer).
std::vector<BeamWeight> zfbf_weights(const std::vector<ComplexVector>& abar);

}  // namespace gfnoma
