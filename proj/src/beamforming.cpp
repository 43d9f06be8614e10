#include "gfnoma/beamforming.hpp"

#include <cmath>

#include "gfnoma/numerics.hpp"

namespace gfnoma {

BeamWeight make_beam_weight(int cluster, const ComplexVector& unnormalized,
                            const ComplexVector& abar) {
  const Complex gain = abar.dot(unnormalized);  // abar^H v
  if (std::abs(gain) < 1e-300) {
    throw ContractError("beam weight has no gain toward the cluster center");
  }
  BeamWeight w;
  w.cluster = cluster;
  w.weight = unnormalized / gain;
  w.target = abar;
  if (std::abs(w.weight.dot(abar) - Complex(1, 0)) > tol::beam_constraint) {
    throw ContractError("beam weight violates the unit-gain constraint");
  }
  return w;
}

ComplexMatrix Measurement::combined_matrix() const {
  // combined = vec(Y_n^T): unvec with T rows, transpose back to K x T.
  return unvec(combined, slots).transpose();
}

BeamWeight sbf_weight(const EquivalentChannel& eqch, int cluster,
                      const std::vector<double>& activity_guess, double esnr_db,
                      const ComplexVector& abar) {
  if (static_cast<int>(activity_guess.size()) != eqch.cluster_count()) {
    throw DimensionError("sbf_weight: activity guess count != cluster count");
  }
  if (!std::isfinite(esnr_db)) {
    throw ConfigError("sbf_weight: empirical SNR must be finite");
  }
  const int m = eqch.antennas;
  const double esnr = std::pow(10.0, esnr_db / 10.0);  // sigma_l^2 / sigma_v^2
  // Noise power normalized to 1; the weight only depends on ratios.
  ComplexMatrix phi = static_cast<double>(eqch.subcarriers) * ComplexMatrix::Identity(m, m);
  for (int l = 0; l < eqch.cluster_count(); ++l) {
    if (l == cluster) continue;
    ComplexMatrix acc = ComplexMatrix::Zero(m, m);
    for (int k = 0; k < eqch.subcarriers; ++k) {
      const auto g = eqch.block(l, k);
      acc += g * g.adjoint();
    }
    phi += activity_guess[l] * esnr * acc;
  }
  ComplexVector v = loaded_solve(phi, 0.0, abar);
  return make_beam_weight(cluster, v, abar);
}

BeamWeight dbf_weight(const ComplexMatrix& ipnc, double epsilon, int cluster,
                      const ComplexVector& abar) {
  const int m = static_cast<int>(ipnc.rows());
  ComplexMatrix r = ComplexMatrix::Zero(m, m);
  if (ipnc.cols() > 0) {
    r = (ipnc * ipnc.adjoint()) / static_cast<double>(ipnc.cols());
    r = (r + r.adjoint()) / 2.0;  // keep exactly Hermitian under roundoff
  }
  double eps = epsilon;
  if (eps < 0.0) {
    eps = 1e-3 * r.trace().real() / m;
    if (eps <= 0.0) eps = 1.0;  // zero covariance: any loading gives abar direction
  }
  ComplexVector v = loaded_solve(r, eps, abar);
  return make_beam_weight(cluster, v, abar);
}

ComplexMatrix estimate_ipnc(const ComplexMatrix& samples, const EquivalentChannel& eqch,
                            int cluster, const ComplexMatrix& symbols) {
  const int m = eqch.antennas;
  const int k_count = eqch.subcarriers;
  const int slots = static_cast<int>(symbols.cols());
  if (samples.rows() != m * k_count || symbols.rows() != eqch.users) {
    throw DimensionError("estimate_ipnc: dimension mismatch");
  }
  if (samples.cols() != slots) {
    throw DimensionError("estimate_ipnc: slot count mismatch");
  }
  // Residual frame Y - G_n X_n, then unstack subcarrier blocks into columns.
  ComplexMatrix residual = samples - eqch.stacked[cluster] * symbols;
  ComplexMatrix ipnc(m, k_count * slots);
  for (int k = 0; k < k_count; ++k) {
    for (int t = 0; t < slots; ++t) {
      ipnc.col(k * slots + t) = residual.block(k * m, t, m, 1);
    }
  }
  return ipnc;
}

Measurement build_measurement(const ComplexMatrix& samples, const EquivalentChannel& eqch,
                              const BeamWeight& weight) {
  Measurement meas;
  meas.cluster = weight.cluster;
  meas.slots = static_cast<int>(samples.cols());
  ComplexMatrix combined = combine_kron(samples, weight.weight, eqch.subcarriers);
  meas.combined = vec(combined.transpose().eval());
  meas.beam_gain = combine_kron(eqch.stacked[weight.cluster], weight.weight, eqch.subcarriers);
  return meas;
}

std::vector<BeamWeight> zfbf_weights(const std::vector<ComplexVector>& abar) {
  const int clusters = static_cast<int>(abar.size());
  if (clusters == 0) return {};
  const int m = static_cast<int>(abar[0].size());
  ComplexMatrix stacked(m, clusters);
  for (int n = 0; n < clusters; ++n) stacked.col(n) = abar[n];
  ComplexMatrix pinv = pinv_full_col(stacked);  // clusters x M
  std::vector<BeamWeight> weights;
  weights.reserve(clusters);
  for (int n = 0; n < clusters; ++n) {
    ComplexVector v = pinv.row(n).adjoint();
    weights.push_back(make_beam_weight(n, v, abar[n]));
  }
  return weights;
}

}  // namespace gfnoma
