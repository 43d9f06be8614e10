#pragma once

#include <vector>

#include "gfnoma/rng.hpp"
#include "gfnoma/types.hpp"

namespace gfnoma {

/// Placement and fading parameters of one user.
struct UserGeometry {
  int cluster = 0;
  int user = 0;          // index within its cluster
  double theta_deg = 0;  // angle of arrival, |theta| < 90
  double rho = 1.0;      // large-scale fading amplitude
};

/// Channels as the receiver is allowed to know them: per-user steering
/// vectors, small-scale fading per subcarrier, and the resulting gain
/// vectors g = rho * eta_k * a. Users are stored flat in cluster-major
/// order.
struct ChannelSet {
  int antennas = 0;
  int subcarriers = 0;
  double spacing_ratio = 0.5;  // element spacing over wavelength
  std::vector<UserGeometry> users;
  std::vector<ComplexVector> steering;  // per user, length M
  std::vector<ComplexVector> fading;    // per user, length K
  std::vector<ComplexMatrix> gain;      // per user, M x K

  int user_count() const { return static_cast<int>(users.size()); }
  int cluster_count() const;
  std::vector<int> cluster_members(int cluster) const;
};

struct ClusterAssignment {
  std::vector<int> cluster_of;  // flat user index -> cluster label
  int clusters = 0;

  std::vector<int> members(int cluster) const;
};

/// Uniform-linear-array response for a plane wave from theta degrees;
/// element m is exp(-j 2 pi m (d/lambda) sin theta), element 0 is 1.
ComplexVector steering_vector(double theta_deg, int antennas, double spacing_ratio);

/// Draws fresh unit-variance complex Gaussian small-scale fading per
/// (user, subcarrier) and assembles gains; deterministic given the rng.
ChannelSet sample_channels(const std::vector<UserGeometry>& geometry, int antennas,
                           int subcarriers, double spacing_ratio, Rng& rng);

/// |a1^H a2| / M; for two steering vectors this equals the Fejer-kernel
/// magnitude in the normalized direction difference.
double channel_correlation(const ComplexVector& a1, const ComplexVector& a2);

/// K-means on the scalar normalized direction 2 (d/lambda) sin(theta),
/// best of `restarts` random initializations by within-cluster sum of
/// squares; labels ordered by increasing centroid.
ClusterAssignment cluster_users(const ChannelSet& channels, int clusters, int restarts,
                                Rng& rng);

/// The assignment recorded in the geometry itself (generation truth).
ClusterAssignment assignment_from_geometry(const ChannelSet& channels);

/// Per-cluster average steering vector, (1/Q) sum of a_{n,q}.
std::vector<ComplexVector> average_steering(const ChannelSet& channels,
                                            const ClusterAssignment& assignment);

/// Same average recovered from gain vectors: each g divided by its first
/// element before averaging (slow-fading route).
std::vector<ComplexVector> average_steering_from_gains(const ChannelSet& channels,
                                                       const ClusterAssignment& assignment,
                                                       int subcarrier = 0);

/// Receiver-side CSI error: every fading value and steering element gets
/// an independent uniform disturbance on its real and imaginary parts
/// with half-range = percent/100 of that part's magnitude. Gains are
/// rebuilt from the perturbed pieces. Ground truth stays untouched.
ChannelSet perturb_csi(const ChannelSet& channels, double percent, Rng& rng);

/// Angles drawn uniformly inside per-cluster bands (center +- width/2),
/// cluster-major, unit large-scale fading.
std::vector<UserGeometry> band_geometry(const std::vector<double>& centers_deg,
                                        double width_deg, int users_per_cluster, Rng& rng);

/// Geometry from an explicit angle list, split into equal-size clusters
/// in list order.
std::vector<UserGeometry> explicit_geometry(const std::vector<double>& angles_deg,
                                            int clusters);

}  // namespace gfnoma
