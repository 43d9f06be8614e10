#include "gfnoma/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace gfnoma {

namespace {

double normalized_direction(double theta_deg, double spacing_ratio) {
  return 2.0 * spacing_ratio * std::sin(theta_deg * M_PI / 180.0);
}

// One real or imaginary component disturbed by +- percent of its magnitude.
double disturb(double x, double percent, Rng& rng) {
  const double half = std::abs(x) * percent / 100.0;
  return rng.uniform(x - half, x + half);
}

}  // namespace

int ChannelSet::cluster_count() const {
  int n = 0;
  for (const auto& u : users) n = std::max(n, u.cluster + 1);
  return n;
}

std::vector<int> ChannelSet::cluster_members(int cluster) const {
  std::vector<int> idx;
  for (int i = 0; i < user_count(); ++i) {
    if (users[i].cluster == cluster) idx.push_back(i);
  }
  return idx;
}

std::vector<int> ClusterAssignment::members(int cluster) const {
  std::vector<int> idx;
  for (int i = 0; i < static_cast<int>(cluster_of.size()); ++i) {
    if (cluster_of[i] == cluster) idx.push_back(i);
  }
  return idx;
}

ComplexVector steering_vector(double theta_deg, int antennas, double spacing_ratio) {
  ComplexVector a(antennas);
  const double phase_step = -2.0 * M_PI * spacing_ratio * std::sin(theta_deg * M_PI / 180.0);
  for (int m = 0; m < antennas; ++m) {
    a(m) = std::polar(1.0, phase_step * m);
  }
  return a;
}

ChannelSet sample_channels(const std::vector<UserGeometry>& geometry, int antennas,
                           int subcarriers, double spacing_ratio, Rng& rng) {
  ChannelSet set;
  set.antennas = antennas;
  set.subcarriers = subcarriers;
  set.spacing_ratio = spacing_ratio;
  set.users = geometry;
  set.steering.reserve(geometry.size());
  set.fading.reserve(geometry.size());
  set.gain.reserve(geometry.size());
  for (const auto& u : geometry) {
    ComplexVector a = steering_vector(u.theta_deg, antennas, spacing_ratio);
    ComplexVector eta(subcarriers);
    for (int k = 0; k < subcarriers; ++k) eta(k) = rng.complex_gaussian(1.0);
    ComplexMatrix g(antennas, subcarriers);
    for (int k = 0; k < subcarriers; ++k) g.col(k) = u.rho * eta(k) * a;
    set.steering.push_back(std::move(a));
    set.fading.push_back(std::move(eta));
    set.gain.push_back(std::move(g));
  }
  return set;
}

double channel_correlation(const ComplexVector& a1, const ComplexVector& a2) {
  if (a1.size() != a2.size()) {
    throw DimensionError("channel_correlation: length mismatch");
  }
  return std::abs(a1.dot(a2)) / static_cast<double>(a1.size());
}

namespace {

struct KmeansRun {
  std::vector<int> labels;
  std::vector<double> centroids;
  double wcss = std::numeric_limits<double>::infinity();
};

KmeansRun lloyd(const std::vector<double>& points, int clusters, Rng& rng) {
  const int n = static_cast<int>(points.size());
  // Distinct random points as initial centroids.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (int i = 0; i < clusters; ++i) {
    std::swap(order[i], order[i + rng.uniform_int(n - i)]);
  }
  KmeansRun run;
  run.centroids.resize(clusters);
  for (int c = 0; c < clusters; ++c) run.centroids[c] = points[order[c]];
  run.labels.assign(n, 0);

  for (int pass = 0; pass < 200; ++pass) {
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < clusters; ++c) {
        const double d = (points[i] - run.centroids[c]) * (points[i] - run.centroids[c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (run.labels[i] != best) {
        run.labels[i] = best;
        changed = true;
      }
    }
    std::vector<double> sum(clusters, 0.0);
    std::vector<int> count(clusters, 0);
    for (int i = 0; i < n; ++i) {
      sum[run.labels[i]] += points[i];
      ++count[run.labels[i]];
    }
    for (int c = 0; c < clusters; ++c) {
      if (count[c] > 0) {
        run.centroids[c] = sum[c] / count[c];
      } else {
        // Reseed an emptied cluster with the point farthest from its centroid.
        int far = 0;
        double far_d = -1.0;
        for (int i = 0; i < n; ++i) {
          const double d =
              (points[i] - run.centroids[run.labels[i]]) * (points[i] - run.centroids[run.labels[i]]);
          if (d > far_d) {
            far_d = d;
            far = i;
          }
        }
        run.centroids[c] = points[far];
        run.labels[far] = c;
        changed = true;
      }
    }
    if (!changed && pass > 0) break;
  }

  run.wcss = 0.0;
  for (int i = 0; i < n; ++i) {
    const double d = points[i] - run.centroids[run.labels[i]];
    run.wcss += d * d;
  }
  return run;
}

}  // namespace

ClusterAssignment cluster_users(const ChannelSet& channels, int clusters, int restarts,
                                Rng& rng) {
  const int n = channels.user_count();
  if (clusters > n) {
    throw ConfigError("cluster_users: more clusters than users");
  }
  std::vector<double> phi(n);
  for (int i = 0; i < n; ++i) {
    phi[i] = normalized_direction(channels.users[i].theta_deg, channels.spacing_ratio);
  }

  KmeansRun best;
  for (int r = 0; r < std::max(1, restarts); ++r) {
    KmeansRun run = lloyd(phi, clusters, rng);
    if (run.wcss < best.wcss) best = std::move(run);
  }

  // Relabel in increasing centroid order.
  std::vector<int> order(clusters);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return best.centroids[a] < best.centroids[b]; });
  std::vector<int> relabel(clusters);
  for (int rank = 0; rank < clusters; ++rank) relabel[order[rank]] = rank;

  ClusterAssignment out;
  out.clusters = clusters;
  out.cluster_of.resize(n);
  for (int i = 0; i < n; ++i) out.cluster_of[i] = relabel[best.labels[i]];
  return out;
}

ClusterAssignment assignment_from_geometry(const ChannelSet& channels) {
  ClusterAssignment out;
  out.clusters = channels.cluster_count();
  out.cluster_of.resize(channels.user_count());
  for (int i = 0; i < channels.user_count(); ++i) {
    out.cluster_of[i] = channels.users[i].cluster;
  }
  return out;
}

std::vector<ComplexVector> average_steering(const ChannelSet& channels,
                                            const ClusterAssignment& assignment) {
  std::vector<ComplexVector> abar(assignment.clusters,
                                  ComplexVector::Zero(channels.antennas));
  std::vector<int> count(assignment.clusters, 0);
  for (int i = 0; i < channels.user_count(); ++i) {
    const int c = assignment.cluster_of[i];
    abar[c] += channels.steering[i];
    ++count[c];
  }
  for (int c = 0; c < assignment.clusters; ++c) {
    if (count[c] > 0) abar[c] /= static_cast<double>(count[c]);
  }
  return abar;
}

std::vector<ComplexVector> average_steering_from_gains(const ChannelSet& channels,
                                                       const ClusterAssignment& assignment,
                                                       int subcarrier) {
  std::vector<ComplexVector> abar(assignment.clusters,
                                  ComplexVector::Zero(channels.antennas));
  std::vector<int> count(assignment.clusters, 0);
  for (int i = 0; i < channels.user_count(); ++i) {
    const int c = assignment.cluster_of[i];
    const ComplexVector g = channels.gain[i].col(subcarrier);
    abar[c] += g / g(0);
    ++count[c];
  }
  for (int c = 0; c < assignment.clusters; ++c) {
    if (count[c] > 0) abar[c] /= static_cast<double>(count[c]);
  }
  return abar;
}

ChannelSet perturb_csi(const ChannelSet& channels, double percent, Rng& rng) {
  if (percent < 0) {
    throw ConfigError("perturb_csi: negative percentage");
  }
  ChannelSet out = channels;
  for (int i = 0; i < out.user_count(); ++i) {
    for (int k = 0; k < out.subcarriers; ++k) {
      Complex e = out.fading[i](k);
      out.fading[i](k) = Complex(disturb(e.real(), percent, rng),
                                 disturb(e.imag(), percent, rng));
    }
    for (int m = 0; m < out.antennas; ++m) {
      Complex a = out.steering[i](m);
      out.steering[i](m) = Complex(disturb(a.real(), percent, rng),
                                   disturb(a.imag(), percent, rng));
    }
    for (int k = 0; k < out.subcarriers; ++k) {
      out.gain[i].col(k) = out.users[i].rho * out.fading[i](k) * out.steering[i];
    }
  }
  return out;
}

std::vector<UserGeometry> band_geometry(const std::vector<double>& centers_deg,
                                        double width_deg, int users_per_cluster, Rng& rng) {
  std::vector<UserGeometry> geometry;
  geometry.reserve(centers_deg.size() * users_per_cluster);
  for (int n = 0; n < static_cast<int>(centers_deg.size()); ++n) {
    for (int q = 0; q < users_per_cluster; ++q) {
      UserGeometry u;
      u.cluster = n;
      u.user = q;
      u.theta_deg = rng.uniform(centers_deg[n] - width_deg / 2.0,
                                centers_deg[n] + width_deg / 2.0);
      geometry.push_back(u);
    }
  }
  return geometry;
}

std::vector<UserGeometry> explicit_geometry(const std::vector<double>& angles_deg,
                                            int clusters) {
  if (clusters <= 0 || angles_deg.size() % clusters != 0) {
    throw ConfigError("explicit_geometry: angle count not divisible by cluster count");
  }
  const int per = static_cast<int>(angles_deg.size()) / clusters;
  std::vector<UserGeometry> geometry;
  geometry.reserve(angles_deg.size());
  for (int i = 0; i < static_cast<int>(angles_deg.size()); ++i) {
    UserGeometry u;
    u.cluster = i / per;
    u.user = i % per;
    u.theta_deg = angles_deg[i];
    geometry.push_back(u);
  }
  return geometry;
}

}  // namespace gfnoma
