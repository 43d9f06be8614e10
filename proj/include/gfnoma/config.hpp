#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gfnoma/recovery.hpp"
#include "gfnoma/transceiver.hpp"
#include "gfnoma/types.hpp"

namespace gfnoma {

struct SystemConfig {
  int antennas = 5;
  int clusters = 3;
  int users_per_cluster = 40;
  int subcarriers = 20;
  int slots = 7;
  double spacing_ratio = 0.5;
};

/// One experiment as described by a config file; CLI flags override
/// individual fields after parsing.
struct ExperimentConfig {
  SystemConfig system;

  // scenario
  std::vector<double> cluster_centers_deg = {-30.0, -10.0, 10.0};
  double cluster_width_deg = 5.0;
  std::vector<double> angles_deg;  // optional explicit angles, cluster-major
  double csi_error_pct = 0.0;
  int kmeans_restarts = 10;

  // traffic; per-cluster lists broadcast from single values
  std::vector<double> snr_db = {2.0};
  std::vector<int> active_users = {4};
  double activity_rate = 0.1;
  bool use_activity_rate = false;
  Constellation constellation = Constellation::qam16;

  // receiver
  std::string receiver = "jabfsp";  // jabfsp | jabfsp_ic | oracle_bsp
  ReceiverConfig rx;
  int baseline_antenna = 0;

  // spreading
  std::vector<int> zc_roots;  // empty: smallest coprime roots

  // experiment
  std::string sweep = "none";  // none | snr | slots | antennas | subcarriers | csi
  std::vector<double> sweep_values;
  int trials = 100;
  std::uint64_t seed = 1;
  int threads = 0;  // 0: hardware concurrency

  std::vector<double> snr_per_cluster() const;     // broadcast to N entries
  std::vector<int> actives_per_cluster() const;    // broadcast to N entries
  void validate() const;                           // throws ConfigError
};

/// Flat key = value file; '#' starts a comment, lists are whitespace
/// separated. Unknown keys are rejected.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig config_from_text(const std::string& text);

}  // namespace gfnoma
