#pragma once

#include <string_view>
#include <vector>

#include "gfnoma/rng.hpp"
#include "gfnoma/spreading.hpp"
#include "gfnoma/types.hpp"

namespace gfnoma {

enum class Constellation { bpsk, qpsk, qam16 };

Constellation constellation_from_name(std::string_view name);
std::string constellation_name(Constellation c);

/// Alphabet scaled to average power `power`.
std::vector<Complex> constellation_points(Constellation c, double power);

/// Either a fixed number of active users per frame (default) or
/// independent Bernoulli activity at `rate`.
struct ActivityModel {
  int count = 4;
  double rate = 0.1;
  bool use_rate = false;
};

/// Ground truth for one cluster and one frame: the active-user set is
/// constant over all slots and rows outside it are exactly zero.
struct FrameTruth {
  int cluster = 0;
  BlockIndexSet support;
  ComplexMatrix symbols;  // Q x T
  Constellation constellation = Constellation::qam16;
  double symbol_power = 1.0;
};

struct ReceivedFrame {
  ComplexMatrix samples;  // (M K) x T, subcarrier blocks of M rows
  double noise_power = 0.0;
  std::vector<double> snr_db;  // per cluster, bookkeeping
};

/// Uniformly random support of the configured size (or Bernoulli draws);
/// fixed for the whole frame.
BlockIndexSet draw_activity(int users, const ActivityModel& model, Rng& rng);

/// Active rows filled with i.i.d. constellation symbols at the given
/// average power, inactive rows zero.
ComplexMatrix modulate(const BlockIndexSet& support, int users, int slots,
                       Constellation c, double power, Rng& rng);

/// Y = sum_n G_n X_n + V with i.i.d. circular complex Gaussian noise of
/// variance noise_power per entry.
ReceivedFrame synthesize_received(const EquivalentChannel& eqch,
                                  const std::vector<FrameTruth>& frames,
                                  double noise_power, Rng& rng);

}  // namespace gfnoma
