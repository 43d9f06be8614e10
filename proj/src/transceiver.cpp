#include "gfnoma/transceiver.hpp"

#include <cmath>

namespace gfnoma {

Constellation constellation_from_name(std::string_view name) {
  if (name == "bpsk") return Constellation::bpsk;
  if (name == "qpsk") return Constellation::qpsk;
  if (name == "16qam" || name == "qam16") return Constellation::qam16;
  throw ConfigError("unknown constellation: " + std::string(name));
}

std::string constellation_name(Constellation c) {
  switch (c) {
    case Constellation::bpsk: return "bpsk";
    case Constellation::qpsk: return "qpsk";
    case Constellation::qam16: return "16qam";
  }
  return "?";
}

std::vector<Complex> constellation_points(Constellation c, double power) {
  const double s = std::sqrt(power);
  std::vector<Complex> pts;
  switch (c) {
    case Constellation::bpsk:
      pts = {Complex(1, 0), Complex(-1, 0)};
      break;
    case Constellation::qpsk: {
      const double u = 1.0 / std::sqrt(2.0);
      pts = {Complex(u, u), Complex(u, -u), Complex(-u, u), Complex(-u, -u)};
      break;
    }
    case Constellation::qam16: {
      // Gray-mapped square constellation, unit average power.
      const double u = 1.0 / std::sqrt(10.0);
      for (double re : {-3.0, -1.0, 1.0, 3.0}) {
        for (double im : {-3.0, -1.0, 1.0, 3.0}) {
          pts.emplace_back(re * u, im * u);
        }
      }
      break;
    }
  }
  for (auto& p : pts) p *= s;
  return pts;
}

BlockIndexSet draw_activity(int users, const ActivityModel& model, Rng& rng) {
  BlockIndexSet support;
  if (model.use_rate) {
    for (int q = 0; q < users; ++q) {
      if (rng.uniform() < model.rate) support.push_back(q);
    }
    return support;
  }
  if (model.count > users || model.count < 0) {
    throw ConfigError("draw_activity: active count outside [0, users]");
  }
  // Partial Fisher-Yates, then sort.
  std::vector<int> pool(users);
  for (int q = 0; q < users; ++q) pool[q] = q;
  for (int i = 0; i < model.count; ++i) {
    std::swap(pool[i], pool[i + rng.uniform_int(users - i)]);
  }
  support.assign(pool.begin(), pool.begin() + model.count);
  std::sort(support.begin(), support.end());
  return support;
}

ComplexMatrix modulate(const BlockIndexSet& support, int users, int slots,
                       Constellation c, double power, Rng& rng) {
  const auto points = constellation_points(c, power);
  ComplexMatrix x = ComplexMatrix::Zero(users, slots);
  for (int q : support) {
    if (q < 0 || q >= users) {
      throw DimensionError("modulate: support index out of range");
    }
    for (int t = 0; t < slots; ++t) {
      x(q, t) = points[rng.uniform_int(static_cast<int>(points.size()))];
    }
  }
  return x;
}

ReceivedFrame synthesize_received(const EquivalentChannel& eqch,
                                  const std::vector<FrameTruth>& frames,
                                  double noise_power, Rng& rng) {
  if (static_cast<int>(frames.size()) != eqch.cluster_count()) {
    throw DimensionError("synthesize_received: frame count != cluster count");
  }
  const int rows = eqch.antennas * eqch.subcarriers;
  int slots = 0;
  for (const auto& f : frames) {
    if (f.symbols.rows() != eqch.users) {
      throw DimensionError("synthesize_received: symbol rows != users per cluster");
    }
    if (slots == 0) slots = static_cast<int>(f.symbols.cols());
    if (f.symbols.cols() != slots) {
      throw DimensionError("synthesize_received: slot count differs between clusters");
    }
  }
  ReceivedFrame out;
  out.noise_power = noise_power;
  out.samples = ComplexMatrix::Zero(rows, slots);
  for (int n = 0; n < eqch.cluster_count(); ++n) {
    out.samples += eqch.stacked[n] * frames[n].symbols;
  }
  for (int t = 0; t < slots; ++t) {
    for (int r = 0; r < rows; ++r) {
      out.samples(r, t) += rng.complex_gaussian(noise_power);
    }
  }
  return out;
}

}  // namespace gfnoma
