#include "gfnoma/spreading.hpp"

#include <cmath>
#include <numeric>

namespace gfnoma {

ComplexVector zadoff_chu(int length, int root, int shift) {
  if (root <= 0 || root >= length || std::gcd(root, length) != 1) {
    throw ConfigError("zadoff_chu: root must be in (0, length) and coprime to length");
  }
  ComplexVector s(length);
  const long long k2 = 2LL * length;  // phase numerator period
  for (int k = 0; k < length; ++k) {
    long long num = (length % 2 == 1)
                        ? static_cast<long long>(root) * k * (k + 1 + 2LL * shift)
                        : static_cast<long long>(root) * k * (k + 2LL * shift);
    num = ((num % k2) + k2) % k2;
    s(k) = std::polar(1.0, -M_PI * static_cast<double>(num) / length);
  }
  return s;
}

std::vector<int> default_roots(int length, int count) {
  std::vector<int> roots;
  for (int r = 1; r < length && static_cast<int>(roots.size()) < count; ++r) {
    if (std::gcd(r, length) == 1) roots.push_back(r);
  }
  return roots;
}

SignatureSet assign_signatures(int length, int users, const std::vector<int>& roots,
                               Rng& rng) {
  if (length <= 0 || users <= 0) {
    throw ConfigError("assign_signatures: length and user count must be positive");
  }
  // Shift indices repeat with period `length`, so each root contributes at
  // most `length` distinct sequences.
  if (static_cast<long long>(roots.size()) * length < users) {
    throw ConfigError("assign_signatures: root list too small for the user count");
  }
  std::vector<std::pair<int, int>> plan;
  plan.reserve(users);
  for (int r = 0; static_cast<int>(plan.size()) < users; ++r) {
    for (int shift = 0; shift < length && static_cast<int>(plan.size()) < users; ++shift) {
      plan.emplace_back(roots[r], shift);
    }
  }
  // Random assignment of the generated set to user indices.
  for (int i = users - 1; i > 0; --i) {
    std::swap(plan[i], plan[rng.uniform_int(i + 1)]);
  }
  SignatureSet set;
  set.length = length;
  set.plan = plan;
  set.codes.reserve(users);
  for (const auto& [root, shift] : plan) {
    set.codes.push_back(zadoff_chu(length, root, shift));
  }
  return set;
}

EquivalentChannel equivalent_channel(const ChannelSet& channels,
                                     const SignatureSet& signatures) {
  if (signatures.length != channels.subcarriers) {
    throw DimensionError("equivalent_channel: signature length != subcarrier count");
  }
  EquivalentChannel eq;
  eq.antennas = channels.antennas;
  eq.subcarriers = channels.subcarriers;
  const int clusters = channels.cluster_count();
  eq.stacked.reserve(clusters);
  for (int n = 0; n < clusters; ++n) {
    const auto members = channels.cluster_members(n);
    if (static_cast<int>(members.size()) > static_cast<int>(signatures.codes.size())) {
      throw DimensionError("equivalent_channel: cluster larger than signature set");
    }
    ComplexMatrix g(eq.antennas * eq.subcarriers, members.size());
    for (int q = 0; q < static_cast<int>(members.size()); ++q) {
      const int u = members[q];
      for (int k = 0; k < eq.subcarriers; ++k) {
        g.block(k * eq.antennas, q, eq.antennas, 1) =
            signatures.codes[q](k) * channels.gain[u].col(k);
      }
    }
    eq.users = static_cast<int>(members.size());
    eq.stacked.push_back(std::move(g));
  }
  return eq;
}

}  // namespace gfnoma
