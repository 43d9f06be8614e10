#pragma once

#include <utility>
#include <vector>

#include "gfnoma/rng.hpp"
#include "gfnoma/scenario.hpp"
#include "gfnoma/types.hpp"

namespace gfnoma {

/// Constant-modulus spreading signatures, one per user index q; the same
/// set is reused in every cluster.
struct SignatureSet {
  int length = 0;                         // K
  std::vector<ComplexVector> codes;       // per user, length K
  std::vector<std::pair<int, int>> plan;  // (root, shift) per user
};

/// Zadoff-Chu sequence element k (0-based):
///   exp(-j pi root k (k + 1 + 2 shift) / length)  for odd length,
///   exp(-j pi root k (k + 2 shift) / length)      for even length.
/// Phases are reduced in integer arithmetic, so shifts differing by a
/// full period give bit-identical sequences.
ComplexVector zadoff_chu(int length, int root, int shift);

/// Distinct signatures for `users` users: `length` shifts per root, roots
/// taken in order from `roots`, then a seeded random permutation of the
/// generated set. Throws when the budget roots.size()*length < users.
SignatureSet assign_signatures(int length, int users, const std::vector<int>& roots,
                               Rng& rng);

/// The `count` smallest roots coprime to `length`.
std::vector<int> default_roots(int length, int count);

/// Spread channels: per cluster the MK x Q matrix whose subcarrier-k
/// block has columns s_{q,k} * g_{n,q,k}.
struct EquivalentChannel {
  int antennas = 0;
  int subcarriers = 0;
  int users = 0;                      // per cluster
  std::vector<ComplexMatrix> stacked;  // per cluster, (M K) x Q

  int cluster_count() const { return static_cast<int>(stacked.size()); }
  /// M x Q block of cluster n on subcarrier k.
  Eigen::Block<const ComplexMatrix> block(int cluster, int subcarrier) const {
    return stacked[cluster].middleRows(subcarrier * antennas, antennas);
  }
};

EquivalentChannel equivalent_channel(const ChannelSet& channels,
                                     const SignatureSet& signatures);

}  // namespace gfnoma
