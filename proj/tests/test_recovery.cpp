#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/QR>
#include <cmath>

#include "gfnoma/numerics.hpp"
#include "gfnoma/recovery.hpp"

using namespace gfnoma;

namespace {

struct Trial {
  EquivalentChannel eqch;
  std::vector<ComplexVector> abar;
  std::vector<FrameTruth> truth;
  ReceivedFrame frame;
};

// One synthesized frame: `clusters` bands around the usual centers.
Trial make_trial(int antennas, int subcarriers, int slots, int users, int actives,
                 int clusters, double noise_power, std::uint64_t seed) {
  Trial t;
  std::vector<double> centers;
  for (int c = 0; c < clusters; ++c) centers.push_back(-30.0 + 20.0 * c);
  Rng geo(mix_seed(seed, 1));
  auto geometry = band_geometry(centers, 5.0, users, geo);
  Rng ch(mix_seed(seed, 2));
  ChannelSet channels = sample_channels(geometry, antennas, subcarriers, 0.5, ch);
  Rng sig(mix_seed(seed, 3));
  SignatureSet sigs =
      assign_signatures(subcarriers, users, default_roots(subcarriers, (users + subcarriers - 1) / subcarriers), sig);
  t.eqch = equivalent_channel(channels, sigs);
  t.abar = average_steering(channels, assignment_from_geometry(channels));

  Rng act(mix_seed(seed, 4));
  Rng sym(mix_seed(seed, 5));
  t.truth.resize(clusters);
  for (int n = 0; n < clusters; ++n) {
    t.truth[n].cluster = n;
    t.truth[n].support = draw_activity(users, {actives, 0.1, false}, act);
    t.truth[n].symbols =
        modulate(t.truth[n].support, users, slots, Constellation::qam16, 1.0, sym);
  }
  Rng noise(mix_seed(seed, 6));
  t.frame = synthesize_received(t.eqch, t.truth, noise_power, noise);
  return t;
}

Measurement sbf_measurement(const Trial& t, int cluster, double esnr_db = 13.0) {
  std::vector<double> alpha(t.eqch.cluster_count(), 0.1);
  BeamWeight w = sbf_weight(t.eqch, cluster, alpha, esnr_db, t.abar[cluster]);
  return build_measurement(t.frame.samples, t.eqch, w);
}

ComplexMatrix explicit_block_matrix(const ComplexMatrix& beam_gain, int slots) {
  const int k = static_cast<int>(beam_gain.rows());
  const int q = static_cast<int>(beam_gain.cols());
  ComplexMatrix d = ComplexMatrix::Zero(k * slots, q * slots);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < q; ++j)
      d.block(i * slots, j * slots, slots, slots) =
          beam_gain(i, j) * ComplexMatrix::Identity(slots, slots);
  return d;
}

ComplexMatrix columns_of(const ComplexMatrix& m, const BlockIndexSet& idx) {
  ComplexMatrix out(m.rows(), idx.size());
  for (int i = 0; i < static_cast<int>(idx.size()); ++i) out.col(i) = m.col(idx[i]);
  return out;
}

}  // namespace

TEST_CASE("find_top basics and sort oracle") {
  RealVector v(3);
  v << 3, 1, 2;
  CHECK(find_top(v, 2) == BlockIndexSet{0, 2});

  RealVector equal = RealVector::Ones(4);
  CHECK(find_top(equal, 2) == BlockIndexSet{0, 1});  // ties to the lowest index

  CHECK(find_top(v, 0).empty());
  CHECK_THROWS_AS(find_top(v, 4), DimensionError);

  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + rng.uniform_int(20);
    RealVector vals(n);
    for (int i = 0; i < n; ++i) vals(i) = rng.gaussian();
    const int zeta = 1 + rng.uniform_int(n);
    BlockIndexSet top = find_top(vals, zeta);
    // Oracle: full sort of the values.
    std::vector<double> sorted(vals.data(), vals.data() + n);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double worst_selected = 1e300;
    for (int i : top) worst_selected = std::min(worst_selected, vals(i));
    CHECK(worst_selected >= sorted[zeta - 1] - 1e-15);
  }
}

TEST_CASE("ls on the true support of a clean frame is exact") {
  Trial t = make_trial(4, 12, 5, 10, 3, 1, 0.0, 100);
  Measurement meas = sbf_measurement(t, 0);
  ComplexMatrix x = ls_on_support(meas, t.truth[0].support);
  CHECK((x - t.truth[0].symbols).cwiseAbs().maxCoeff() < 1e-9);

  CHECK(ls_on_support(meas, {}).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("ls matches a dense solve of the explicit block system") {
  Trial t = make_trial(4, 10, 4, 8, 3, 2, 0.2, 200);
  Measurement meas = sbf_measurement(t, 1);
  BlockIndexSet support = {1, 4, 6};
  ComplexMatrix x = ls_on_support(meas, support);

  ComplexMatrix d = explicit_block_matrix(meas.beam_gain, meas.slots);
  // Select the block columns of the support.
  ComplexMatrix d_sel(d.rows(), support.size() * meas.slots);
  for (int i = 0; i < static_cast<int>(support.size()); ++i) {
    d_sel.middleCols(i * meas.slots, meas.slots) =
        d.middleCols(support[i] * meas.slots, meas.slots);
  }
  ComplexVector c = d_sel.colPivHouseholderQr().solve(meas.combined);
  for (int i = 0; i < static_cast<int>(support.size()); ++i) {
    ComplexVector row = c.segment(i * meas.slots, meas.slots);
    CHECK((x.row(support[i]).transpose() - row).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("asp recovers clean single-cluster frames with known sparsity") {
  int exact = 0;
  const int trials = 60;
  for (int trial = 0; trial < trials; ++trial) {
    Trial t = make_trial(5, 20, 7, 40, 4, 1, 0.0, 300 + trial);
    Measurement meas = sbf_measurement(t, 0);
    AspResult a = asp(meas, {}, meas.combined, 4, 10);
    if (a.support == t.truth[0].support &&
        (a.symbols - t.truth[0].symbols).cwiseAbs().maxCoeff() < 1e-8) {
      ++exact;
    }
  }
  CHECK(exact >= trials - 1);
}

TEST_CASE("asp warm-started at the true support converges immediately") {
  Trial t = make_trial(5, 20, 7, 40, 4, 1, 0.0, 400);
  Measurement meas = sbf_measurement(t, 0);
  AspResult a = asp(meas, t.truth[0].support, meas.combined, 4, 10);
  CHECK(a.support == t.truth[0].support);
  CHECK(a.residual.norm() < 1e-9);
}

TEST_CASE("asp with full sparsity equals the full least squares") {
  Trial t = make_trial(4, 12, 3, 6, 2, 1, 0.3, 500);
  Measurement meas = sbf_measurement(t, 0);
  AspResult a = asp(meas, {}, meas.combined, 6, 10);
  BlockIndexSet all = {0, 1, 2, 3, 4, 5};
  ComplexMatrix direct = ls_on_support(meas, all);
  CHECK(a.support == all);
  CHECK((a.symbols - direct).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("asp selection matches exhaustive least squares at small scale") {
  // All C(8,2) supports enumerated, clean frame: the minimum-residual
  // support must be the one asp picks.
  for (int trial = 0; trial < 40; ++trial) {
    Trial t = make_trial(3, 8, 2, 8, 2, 1, 0.0, 600 + trial);
    Measurement meas = sbf_measurement(t, 0);
    AspResult a = asp(meas, {}, meas.combined, 2, 10);

    double best_energy = 1e300;
    BlockIndexSet best;
    for (int i = 0; i < 8; ++i) {
      for (int j = i + 1; j < 8; ++j) {
        BlockIndexSet cand = {i, j};
        ComplexMatrix d = explicit_block_matrix(columns_of(meas.beam_gain, cand), meas.slots);
        ComplexVector c = d.colPivHouseholderQr().solve(meas.combined);
        const double e = (meas.combined - d * c).squaredNorm();
        if (e < best_energy) {
          best_energy = e;
          best = cand;
        }
      }
    }
    CHECK(a.support == best);
  }
}

TEST_CASE("tpr definition and sentinels") {
  ComplexMatrix x = ComplexMatrix::Zero(4, 2);
  x.row(0) << Complex(2, 0), Complex(0, 0);  // energy 4
  x.row(2) << Complex(1, 0), Complex(0, 0);  // energy 1
  CHECK(tpr(x, {0}) == 1.0);
  CHECK(tpr(x, {0, 2}) == 4.0);
  CHECK(std::isinf(tpr(x, {0, 1})));  // zero-energy supported row
  CHECK(std::isinf(tpr(x, {})));
}

TEST_CASE("tpr is exactly one for equal-power exact recovery") {
  ComplexMatrix equal = ComplexMatrix::Zero(10, 6);
  BlockIndexSet support = {1, 4, 7};
  for (int q : support) equal.row(q).setConstant(Complex(0.5, 0.5));
  CHECK(tpr(equal, support) == 1.0);

  // Constant-modulus symbols recovered exactly keep equal row energies.
  Trial t = make_trial(4, 12, 6, 10, 3, 1, 0.0, 700);
  Rng sym(701);
  ComplexMatrix qpsk = modulate(t.truth[0].support, 10, 6, Constellation::qpsk, 1.0, sym);
  std::vector<FrameTruth> truth = t.truth;
  truth[0].symbols = qpsk;
  Rng noise(702);
  ReceivedFrame frame = synthesize_received(t.eqch, truth, 0.0, noise);
  std::vector<double> alpha(1, 0.1);
  BeamWeight w = sbf_weight(t.eqch, 0, alpha, 13.0, t.abar[0]);
  Measurement meas = build_measurement(frame.samples, t.eqch, w);
  ComplexMatrix x = ls_on_support(meas, t.truth[0].support);
  CHECK(std::abs(tpr(x, t.truth[0].support) - 1.0) < 1e-9);
}

TEST_CASE("sparsity decision rule and fallback") {
  auto record = [](double energy, double ratio) {
    SparsityRecord r;
    r.residual_energy = energy;
    r.tpr_value = ratio;
    return r;
  };
  std::vector<SparsityRecord> recs = {record(9, 1.2), record(4, 1.1), record(1, 8.0)};
  SparsityDecision d = decide_sparsity(recs, 3.0);
  CHECK(d.sparsity == 2);
  CHECK(!d.fallback);

  std::vector<SparsityRecord> falling = {record(9, 1.2), record(4, 1.1), record(1, 1.3)};
  CHECK(decide_sparsity(falling, 3.0).sparsity == 3);

  std::vector<SparsityRecord> rejected = {record(9, 5.0), record(4, 7.0), record(1, 9.0)};
  d = decide_sparsity(rejected, 3.0);
  CHECK(d.sparsity == 3);
  CHECK(d.fallback);

  // Ties break toward the smaller sparsity.
  std::vector<SparsityRecord> tie = {record(2, 1.0), record(2, 1.0)};
  CHECK(decide_sparsity(tie, 3.0).sparsity == 1);

  // Every hypothesis failed: sparsity 0 with the fallback flag set.
  SparsityRecord broken;
  broken.failed = true;
  std::vector<SparsityRecord> dead = {broken, broken};
  SparsityDecision none = decide_sparsity(dead, 3.0);
  CHECK(none.sparsity == 0);
  CHECK(none.fallback);
}

TEST_CASE("a gainless measurement raises a rank error for the caller") {
  Measurement meas;
  meas.slots = 3;
  meas.beam_gain = ComplexMatrix::Zero(6, 5);
  meas.combined = ComplexVector::Ones(18);
  CHECK_THROWS_AS(ls_on_support(meas, {0, 1}), RankError);
  CHECK_THROWS_AS(asp(meas, {}, meas.combined, 2, 5), RankError);
}

TEST_CASE("estimation error identities on constructed supports") {
  Trial t = make_trial(5, 16, 4, 12, 3, 1, 0.0, 800);
  Measurement meas = sbf_measurement(t, 0);
  const BlockIndexSet truth = t.truth[0].support;

  // (a) Support equal to the truth, no interference-plus-noise: exact.
  ComplexMatrix exact = ls_on_support(meas, truth);
  CHECK((exact - t.truth[0].symbols).cwiseAbs().maxCoeff() < 1e-9);

  // (b) Strict superset: true rows exact, extra rows exactly zero.
  BlockIndexSet superset = truth;
  for (int q = 0; q < 12 && static_cast<int>(superset.size()) < 5; ++q) {
    if (!contains(truth, q)) superset.push_back(q);
  }
  std::sort(superset.begin(), superset.end());
  ComplexMatrix over = ls_on_support(meas, superset);
  for (int q : truth) {
    CHECK((over.row(q) - t.truth[0].symbols.row(q)).cwiseAbs().maxCoeff() < 1e-8);
  }
  for (int q : difference_sorted(superset, truth)) {
    CHECK(over.row(q).cwiseAbs().maxCoeff() < 1e-8);
  }

  // (c) The block pseudo-inverse pieces built from the detected and the
  // falsely included columns satisfy W^H D[extra] = I.
  const BlockIndexSet extra = difference_sorted(superset, truth);
  ComplexMatrix d_detected =
      explicit_block_matrix(columns_of(meas.beam_gain, truth), meas.slots);
  ComplexMatrix d_extra =
      explicit_block_matrix(columns_of(meas.beam_gain, extra), meas.slots);
  auto bp = block_pinv(d_detected, d_extra);
  ComplexMatrix prod = bp.bottom * d_extra;
  CHECK((prod - ComplexMatrix::Identity(prod.rows(), prod.cols())).cwiseAbs().maxCoeff() <
        1e-9);
}

TEST_CASE("jabfsp without interference matches a fixed-beam sparsity search") {
  int agree = 0;
  const int trials = 30;
  ReceiverConfig cfg;
  cfg.s_max = 6;
  cfg.noise_power = -1;
  for (int trial = 0; trial < trials; ++trial) {
    Trial t = make_trial(5, 20, 7, 20, 3, 1, 0.05, 900 + trial);
    cfg.noise_power = 0.05;
    auto results = jabfsp(t.frame, t.eqch, t.abar, cfg);

    // Plain adaptive-sparsity block subspace pursuit: fixed combining at
    // the average steering direction, no weight updates.
    BeamWeight fixed = make_beam_weight(0, t.abar[0], t.abar[0]);
    Measurement meas = build_measurement(t.frame.samples, t.eqch, fixed);
    std::vector<SparsityRecord> recs;
    BlockIndexSet warm;
    for (int s = 1; s <= cfg.s_max; ++s) {
      SparsityRecord r;
      AspResult a = asp(meas, warm, meas.combined, s, cfg.asp_iterations);
      r.residual_energy = a.residual.squaredNorm();
      r.support = a.support;
      r.symbols = a.symbols;
      r.tpr_value = tpr(a.symbols, a.support);
      warm = a.support;
      recs.push_back(std::move(r));
    }
    SparsityDecision d = decide_sparsity(recs, cfg.tpr_threshold);
    if (results[0].support == recs[d.sparsity - 1].support) ++agree;
  }
  CHECK(agree >= trials * 95 / 100);
}

TEST_CASE("jabfsp is deterministic") {
  Trial t = make_trial(5, 20, 7, 40, 4, 3, 0.1, 1000);
  ReceiverConfig cfg;
  cfg.noise_power = 0.1;
  auto r1 = jabfsp(t.frame, t.eqch, t.abar, cfg);
  auto r2 = jabfsp(t.frame, t.eqch, t.abar, cfg);
  for (int n = 0; n < 3; ++n) {
    CHECK(r1[n].support == r2[n].support);
    CHECK((r1[n].symbols - r2[n].symbols).cwiseAbs().maxCoeff() == 0.0);
    CHECK(r1[n].residual_energy == r2[n].residual_energy);
  }
}

TEST_CASE("jabfsp smoke run on the reference configuration") {
  int detected = 0, total = 0;
  ReceiverConfig cfg;
  for (int trial = 0; trial < 10; ++trial) {
    const double sigma2 = std::pow(10.0, -2.0 / 10.0);  // 2 dB
    Trial t = make_trial(5, 20, 7, 40, 4, 3, sigma2, 1100 + trial);
    cfg.noise_power = sigma2;
    auto results = jabfsp(t.frame, t.eqch, t.abar, cfg);
    for (int n = 0; n < 3; ++n) {
      total += 1;
      if (results[n].support == t.truth[n].support) ++detected;
    }
  }
  CHECK(detected >= total * 7 / 10);  // coarse regression guard
}

TEST_CASE("rows off the estimated support are exactly zero") {
  Trial t = make_trial(5, 20, 7, 40, 4, 3, 0.2, 1200);
  ReceiverConfig cfg;
  cfg.noise_power = 0.2;
  auto results = jabfsp(t.frame, t.eqch, t.abar, cfg);
  for (const auto& r : results) {
    for (int q = 0; q < 40; ++q) {
      if (!contains(r.support, q)) {
        CHECK(r.symbols.row(q).cwiseAbs().maxCoeff() == 0.0);
      }
    }
    CHECK(static_cast<int>(r.support.size()) == r.decided_sparsity);
    CHECK(r.decided_sparsity <= cfg.s_max);
  }
}

TEST_CASE("interference cancellation is a fixed point at the exact truth") {
  Trial t = make_trial(5, 12, 5, 8, 2, 2, 0.0, 1300);
  std::vector<RecoveryResult> init(2);
  for (int n = 0; n < 2; ++n) {
    init[n].cluster = n;
    init[n].support = t.truth[n].support;
    init[n].symbols = t.truth[n].symbols;
    init[n].residual_energy = 0.0;
  }
  ReceiverConfig cfg;
  cfg.noise_power = 0.0;
  auto refined = jabfsp_ic(t.frame, t.eqch, t.abar, init, cfg);
  for (int n = 0; n < 2; ++n) {
    CHECK((refined[n] - t.truth[n].symbols).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("single-cluster cancellation reduces to plain refinement") {
  Trial t = make_trial(4, 12, 5, 8, 2, 1, 0.1, 1400);
  ReceiverConfig cfg;
  cfg.noise_power = 0.1;
  auto results = jabfsp(t.frame, t.eqch, t.abar, cfg);
  auto refined = jabfsp_ic(t.frame, t.eqch, t.abar, results, cfg);
  REQUIRE(refined.size() == 1);
  // Refinement keeps the support: rows off it stay zero.
  for (int q = 0; q < 8; ++q) {
    if (!contains(results[0].support, q)) {
      CHECK(refined[0].row(q).cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("oracle baseline equals asp on the single-antenna measurement") {
  Trial t = make_trial(5, 20, 7, 40, 4, 1, 0.0, 1500);
  RecoveryResult base = oracle_blocksp_baseline(t.frame, t.eqch, 0, 4, 0, 10);
  CHECK(base.support == t.truth[0].support);
  CHECK((base.symbols - t.truth[0].symbols).cwiseAbs().maxCoeff() < 1e-8);

  ComplexVector e = ComplexVector::Zero(5);
  e(0) = Complex(1, 0);
  BeamWeight w = make_beam_weight(0, e, e);
  Measurement meas = build_measurement(t.frame.samples, t.eqch, w);
  AspResult a = asp(meas, {}, meas.combined, 4, 10);
  CHECK(a.support == base.support);
  CHECK((a.symbols - base.symbols).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("baseline facing interference does worse than the joint receiver") {
  int baseline_errors = 0, joint_errors = 0;
  ReceiverConfig cfg;
  for (int trial = 0; trial < 15; ++trial) {
    const double sigma2 = std::pow(10.0, -2.0 / 10.0);
    Trial t = make_trial(5, 20, 7, 40, 4, 3, sigma2, 1600 + trial);
    cfg.noise_power = sigma2;
    auto joint = jabfsp(t.frame, t.eqch, t.abar, cfg);
    for (int n = 0; n < 3; ++n) {
      RecoveryResult base = oracle_blocksp_baseline(t.frame, t.eqch, n, 4, 0, 10);
      baseline_errors += static_cast<int>(difference_sorted(base.support, t.truth[n].support).size() +
                                          difference_sorted(t.truth[n].support, base.support).size());
      joint_errors += static_cast<int>(difference_sorted(joint[n].support, t.truth[n].support).size() +
                                       difference_sorted(t.truth[n].support, joint[n].support).size());
    }
  }
  CHECK(baseline_errors >= joint_errors);
}
