#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>

#include "gfnoma/evaluation.hpp"

using namespace gfnoma;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.system = {4, 2, 10, 12, 5, 0.5};
  cfg.cluster_centers_deg = {-20.0, 15.0};
  cfg.snr_db = {6.0};
  cfg.active_users = {2};
  cfg.rx.s_max = 4;
  cfg.trials = 4;
  cfg.seed = 11;
  cfg.threads = 1;
  return cfg;
}

}  // namespace

TEST_CASE("detection error rate arithmetic") {
  DetectionScore same = compute_der({1, 5, 9}, {1, 5, 9}, 40);
  CHECK(same.der == 0.0);

  DetectionScore mixed = compute_der({1, 5, 9}, {1, 5, 12}, 40);
  CHECK(mixed.false_detections == 1);
  CHECK(mixed.missed == 1);
  CHECK(mixed.der == doctest::Approx(0.05));

  DetectionScore empty = compute_der({}, {0, 1, 2, 3}, 40);
  CHECK(empty.der == doctest::Approx(0.1));
  CHECK(empty.missed == 4);
}

TEST_CASE("symbol error rate arithmetic") {
  const int users = 40, slots = 7;
  Rng rng(5);
  BlockIndexSet support = {3, 17};
  ComplexMatrix truth = modulate(support, users, slots, Constellation::qam16, 1.0, rng);

  SymbolScore perfect = compute_ser(truth, truth, support, support,
                                    Constellation::qam16, 1.0, users, slots);
  CHECK(perfect.ser == 0.0);
  CHECK(perfect.symbol_errors == 0);

  ComplexMatrix damaged = truth;
  damaged(3, 2) = -truth(3, 2);  // lands on a different constellation point
  SymbolScore one = compute_ser(damaged, truth, support, support, Constellation::qam16,
                                1.0, users, slots);
  CHECK(one.symbol_errors == 1);
  CHECK(one.ser == doctest::Approx(1.0 / 280.0));
}

TEST_CASE("ser includes der and noisy estimates demodulate sensibly") {
  const int users = 8, slots = 4;
  Rng rng(6);
  BlockIndexSet truth_support = {1, 4};
  ComplexMatrix truth = modulate(truth_support, users, slots, Constellation::qpsk, 1.0, rng);
  BlockIndexSet est_support = {1, 6};  // one miss, one false alarm
  ComplexMatrix est = truth;
  for (int t = 0; t < slots; ++t) est(1, t) += rng.complex_gaussian(0.01);

  DetectionScore det = compute_der(est_support, truth_support, users);
  SymbolScore sym = compute_ser(est, truth, est_support, truth_support,
                                Constellation::qpsk, 1.0, users, slots);
  CHECK(sym.ser >= det.der);
  CHECK(sym.symbol_errors == 0);  // small perturbations stay in the decision region
}

TEST_CASE("snr accounting: configured ratios are reproduced exactly") {
  PowerScaling p = derive_powers({2.0, 5.0, 3.0});
  REQUIRE(p.symbol_power.size() == 3);
  CHECK(p.symbol_power[0] == doctest::Approx(1.0));
  const std::vector<double> snr = {2.0, 5.0, 3.0};
  for (int n = 0; n < 3; ++n) {
    const double ratio_db = 10.0 * std::log10(p.symbol_power[n] / p.noise_power);
    CHECK(ratio_db == doctest::Approx(snr[n]).epsilon(1e-12));
  }

  PowerScaling clean = derive_powers({std::numeric_limits<double>::infinity()});
  CHECK(clean.noise_power == 0.0);
  CHECK(clean.symbol_power[0] == 1.0);
}

TEST_CASE("run_trial is deterministic and exact without noise") {
  ExperimentConfig cfg = small_config();
  cfg.system.clusters = 1;
  cfg.cluster_centers_deg = {-10.0};
  cfg.snr_db = {std::numeric_limits<double>::infinity()};

  TrialResult a = run_trial(cfg, 0, 0);
  TrialResult b = run_trial(cfg, 0, 0);
  REQUIRE(a.clusters.size() == 1);
  CHECK(a.clusters[0].der == b.clusters[0].der);
  CHECK(a.clusters[0].ser == b.clusters[0].ser);
  CHECK(a.clusters[0].der == 0.0);
  CHECK(a.clusters[0].ser == 0.0);
}

TEST_CASE("single-antenna single-cluster trials match the oracle baseline") {
  ExperimentConfig cfg;
  cfg.system = {1, 1, 20, 20, 7, 0.5};
  cfg.cluster_centers_deg = {0.0};
  cfg.snr_db = {15.0};
  cfg.active_users = {3};
  cfg.rx.s_max = 6;
  cfg.trials = 1;
  cfg.threads = 1;

  ExperimentConfig oracle = cfg;
  oracle.receiver = "oracle_bsp";
  int equal = 0;
  const int trials = 20;
  for (int t = 0; t < trials; ++t) {
    TrialResult a = run_trial(cfg, 0, t);
    TrialResult b = run_trial(oracle, 0, t);
    if (a.clusters[0].der == b.clusters[0].der && a.clusters[0].ser == b.clusters[0].ser) {
      ++equal;
    }
  }
  CHECK(equal >= trials * 9 / 10);
}

TEST_CASE("sweep with one trial equals run_trial") {
  ExperimentConfig cfg = small_config();
  cfg.trials = 1;
  SweepTable table = run_sweep(cfg);
  TrialResult direct = run_trial(cfg, 0, 0);
  REQUIRE(table.size() == 3);  // two clusters + average
  for (const SweepRow& row : table) {
    if (row.cluster == "ave") continue;
    const int n = std::stoi(row.cluster) - 1;
    CHECK(row.der == direct.clusters[n].der);
    CHECK(row.ser == direct.clusters[n].ser);
  }
}

TEST_CASE("sweep output is independent of the worker count") {
  ExperimentConfig cfg = small_config();
  cfg.sweep = "snr";
  cfg.sweep_values = {0.0, 6.0};
  cfg.trials = 6;

  cfg.threads = 1;
  const std::string serial = csv_string(run_sweep(cfg));
  cfg.threads = 4;
  const std::string parallel = csv_string(run_sweep(cfg));
  CHECK(serial == parallel);
}

TEST_CASE("per-cluster rows track unbalanced activity configurations") {
  ExperimentConfig cfg = small_config();
  cfg.active_users = {1, 3};
  cfg.trials = 2;
  SweepTable table = run_sweep(cfg);
  int cluster_rows = 0;
  for (const SweepRow& row : table) {
    if (row.cluster != "ave") ++cluster_rows;
    CHECK(row.ser >= row.der);  // ser includes der by definition
  }
  CHECK(cluster_rows == 2);
}

TEST_CASE("csv emission and parsing round trip") {
  SweepTable table;
  table.push_back({"snr", -2.0, "jabfsp", "1", 0.0125, 0.015625, 0.25, 0.25, 16, 7});
  table.push_back({"snr", -2.0, "jabfsp", "ave", 1.0 / 3.0, 0.5, 0.75, 1.25, 16, 7});

  const std::string path = "/tmp/gfnoma_test_roundtrip.csv";
  emit_csv(table, path);
  SweepTable parsed = parse_csv(path);
  REQUIRE(parsed.size() == table.size());
  for (size_t i = 0; i < table.size(); ++i) {
    CHECK(parsed[i].sweep_param == table[i].sweep_param);
    CHECK(parsed[i].receiver == table[i].receiver);
    CHECK(parsed[i].cluster == table[i].cluster);
    CHECK(parsed[i].der == doctest::Approx(table[i].der).epsilon(1e-9));
    CHECK(parsed[i].ser == doctest::Approx(table[i].ser).epsilon(1e-9));
    CHECK(parsed[i].trials == table[i].trials);
    CHECK(parsed[i].seed == table[i].seed);
  }
  std::remove(path.c_str());
}

TEST_CASE("csv header row is stable and empty tables emit only it") {
  const std::string text = csv_string({});
  CHECK(text == "sweep_param,sweep_value,receiver,cluster,der,ser,f_mean,m_mean,trials,seed\n");
}

TEST_CASE("config text parsing, defaults and validation") {
  const std::string text =
      "antennas = 5\n"
      "clusters = 3\n"
      "users_per_cluster = 40\n"
      "subcarriers = 20\n"
      "slots = 7\n"
      "snr_db = 2 5 3\n"
      "active_users = 5 4 6\n"
      "receiver = jabfsp_ic\n"
      "gamma_threshold = 3\n"
      "sweep = snr\n"
      "sweep_values = -2 0 2 4\n"
      "trials = 10\n"
      "seed = 42\n";
  ExperimentConfig cfg = config_from_text(text);
  CHECK(cfg.system.antennas == 5);
  CHECK(cfg.snr_per_cluster() == std::vector<double>{2, 5, 3});
  CHECK(cfg.actives_per_cluster() == std::vector<int>{5, 4, 6});
  CHECK(cfg.receiver == "jabfsp_ic");
  CHECK(cfg.seed == 42);

  CHECK_THROWS_AS(config_from_text("bogus_key = 1\n"), ConfigError);
  CHECK_THROWS_AS(config_from_text("antennas = 0\n"), ConfigError);
  CHECK_THROWS_AS(config_from_text("sweep = snr\nsweep_values = 2 1\n"), ConfigError);
  CHECK_THROWS_AS(config_from_text("receiver = magic\n"), ConfigError);
}
