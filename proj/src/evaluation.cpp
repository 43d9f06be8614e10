#include "gfnoma/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "gfnoma/scenario.hpp"

namespace gfnoma {

DetectionScore compute_der(const BlockIndexSet& estimated, const BlockIndexSet& truth,
                           int users) {
  DetectionScore score;
  score.false_detections = static_cast<int>(difference_sorted(estimated, truth).size());
  score.missed = static_cast<int>(difference_sorted(truth, estimated).size());
  score.der = static_cast<double>(score.false_detections + score.missed) / users;
  return score;
}

SymbolScore compute_ser(const ComplexMatrix& estimated, const ComplexMatrix& truth,
                        const BlockIndexSet& estimated_support,
                        const BlockIndexSet& true_support, Constellation constellation,
                        double symbol_power, int users, int slots) {
  const auto points = constellation_points(constellation, symbol_power);
  auto demodulate = [&](Complex v) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < static_cast<int>(points.size()); ++i) {
      const double d = std::norm(v - points[i]);
      if (d < best_d) {
        best_d = d;
        best = i;
      }
    }
    return points[best];
  };

  SymbolScore score;
  for (int q : intersect_sorted(estimated_support, true_support)) {
    for (int t = 0; t < slots; ++t) {
      if (std::abs(demodulate(estimated(q, t)) - truth(q, t)) > 1e-9) {
        ++score.symbol_errors;
      }
    }
  }
  const DetectionScore det = compute_der(estimated_support, true_support, users);
  score.ser = det.der + static_cast<double>(score.symbol_errors) / (users * slots);
  return score;
}

PowerScaling derive_powers(const std::vector<double>& snr_db) {
  PowerScaling p;
  p.symbol_power.resize(snr_db.size());
  if (!snr_db.empty() && std::isinf(snr_db[0])) {
    p.noise_power = 0.0;
    for (auto& v : p.symbol_power) v = 1.0;
    return p;
  }
  p.noise_power = std::pow(10.0, -snr_db[0] / 10.0);
  for (size_t n = 0; n < snr_db.size(); ++n) {
    p.symbol_power[n] = std::pow(10.0, snr_db[n] / 10.0) * p.noise_power;
  }
  return p;
}

namespace {

struct TrialSetup {
  EquivalentChannel eqch_rx;             // what the receiver works with
  EquivalentChannel eqch_truth;          // what the frame was made from
  std::vector<ComplexVector> abar;       // receiver-side steering averages
  std::vector<FrameTruth> truth;
  ReceivedFrame frame;
  std::vector<double> symbol_power;      // per cluster
  double noise_power = 0.0;
};

TrialSetup synthesize_trial(const ExperimentConfig& cfg, std::uint64_t sweep_index,
                            std::uint64_t trial_index) {
  const SystemConfig& sys = cfg.system;
  auto stream = [&](Stream s) {
    return Rng(derive_seed(cfg.seed, sweep_index, trial_index, s));
  };

  // Scenario.
  Rng angle_rng = stream(Stream::angles);
  std::vector<UserGeometry> geometry =
      cfg.angles_deg.empty()
          ? band_geometry(cfg.cluster_centers_deg, cfg.cluster_width_deg,
                          sys.users_per_cluster, angle_rng)
          : explicit_geometry(cfg.angles_deg, sys.clusters);
  Rng fading_rng = stream(Stream::fading);
  ChannelSet channels = sample_channels(geometry, sys.antennas, sys.subcarriers,
                                        sys.spacing_ratio, fading_rng);

  // Spreading, shared across clusters.
  std::vector<int> roots = cfg.zc_roots;
  if (roots.empty()) {
    const int needed = (sys.users_per_cluster + sys.subcarriers - 1) / sys.subcarriers;
    roots = default_roots(sys.subcarriers, needed);
  }
  Rng sig_rng = stream(Stream::signatures);
  SignatureSet signatures =
      assign_signatures(sys.subcarriers, sys.users_per_cluster, roots, sig_rng);

  TrialSetup setup;
  setup.eqch_truth = equivalent_channel(channels, signatures);

  const PowerScaling powers = derive_powers(cfg.snr_per_cluster());
  setup.noise_power = powers.noise_power;
  setup.symbol_power = powers.symbol_power;

  // Ground-truth frames.
  const std::vector<int> actives = cfg.actives_per_cluster();
  Rng activity_rng = stream(Stream::activity);
  Rng symbol_rng = stream(Stream::symbols);
  setup.truth.resize(sys.clusters);
  for (int n = 0; n < sys.clusters; ++n) {
    FrameTruth& f = setup.truth[n];
    f.cluster = n;
    f.constellation = cfg.constellation;
    f.symbol_power = setup.symbol_power[n];
    ActivityModel model{actives[n], cfg.activity_rate, cfg.use_activity_rate};
    f.support = draw_activity(sys.users_per_cluster, model, activity_rng);
    f.symbols = modulate(f.support, sys.users_per_cluster, sys.slots, cfg.constellation,
                         f.symbol_power, symbol_rng);
  }
  Rng noise_rng = stream(Stream::noise);
  setup.frame = synthesize_received(setup.eqch_truth, setup.truth, setup.noise_power,
                                    noise_rng);

  // Receiver-side knowledge, optionally perturbed.
  if (cfg.csi_error_pct > 0) {
    Rng csi_rng = stream(Stream::csi);
    ChannelSet perturbed = perturb_csi(channels, cfg.csi_error_pct, csi_rng);
    setup.eqch_rx = equivalent_channel(perturbed, signatures);
    setup.abar = average_steering(perturbed, assignment_from_geometry(perturbed));
  } else {
    setup.eqch_rx = setup.eqch_truth;
    setup.abar = average_steering(channels, assignment_from_geometry(channels));
  }
  return setup;
}

ClusterOutcome score_cluster(const TrialSetup& setup, const ExperimentConfig& cfg, int n,
                             const BlockIndexSet& support, const ComplexMatrix& symbols) {
  ClusterOutcome out;
  const DetectionScore det =
      compute_der(support, setup.truth[n].support, cfg.system.users_per_cluster);
  const SymbolScore sym = compute_ser(symbols, setup.truth[n].symbols, support,
                                      setup.truth[n].support, cfg.constellation,
                                      setup.symbol_power[n], cfg.system.users_per_cluster,
                                      cfg.system.slots);
  out.der = det.der;
  out.ser = sym.ser;
  out.false_detections = det.false_detections;
  out.missed = det.missed;
  out.symbol_errors = sym.symbol_errors;
  return out;
}

}  // namespace

TrialResult run_trial(const ExperimentConfig& cfg, std::uint64_t sweep_index,
                      std::uint64_t trial_index) {
  TrialSetup setup = synthesize_trial(cfg, sweep_index, trial_index);
  ReceiverConfig rx = cfg.rx;
  rx.noise_power = setup.noise_power;

  TrialResult result;
  result.clusters.resize(cfg.system.clusters);
  result.true_support.reserve(cfg.system.clusters);
  for (const FrameTruth& f : setup.truth) result.true_support.push_back(f.support);

  if (cfg.receiver == "oracle_bsp") {
    for (int n = 0; n < cfg.system.clusters; ++n) {
      RecoveryResult r = oracle_blocksp_baseline(
          setup.frame, setup.eqch_rx, n,
          static_cast<int>(setup.truth[n].support.size()), cfg.baseline_antenna,
          rx.asp_iterations);
      result.clusters[n] = score_cluster(setup, cfg, n, r.support, r.symbols);
      result.clusters[n].decided_sparsity = r.decided_sparsity;
      result.recovery.push_back(std::move(r));
    }
    return result;
  }

  std::vector<RecoveryResult> detection = jabfsp(setup.frame, setup.eqch_rx, setup.abar, rx);
  if (cfg.receiver == "jabfsp_ic") {
    std::vector<ComplexMatrix> refined =
        jabfsp_ic(setup.frame, setup.eqch_rx, setup.abar, detection, rx);
    for (int n = 0; n < cfg.system.clusters; ++n) {
      result.clusters[n] =
          score_cluster(setup, cfg, n, detection[n].support, refined[n]);
      result.clusters[n].decided_sparsity = detection[n].decided_sparsity;
      result.clusters[n].fallback_decision = detection[n].fallback_decision;
      detection[n].symbols = refined[n];
    }
  } else {
    for (int n = 0; n < cfg.system.clusters; ++n) {
      result.clusters[n] =
          score_cluster(setup, cfg, n, detection[n].support, detection[n].symbols);
      result.clusters[n].decided_sparsity = detection[n].decided_sparsity;
      result.clusters[n].fallback_decision = detection[n].fallback_decision;
    }
  }
  result.recovery = std::move(detection);
  return result;
}

ExperimentConfig apply_sweep_value(const ExperimentConfig& cfg, const std::string& axis,
                                   double value) {
  ExperimentConfig out = cfg;
  if (axis == "none") return out;
  if (axis == "snr") {
    out.snr_db.assign(1, value);
  } else if (axis == "slots") {
    out.system.slots = static_cast<int>(std::lround(value));
  } else if (axis == "antennas") {
    out.system.antennas = static_cast<int>(std::lround(value));
  } else if (axis == "subcarriers") {
    out.system.subcarriers = static_cast<int>(std::lround(value));
  } else if (axis == "csi") {
    out.csi_error_pct = value;
  } else {
    throw ConfigError("unknown sweep axis: " + axis);
  }
  out.validate();
  return out;
}

SweepTable run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<double> values = cfg.sweep == "none" ? std::vector<double>{0.0}
                                                   : cfg.sweep_values;
  const int workers = cfg.threads > 0
                          ? cfg.threads
                          : std::max(1u, std::thread::hardware_concurrency());

  SweepTable table;
  for (std::uint64_t v = 0; v < values.size(); ++v) {
    const ExperimentConfig point = apply_sweep_value(cfg, cfg.sweep, values[v]);
    std::vector<TrialResult> results(point.trials);

    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&]() {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= point.trials) return;
        try {
          results[i] = run_trial(point, v, static_cast<std::uint64_t>(i));
          results[i].recovery.clear();  // keep only scores; sweeps can be large
          results[i].true_support.clear();
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < std::min(workers, point.trials); ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);

    // Reduce in trial order; the result cannot depend on scheduling.
    const int n_clusters = point.system.clusters;
    std::vector<double> der(n_clusters, 0), ser(n_clusters, 0), f(n_clusters, 0),
        m(n_clusters, 0);
    for (const TrialResult& r : results) {
      for (int n = 0; n < n_clusters; ++n) {
        der[n] += r.clusters[n].der;
        ser[n] += r.clusters[n].ser;
        f[n] += r.clusters[n].false_detections;
        m[n] += r.clusters[n].missed;
      }
    }
    double der_ave = 0, ser_ave = 0, f_ave = 0, m_ave = 0;
    for (int n = 0; n < n_clusters; ++n) {
      der[n] /= point.trials;
      ser[n] /= point.trials;
      f[n] /= point.trials;
      m[n] /= point.trials;
      der_ave += der[n];
      ser_ave += ser[n];
      f_ave += f[n];
      m_ave += m[n];
      table.push_back({cfg.sweep, values[v], cfg.receiver, std::to_string(n + 1), der[n],
                       ser[n], f[n], m[n], point.trials, cfg.seed});
    }
    table.push_back({cfg.sweep, values[v], cfg.receiver, "ave", der_ave / n_clusters,
                     ser_ave / n_clusters, f_ave / n_clusters, m_ave / n_clusters,
                     point.trials, cfg.seed});
  }

  std::sort(table.begin(), table.end(), [](const SweepRow& a, const SweepRow& b) {
    if (a.sweep_param != b.sweep_param) return a.sweep_param < b.sweep_param;
    if (a.sweep_value != b.sweep_value) return a.sweep_value < b.sweep_value;
    if (a.receiver != b.receiver) return a.receiver < b.receiver;
    return a.cluster < b.cluster;
  });
  return table;
}

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

std::string csv_string(const SweepTable& table) {
  std::ostringstream out;
  out << "sweep_param,sweep_value,receiver,cluster,der,ser,f_mean,m_mean,trials,seed\n";
  for (const SweepRow& r : table) {
    out << r.sweep_param << ',' << format_double(r.sweep_value) << ',' << r.receiver << ','
        << r.cluster << ',' << format_double(r.der) << ',' << format_double(r.ser) << ','
        << format_double(r.f_mean) << ',' << format_double(r.m_mean) << ',' << r.trials
        << ',' << r.seed << '\n';
  }
  return out.str();
}

void emit_csv(const SweepTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path);
  out << csv_string(table);
  if (!out) throw ConfigError("write failed: " + path);
}

SweepTable parse_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open csv file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty csv file: " + path);
  SweepTable table;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() != 10) throw ConfigError("csv row with wrong column count");
    SweepRow r;
    r.sweep_param = fields[0];
    r.sweep_value = std::stod(fields[1]);
    r.receiver = fields[2];
    r.cluster = fields[3];
    r.der = std::stod(fields[4]);
    r.ser = std::stod(fields[5]);
    r.f_mean = std::stod(fields[6]);
    r.m_mean = std::stod(fields[7]);
    r.trials = std::stoi(fields[8]);
    r.seed = std::stoull(fields[9]);
    table.push_back(std::move(r));
  }
  return table;
}

}  // namespace gfnoma
