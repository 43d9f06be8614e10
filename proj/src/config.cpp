#include "gfnoma/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace gfnoma {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::map<std::string, std::string> parse_kv(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

double parse_double(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw ConfigError("bad number: " + s);
  return v;
}

int parse_int(const std::string& s) {
  size_t used = 0;
  const long v = std::stol(s, &used);
  if (used != s.size()) throw ConfigError("bad integer: " + s);
  return static_cast<int>(v);
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(parse_double(tok));
  return out;
}

std::vector<int> parse_ints(const std::string& s) {
  std::vector<int> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(parse_int(tok));
  return out;
}

}  // namespace

std::vector<double> ExperimentConfig::snr_per_cluster() const {
  if (static_cast<int>(snr_db.size()) == system.clusters) return snr_db;
  if (snr_db.size() == 1) return std::vector<double>(system.clusters, snr_db[0]);
  throw ConfigError("snr_db must list one value or one per cluster");
}

std::vector<int> ExperimentConfig::actives_per_cluster() const {
  if (static_cast<int>(active_users.size()) == system.clusters) return active_users;
  if (active_users.size() == 1) return std::vector<int>(system.clusters, active_users[0]);
  throw ConfigError("active_users must list one value or one per cluster");
}

void ExperimentConfig::validate() const {
  if (system.antennas < 1 || system.clusters < 1 || system.users_per_cluster < 1 ||
      system.subcarriers < 1 || system.slots < 1) {
    throw ConfigError("system dimensions must be positive");
  }
  if (system.spacing_ratio <= 0) throw ConfigError("spacing_ratio must be positive");
  if (static_cast<int>(cluster_centers_deg.size()) != system.clusters &&
      angles_deg.empty()) {
    throw ConfigError("cluster_centers_deg must list one center per cluster");
  }
  if (angles_deg.empty()) {
    for (double c : cluster_centers_deg) {
      if (std::abs(c) + cluster_width_deg / 2.0 >= 90.0) {
        throw ConfigError("cluster band reaches beyond +-90 degrees");
      }
    }
  }
  if (!angles_deg.empty()) {
    if (static_cast<int>(angles_deg.size()) != system.clusters * system.users_per_cluster) {
      throw ConfigError("angles_deg must list clusters*users_per_cluster angles");
    }
    for (double a : angles_deg) {
      if (std::abs(a) >= 90.0) throw ConfigError("angles_deg must lie inside (-90, 90)");
    }
  }
  const auto snr = snr_per_cluster();
  const bool any_inf = std::any_of(snr.begin(), snr.end(),
                                   [](double v) { return std::isinf(v); });
  if (any_inf && !std::all_of(snr.begin(), snr.end(),
                              [](double v) { return std::isinf(v) && v > 0; })) {
    throw ConfigError("snr_db: infinite (noiseless) SNR must apply to every cluster");
  }
  for (int s : actives_per_cluster()) {
    if (s < 0 || s > system.users_per_cluster) {
      throw ConfigError("active_users must lie in [0, users_per_cluster]");
    }
  }
  if (activity_rate < 0 || activity_rate > 1) {
    throw ConfigError("activity_rate must lie in [0, 1]");
  }
  if (receiver != "jabfsp" && receiver != "jabfsp_ic" && receiver != "oracle_bsp") {
    throw ConfigError("unknown receiver: " + receiver);
  }
  if (rx.s_max < 1 || rx.asp_iterations < 1 || rx.ic_rounds < 0 || rx.ic_inner < 1 ||
      rx.max_alternations < 1) {
    throw ConfigError("receiver iteration limits must be positive");
  }
  if (rx.tpr_threshold < 1.0) throw ConfigError("gamma_threshold must be at least 1");
  if (baseline_antenna < 0 || baseline_antenna >= system.antennas) {
    throw ConfigError("baseline_antenna out of range");
  }
  if (csi_error_pct < 0) throw ConfigError("csi_error_pct must be non-negative");
  if (sweep != "none" && sweep != "snr" && sweep != "slots" && sweep != "antennas" &&
      sweep != "subcarriers" && sweep != "csi") {
    throw ConfigError("unknown sweep axis: " + sweep);
  }
  if (sweep != "none") {
    if (sweep_values.empty()) throw ConfigError("sweep_values is empty");
    for (size_t i = 1; i < sweep_values.size(); ++i) {
      if (sweep_values[i] <= sweep_values[i - 1]) {
        throw ConfigError("sweep_values must be strictly increasing");
      }
    }
  }
  if (trials < 1) throw ConfigError("trials must be positive");
  if (threads < 0) throw ConfigError("threads must be non-negative");
}

ExperimentConfig config_from_text(const std::string& text) {
  ExperimentConfig cfg;
  for (const auto& [key, value] : parse_kv(text)) {
    if (key == "antennas") cfg.system.antennas = parse_int(value);
    else if (key == "clusters") cfg.system.clusters = parse_int(value);
    else if (key == "users_per_cluster") cfg.system.users_per_cluster = parse_int(value);
    else if (key == "subcarriers") cfg.system.subcarriers = parse_int(value);
    else if (key == "slots") cfg.system.slots = parse_int(value);
    else if (key == "spacing_ratio") cfg.system.spacing_ratio = parse_double(value);
    else if (key == "cluster_centers_deg") cfg.cluster_centers_deg = parse_doubles(value);
    else if (key == "cluster_width_deg") cfg.cluster_width_deg = parse_double(value);
    else if (key == "angles_deg") cfg.angles_deg = parse_doubles(value);
    else if (key == "csi_error_pct") cfg.csi_error_pct = parse_double(value);
    else if (key == "kmeans_restarts") cfg.kmeans_restarts = parse_int(value);
    else if (key == "snr_db") cfg.snr_db = parse_doubles(value);
    else if (key == "active_users") cfg.active_users = parse_ints(value);
    else if (key == "activity_rate") cfg.activity_rate = parse_double(value);
    else if (key == "activity_model") {
      if (value == "fixed") cfg.use_activity_rate = false;
      else if (value == "rate") cfg.use_activity_rate = true;
      else throw ConfigError("activity_model must be fixed or rate");
    }
    else if (key == "constellation") cfg.constellation = constellation_from_name(value);
    else if (key == "receiver") cfg.receiver = value;
    else if (key == "s_max") cfg.rx.s_max = parse_int(value);
    else if (key == "epsilon") cfg.rx.epsilon = parse_double(value);
    else if (key == "theta1") cfg.rx.theta1 = parse_double(value);
    else if (key == "asp_iterations") cfg.rx.asp_iterations = parse_int(value);
    else if (key == "gamma_threshold") cfg.rx.tpr_threshold = parse_double(value);
    else if (key == "esnr_db") cfg.rx.esnr_db = parse_double(value);
    else if (key == "alpha_hint") cfg.rx.alpha_hint = parse_double(value);
    else if (key == "ic_rounds") cfg.rx.ic_rounds = parse_int(value);
    else if (key == "ic_inner") cfg.rx.ic_inner = parse_int(value);
    else if (key == "max_alternations") cfg.rx.max_alternations = parse_int(value);
    else if (key == "initial_weight") {
      if (value == "sbf") cfg.rx.initial_weight = InitialWeight::sbf;
      else if (value == "zfbf") cfg.rx.initial_weight = InitialWeight::zfbf;
      else throw ConfigError("initial_weight must be sbf or zfbf");
    }
    else if (key == "baseline_antenna") cfg.baseline_antenna = parse_int(value);
    else if (key == "zc_roots") cfg.zc_roots = parse_ints(value);
    else if (key == "sweep") cfg.sweep = value;
    else if (key == "sweep_values") cfg.sweep_values = parse_doubles(value);
    else if (key == "trials") cfg.trials = parse_int(value);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(std::stoull(value));
    else if (key == "threads") cfg.threads = parse_int(value);
    else throw ConfigError("unknown config key: " + key);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_text(buf.str());
}

}  // namespace gfnoma
