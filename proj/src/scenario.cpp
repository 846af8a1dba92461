#include "zms/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "zms/detection.hpp"
#include "zms/protocol.hpp"

namespace zms::scenario {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// seed-derivation tags (arbitrary fixed constants, one per purpose)
constexpr std::uint64_t kTagPlacement = 0x706c6163;
constexpr std::uint64_t kTagStudy = 0x53545544;
constexpr std::uint64_t kTagRoc = 0x524f43;
constexpr std::uint64_t kTagProtocol = 0x50524f54;

double parse_double(const std::string& key, const std::string& value) {
  std::size_t consumed = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &consumed);
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': malformed number '" + value + "'");
  }
  if (consumed != value.size()) {
    throw std::invalid_argument("config key '" + key + "': malformed number '" + value + "'");
  }
  return v;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& value) {
  if (value.empty() || value[0] == '-') {
    throw std::invalid_argument("config key '" + key + "': expected a nonnegative integer");
  }
  std::size_t consumed = 0;
  std::uint64_t v = 0;
  try {
    v = std::stoull(value, &consumed);
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': malformed integer '" + value + "'");
  }
  if (consumed != value.size()) {
    throw std::invalid_argument("config key '" + key + "': malformed integer '" + value + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true") return true;
  if (value == "0" || value == "false") return false;
  throw std::invalid_argument("config key '" + key + "': expected 0/1/true/false");
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

// Quantized square-root types of per-sensor count vectors, then the spread
// statistic; shared by the fast kernel and the record-keeping trial path.
double statistic_from_counts(const std::vector<std::vector<std::uint32_t>>& counts,
                             std::uint32_t t, const ring::RingParams& ring_p) {
  typestat::MarginalVector types;
  types.reserve(counts.size());
  std::vector<double> probs;
  for (const auto& c : counts) {
    probs.assign(c.size(), 0.0);
    for (std::size_t x = 0; x < c.size(); ++x) {
      probs[x] = static_cast<double>(c[x]) / static_cast<double>(t);
    }
    types.push_back(typestat::quantize_sqrt(probs, ring_p));
  }
  return typestat::quantized_diameter(types);
}

std::vector<std::uint32_t> draw_levels(const rng::AliasTable& table, std::uint32_t t,
                                       rng::Engine& eng) {
  std::vector<std::uint32_t> seq(t);
  for (auto& s : seq) s = static_cast<std::uint32_t>(table.sample(eng));
  return seq;
}

std::vector<std::vector<std::uint32_t>> draw_counts(const std::vector<rng::AliasTable>& tables,
                                                    std::uint32_t t, std::uint32_t levels,
                                                    rng::Engine& eng) {
  std::vector<std::vector<std::uint32_t>> counts(tables.size(),
                                                 std::vector<std::uint32_t>(levels, 0));
  for (std::size_t k = 0; k < tables.size(); ++k) {
    for (std::uint32_t i = 0; i < t; ++i) {
      ++counts[k][tables[k].sample(eng)];
    }
  }
  return counts;
}

// One trial of the fast path: per-sensor counts drawn from alias tables.
double kernel_trial(const std::vector<rng::AliasTable>& tables, std::uint32_t t,
                    std::uint32_t levels, const ring::RingParams& ring_p, std::uint64_t seed) {
  rng::Engine eng(seed);
  return statistic_from_counts(draw_counts(tables, t, levels, eng), t, ring_p);
}

std::vector<rng::AliasTable> build_tables(const std::vector<std::vector<double>>& sensor_pmfs) {
  if (sensor_pmfs.empty()) {
    throw std::invalid_argument("statistic block: no sensor distributions");
  }
  std::vector<rng::AliasTable> tables;
  tables.reserve(sensor_pmfs.size());
  for (const auto& pmf : sensor_pmfs) tables.emplace_back(pmf);
  return tables;
}

void check_block_args(const std::vector<std::vector<double>>& sensor_pmfs, std::uint32_t t,
                      std::uint32_t trials) {
  if (sensor_pmfs.size() < 2) {
    throw std::invalid_argument("statistic block: need at least two sensors");
  }
  if (t == 0 || trials == 0) {
    throw std::invalid_argument("statistic block: t and trials must be positive");
  }
}

struct SeFit {
  double gamma_var = 0.0;     // Var of the calibrated threshold
  double sensitivity = 0.0;   // d(mu)/d(gamma) magnitude estimate
};

// Order-statistic spacing estimate of the calibration-threshold variance and
// of the false-alarm density at gamma.  Approximate by construction; feeds
// only the reported standard error, never the estimates themselves.
SeFit fit_se_terms(const std::vector<double>& miss_sorted, const std::vector<double>& fa_stats,
                   double gamma, double lambda) {
  SeFit fit;
  const std::size_t n = miss_sorted.size();
  const auto j = static_cast<std::size_t>(std::floor(lambda * static_cast<double>(n) + 1e-9));
  const std::size_t w = 3;
  const std::size_t hi = std::min(j + w, n - 1);
  const std::size_t lo = j >= w ? j - w : 0;
  const double spacing = miss_sorted[hi] - miss_sorted[lo];
  if (spacing > 0.0 && hi > lo) {
    const double density = static_cast<double>(hi - lo) / (static_cast<double>(n) * spacing);
    fit.gamma_var = lambda * (1.0 - lambda) / (static_cast<double>(n) * density * density);
    const double h = 0.5 * spacing;
    std::size_t inside = 0;
    for (double s : fa_stats) {
      if (std::abs(s - gamma) <= h) ++inside;
    }
    fit.sensitivity = static_cast<double>(inside) / (2.0 * h * static_cast<double>(fa_stats.size()));
  }
  return fit;
}

// Same per-trial draws as the fast kernel, but fused through the aggregation
// protocol.  The statistic is bit-identical to the plaintext kernel (tick sums
// do not wrap, and dyadic floating-point sums are exact), so this path exists
// to exercise the full pipeline, not to change the numbers.
std::vector<double> protocol_block(const ScenarioConfig& config,
                                   const std::vector<std::vector<double>>& sensor_pmfs,
                                   std::uint32_t t, std::uint64_t block_seed) {
  check_block_args(sensor_pmfs, t, config.trials);
  const auto tables = build_tables(sensor_pmfs);
  const auto levels = static_cast<std::uint32_t>(sensor_pmfs.front().size());
  const ring::RingParams ring_p(static_cast<std::uint32_t>(sensor_pmfs.size()) + 1,
                                config.precision);
  protocol::ProtocolParams params;
  params.sensors = static_cast<std::uint32_t>(sensor_pmfs.size());
  params.ring_p = ring_p;
  params.alphabet = levels;

  std::vector<double> out(config.trials);
  std::vector<double> probs(levels);
  for (std::uint32_t i = 0; i < config.trials; ++i) {
    const std::uint64_t trial_seed = rng::derive_seed(block_seed, {i});
    rng::Engine eng(trial_seed);
    const auto counts = draw_counts(tables, t, levels, eng);
    std::vector<typestat::QuantizedSqrtType> types;
    types.reserve(counts.size());
    for (const auto& c : counts) {
      for (std::size_t x = 0; x < probs.size(); ++x) {
        probs[x] = static_cast<double>(c[x]) / static_cast<double>(t);
      }
      types.push_back(typestat::quantize_sqrt(probs, ring_p));
    }
    out[i] = protocol::run_protocol(params, types, 0.0,
                                    rng::derive_seed(trial_seed, {kTagProtocol}))
                 .statistic;
  }
  return out;
}

std::vector<double> run_block(const ScenarioConfig& config,
                              const std::vector<std::vector<double>>& pmfs, std::uint32_t t,
                              std::uint64_t block_seed) {
  if (config.use_protocol) {
    return protocol_block(config, pmfs, t, block_seed);
  }
  if (config.workers == 1) {
    return statistic_block_serial(pmfs, t, config.trials, block_seed, config.precision);
  }
  return statistic_block_parallel(pmfs, t, config.trials, block_seed, config.precision,
                                  config.workers);
}

double mean_at_least(const std::vector<double>& stats, double gamma) {
  std::size_t hits = 0;
  for (double s : stats) {
    if (s >= gamma) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(stats.size());
}

double mean_below(const std::vector<double>& stats, double gamma) {
  return 1.0 - mean_at_least(stats, gamma);
}

}  // namespace

void ScenarioConfig::validate() const {
  if (sensors < 2) throw std::invalid_argument("scenario: need at least two sensors");
  if (sensors > 250) throw capability_error("scenario: sensor count exceeds the protocol limit");
  if (trials == 0) throw std::invalid_argument("scenario: trials must be positive");
  if (placements == 0) throw std::invalid_argument("scenario: placements must be positive");
  if (study_t.empty()) throw std::invalid_argument("scenario: study_t must be nonempty");
  for (auto t : study_t) {
    if (t == 0) throw std::invalid_argument("scenario: sequence lengths must be positive");
  }
  if (roc_t == 0) throw std::invalid_argument("scenario: roc_t must be positive");
  if (quant_levels < 2 || quant_levels > 0xffff) {
    throw std::invalid_argument("scenario: quantizer levels must lie in [2, 65535]");
  }
  if (!(quant_lo_dbm < quant_hi_dbm)) {
    throw std::invalid_argument("scenario: quantizer range must be increasing");
  }
  if (precision == 0 || precision > 30) {
    throw std::invalid_argument("scenario: precision must lie in [1, 30]");
  }
  if (!(source_region_radius_km > 0) || !(sensor_region_radius_km > 0)) {
    throw std::invalid_argument("scenario: region radii must be positive");
  }
  if (!(lambda_target > 0.0) || lambda_target > 1.0) {
    throw std::invalid_argument("scenario: lambda_target must lie in (0, 1]");
  }
  if (roc_points < 2) throw std::invalid_argument("scenario: roc_points must be at least 2");
}

ScenarioConfig parse_config(const std::string& text) {
  ScenarioConfig config;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key=value");
    }

    if (key == "sensors") {
      config.sensors = static_cast<std::uint32_t>(parse_unsigned(key, value));
    } else if (key == "roc_t") {
      config.roc_t = static_cast<std::uint32_t>(parse_unsigned(key, value));
    } else if (key == "study_t") {
      config.study_t.clear();
      std::istringstream items(value);
      std::string item;
      while (std::getline(items, item, ',')) {
        item = trim(item);
        if (item.empty()) {
          throw std::invalid_argument("config key 'study_t': empty list entry");
        }
        config.study_t.push_back(static_cast<std::uint32_t>(parse_unsigned(key, item)));
      }
      if (config.study_t.empty()) {
        throw std::invalid_argument("config key 'study_t': empty list");
      }
    } else if (key == "source_region_radius_km") {
      config.source_region_radius_km = parse_double(key, value);
    } else if (key == "sensor_region_radius_km") {
      config.sensor_region_radius_km = parse_double(key, value);
    } else if (key == "carrier_mhz") {
      config.carrier_mhz = parse_double(key, value);
    } else if (key == "source_antenna_m") {
      config.source_antenna_m = parse_double(key, value);
    } else if (key == "sensor_antenna_m") {
      config.sensor_antenna_m = parse_double(key, value);
    } else if (key == "source_power_dbm") {
      config.source_power_dbm = parse_double(key, value);
    } else if (key == "noise_power_dbm") {
      config.noise_power_dbm = parse_double(key, value);
    } else if (key == "quant_levels") {
      config.quant_levels = static_cast<std::uint32_t>(parse_unsigned(key, value));
    } else if (key == "quant_lo_dbm") {
      config.quant_lo_dbm = parse_double(key, value);
    } else if (key == "quant_hi_dbm") {
      config.quant_hi_dbm = parse_double(key, value);
    } else if (key == "precision") {
      config.precision = static_cast<std::uint32_t>(parse_unsigned(key, value));
    } else if (key == "model") {
      if (value == "two_slope") {
        config.model = PathLossModel::TwoSlope;
      } else if (value == "free_space") {
        config.model = PathLossModel::FreeSpace;
      } else {
        throw std::invalid_argument("config key 'model': expected two_slope or free_space");
      }
    } else if (key == "base_loss_db") {
      config.base_loss_db = parse_double(key, value);
    } else if (key == "slope_near_db") {
      config.slope_near_db = parse_double(key, value);
    } else if (key == "slope_far_db") {
      config.slope_far_db = parse_double(key, value);
    } else if (key == "seed") {
      config.seed = parse_unsigned(key, value);
    } else if (key == "placements") {
      config.placements = static_cast<std::uint32_t>(parse_unsigned(key, value));
    } else if (key == "trials") {
      config.trials = static_cast<std::uint32_t>(parse_unsigned(key, value));
    } else if (key == "lambda_target") {
      config.lambda_target = parse_double(key, value);
    } else if (key == "roc_points") {
      config.roc_points = static_cast<std::uint32_t>(parse_unsigned(key, value));
    } else if (key == "use_protocol") {
      config.use_protocol = parse_bool(key, value);
    } else if (key == "workers") {
      config.workers = static_cast<std::uint32_t>(parse_unsigned(key, value));
    } else {
      throw std::invalid_argument("unknown configuration key '" + key + "'");
    }
  }
  config.validate();
  return config;
}

std::string config_to_text(const ScenarioConfig& config) {
  std::ostringstream out;
  char buf[128];
  out << "sensors = " << config.sensors << "\n";
  out << "roc_t = " << config.roc_t << "\n";
  out << "study_t = ";
  for (std::size_t i = 0; i < config.study_t.size(); ++i) {
    out << (i ? "," : "") << config.study_t[i];
  }
  out << "\n";
  const auto emit = [&](const char* key, double v) {
    std::snprintf(buf, sizeof buf, "%s = %.12g\n", key, v);
    out << buf;
  };
  emit("source_region_radius_km", config.source_region_radius_km);
  emit("sensor_region_radius_km", config.sensor_region_radius_km);
  emit("carrier_mhz", config.carrier_mhz);
  emit("source_antenna_m", config.source_antenna_m);
  emit("sensor_antenna_m", config.sensor_antenna_m);
  emit("source_power_dbm", config.source_power_dbm);
  emit("noise_power_dbm", config.noise_power_dbm);
  out << "quant_levels = " << config.quant_levels << "\n";
  emit("quant_lo_dbm", config.quant_lo_dbm);
  emit("quant_hi_dbm", config.quant_hi_dbm);
  out << "precision = " << config.precision << "\n";
  out << "model = " << (config.model == PathLossModel::TwoSlope ? "two_slope" : "free_space")
      << "\n";
  emit("base_loss_db", config.base_loss_db);
  emit("slope_near_db", config.slope_near_db);
  emit("slope_far_db", config.slope_far_db);
  out << "seed = " << config.seed << "\n";
  out << "placements = " << config.placements << "\n";
  out << "trials = " << config.trials << "\n";
  emit("lambda_target", config.lambda_target);
  out << "roc_points = " << config.roc_points << "\n";
  out << "use_protocol = " << (config.use_protocol ? 1 : 0) << "\n";
  out << "workers = " << config.workers << "\n";
  return out.str();
}

Placement draw_placement(const ScenarioConfig& config, rng::Engine& eng) {
  const auto draw_in_disk = [&](double radius) {
    while (true) {
      const double x = (2.0 * eng.uniform01() - 1.0) * radius;
      const double y = (2.0 * eng.uniform01() - 1.0) * radius;
      if (x * x + y * y <= radius * radius) return std::array<double, 2>{x, y};
    }
  };
  Placement p;
  p.source_km = draw_in_disk(config.source_region_radius_km);
  p.sensors_km.reserve(config.sensors);
  for (std::uint32_t k = 0; k < config.sensors; ++k) {
    p.sensors_km.push_back(draw_in_disk(config.sensor_region_radius_km));
  }
  return p;
}

double path_loss_dB(double distance_km, PathLossModel model, const ScenarioConfig& config) {
  if (!(distance_km > 0.0)) {
    throw std::invalid_argument("path_loss_dB: distance must be positive");
  }
  switch (model) {
    case PathLossModel::TwoSlope: {
      const double slope = distance_km >= 1.0 ? config.slope_far_db : config.slope_near_db;
      return config.base_loss_db + slope * std::log10(distance_km);
    }
    case PathLossModel::FreeSpace:
      return 32.44 + 20.0 * std::log10(config.carrier_mhz) + 20.0 * std::log10(distance_km);
  }
  throw std::invalid_argument("path_loss_dB: unknown model");
}

double snr_linear(double distance_km, const ScenarioConfig& config) {
  const double loss = path_loss_dB(distance_km, config.model, config);
  return std::pow(10.0, (config.source_power_dbm - loss - config.noise_power_dbm) / 10.0);
}

std::vector<double> level_pmf(double snr, const ScenarioConfig& config) {
  if (!(snr >= 0.0)) throw std::invalid_argument("level_pmf: snr must be nonnegative");
  const std::size_t levels = config.quant_levels;
  const double width = (config.quant_hi_dbm - config.quant_lo_dbm) / static_cast<double>(levels);
  // CDF of the received dBm value at a level edge
  const auto cdf_at_edge = [&](std::size_t i) {
    const double edge = config.quant_lo_dbm + width * static_cast<double>(i);
    const double arg =
        std::max(0.0, std::pow(10.0, (edge - config.noise_power_dbm) / 10.0) - snr);
    return 1.0 - std::exp(-arg);
  };
  std::vector<double> pmf(levels);
  pmf[0] = cdf_at_edge(1);  // everything below the first interior edge clamps down
  double prev = pmf[0];
  for (std::size_t j = 1; j + 1 < levels; ++j) {
    const double next = cdf_at_edge(j + 1);
    pmf[j] = std::max(0.0, next - prev);
    prev = next;
  }
  pmf[levels - 1] = std::max(0.0, 1.0 - prev);  // everything above clamps up
  return pmf;
}

std::uint32_t sample_power(int theta, double snr, const ScenarioConfig& config,
                           rng::Engine& eng) {
  if (theta != 0 && theta != 1) throw std::invalid_argument("sample_power: theta must be 0 or 1");
  if (!(snr >= 0.0)) throw std::invalid_argument("sample_power: snr must be nonnegative");
  const double lin = (theta == 1 ? snr : 0.0) + eng.exponential();
  const double dbm = config.noise_power_dbm + 10.0 * std::log10(lin);
  const double width =
      (config.quant_hi_dbm - config.quant_lo_dbm) / static_cast<double>(config.quant_levels);
  if (!(dbm >= config.quant_lo_dbm)) return 0;  // also catches lin == 0 -> -inf
  const double idx = std::floor((dbm - config.quant_lo_dbm) / width);
  if (idx >= static_cast<double>(config.quant_levels)) return config.quant_levels - 1;
  return static_cast<std::uint32_t>(idx);
}

TrialRecord run_trial(const ScenarioConfig& config, const Placement& placement, int theta,
                      std::uint32_t t, double gamma, std::uint64_t trial_seed) {
  config.validate();
  if (theta != 0 && theta != 1) throw std::invalid_argument("run_trial: theta must be 0 or 1");
  if (t == 0) throw std::invalid_argument("run_trial: t must be positive");
  if (placement.sensors_km.size() != config.sensors) {
    throw std::invalid_argument("run_trial: placement sensor count disagrees with the config");
  }

  std::vector<rng::AliasTable> tables;
  tables.reserve(config.sensors);
  const std::vector<double> noise_pmf = level_pmf(0.0, config);
  for (std::uint32_t k = 0; k < config.sensors; ++k) {
    if (theta == 0) {
      tables.emplace_back(noise_pmf);
      continue;
    }
    const double dx = placement.sensors_km[k][0] - placement.source_km[0];
    const double dy = placement.sensors_km[k][1] - placement.source_km[1];
    const double d = std::max(std::sqrt(dx * dx + dy * dy), 1e-3);
    tables.emplace_back(level_pmf(snr_linear(d, config), config));
  }

  TrialRecord record;
  record.theta = theta;
  record.t = t;
  rng::Engine eng(trial_seed);
  std::vector<std::vector<std::uint32_t>> counts(config.sensors,
                                                 std::vector<std::uint32_t>(config.quant_levels, 0));
  record.levels.reserve(config.sensors);
  for (std::uint32_t k = 0; k < config.sensors; ++k) {
    record.levels.push_back(draw_levels(tables[k], t, eng));
    for (auto level : record.levels.back()) ++counts[k][level];
  }

  const ring::RingParams ring_p(config.sensors + 1, config.precision);
  if (config.use_protocol) {
    protocol::ProtocolParams params;
    params.sensors = config.sensors;
    params.ring_p = ring_p;
    params.alphabet = config.quant_levels;
    std::vector<typestat::QuantizedSqrtType> types;
    std::vector<double> probs(config.quant_levels);
    for (std::uint32_t k = 0; k < config.sensors; ++k) {
      for (std::size_t x = 0; x < probs.size(); ++x) {
        probs[x] = static_cast<double>(counts[k][x]) / static_cast<double>(t);
      }
      types.push_back(typestat::quantize_sqrt(probs, ring_p));
    }
    const auto result = protocol::run_protocol(params, types, gamma,
                                               rng::derive_seed(trial_seed, {kTagProtocol}));
    record.statistic = result.statistic;
    record.decision = result.decision;
  } else {
    record.statistic = statistic_from_counts(counts, t, ring_p);
    record.decision =
        detection::decide_statistic(record.statistic, gamma) == detection::Decision::H1 ? 1 : 0;
  }
  return record;
}

std::vector<double> statistic_block_serial(const std::vector<std::vector<double>>& sensor_pmfs,
                                           std::uint32_t t, std::uint32_t trials,
                                           std::uint64_t block_seed, std::uint32_t precision) {
  check_block_args(sensor_pmfs, t, trials);
  const auto tables = build_tables(sensor_pmfs);
  const auto levels = static_cast<std::uint32_t>(sensor_pmfs.front().size());
  const ring::RingParams ring_p(static_cast<std::uint32_t>(sensor_pmfs.size()) + 1, precision);
  std::vector<double> out(trials);
  for (std::uint32_t i = 0; i < trials; ++i) {
    out[i] = kernel_trial(tables, t, levels, ring_p, rng::derive_seed(block_seed, {i}));
  }
  return out;
}

std::vector<double> statistic_block_parallel(const std::vector<std::vector<double>>& sensor_pmfs,
                                             std::uint32_t t, std::uint32_t trials,
                                             std::uint64_t block_seed, std::uint32_t precision,
                                             std::uint32_t workers) {
  check_block_args(sensor_pmfs, t, trials);
  const auto tables = build_tables(sensor_pmfs);
  const auto levels = static_cast<std::uint32_t>(sensor_pmfs.front().size());
  const ring::RingParams ring_p(static_cast<std::uint32_t>(sensor_pmfs.size()) + 1, precision);
  std::vector<double> out(trials);
#ifdef _OPENMP
  const int threads = workers == 0 ? omp_get_max_threads() : static_cast<int>(workers);
#pragma omp parallel for schedule(static) num_threads(threads)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(trials); ++i) {
    out[static_cast<std::size_t>(i)] =
        kernel_trial(tables, t, levels, ring_p,
                     rng::derive_seed(block_seed, {static_cast<std::uint64_t>(i)}));
  }
#else
  (void)workers;
  for (std::uint32_t i = 0; i < trials; ++i) {
    out[i] = kernel_trial(tables, t, levels, ring_p, rng::derive_seed(block_seed, {i}));
  }
#endif
  return out;
}

std::string StudyResult::exponents_csv() const {
  std::string out = "t,lambda_target,gamma,exponent_estimate,mu,stderr\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%u,%.12g,%.12g,%.12g,%.12g,%.12g\n", r.t, r.lambda_target,
                  r.gamma, r.exponent, r.mu, r.stderr_exponent);
    out += buf;
  }
  return out;
}

std::string StudyResult::roc_csv() const {
  std::string out = "K,gamma,mu,lambda\n";
  char buf[128];
  for (const auto& p : roc) {
    std::snprintf(buf, sizeof buf, "%u,%.12g,%.12g,%.12g\n", p.sensors, p.gamma, p.mu, p.lambda);
    out += buf;
  }
  return out;
}

StudyResult run_study(const ScenarioConfig& config) {
  config.validate();
  if (config.use_protocol &&
      static_cast<std::uint64_t>(config.trials) * config.placements > 20000) {
    throw capability_error(
        "run_study: the protocol-backed statistic path is limited to small runs "
        "(trials x placements <= 20000); use the plaintext path for desk-scale studies");
  }

  StudyResult result;
  result.config = config;

  rng::Engine placement_eng(rng::derive_seed(config.seed, {kTagPlacement}));
  result.placements.reserve(config.placements);
  for (std::uint32_t c = 0; c < config.placements; ++c) {
    result.placements.push_back(draw_placement(config, placement_eng));
  }

  const std::vector<double> noise_pmf = level_pmf(0.0, config);
  const std::vector<std::vector<double>> noise_pmfs(config.sensors, noise_pmf);
  std::vector<std::vector<std::vector<double>>> signal_pmfs;  // placement x sensor x level
  signal_pmfs.reserve(config.placements);
  for (const auto& pl : result.placements) {
    std::vector<std::vector<double>> rows;
    rows.reserve(config.sensors);
    for (const auto& s : pl.sensors_km) {
      const double dx = s[0] - pl.source_km[0];
      const double dy = s[1] - pl.source_km[1];
      const double d = std::max(std::sqrt(dx * dx + dy * dy), 1e-3);
      rows.push_back(level_pmf(snr_linear(d, config), config));
    }
    signal_pmfs.push_back(std::move(rows));
  }

  const double n = static_cast<double>(config.trials);

  // --- exponent study -------------------------------------------------------
  for (const auto t : config.study_t) {
    std::vector<std::vector<double>> fa_stats(config.placements);    // theta = 0
    std::vector<std::vector<double>> miss_stats(config.placements);  // theta = 1
    for (std::uint32_t c = 0; c < config.placements; ++c) {
      fa_stats[c] = run_block(config, noise_pmfs, t,
                              rng::derive_seed(config.seed, {kTagStudy, t, 0, c}));
      miss_stats[c] = run_block(config, signal_pmfs[c], t,
                                rng::derive_seed(config.seed, {kTagStudy, t, 1, c}));
    }

    const double gamma = detection::calibrate_worst_case(miss_stats, config.lambda_target);

    StudyRow row;
    row.t = t;
    row.lambda_target = config.lambda_target;
    row.gamma = gamma;
    row.placement_mu.reserve(config.placements);
    std::size_t worst_fa = 0;
    std::size_t calib_src = 0;
    double calib_gamma = kInf;
    for (std::uint32_t c = 0; c < config.placements; ++c) {
      row.placement_mu.push_back(mean_at_least(fa_stats[c], gamma));
      if (row.placement_mu.back() > row.placement_mu[worst_fa]) worst_fa = c;
      const double g_c = detection::calibrate_threshold(miss_stats[c], config.lambda_target);
      if (g_c < calib_gamma) {
        calib_gamma = g_c;
        calib_src = c;
      }
    }
    row.mu = row.placement_mu[worst_fa];

    if (row.mu == 0.0) {
      row.exponent = kInf;
      row.stderr_exponent = kInf;
    } else {
      row.exponent = -std::log2(row.mu) / static_cast<double>(t);
      const double se_bin =
          std::sqrt(row.mu * (1.0 - row.mu) / n) / (row.mu * std::log(2.0) * t);
      auto miss_sorted = miss_stats[calib_src];
      std::sort(miss_sorted.begin(), miss_sorted.end());
      const SeFit fit =
          fit_se_terms(miss_sorted, fa_stats[worst_fa], gamma, config.lambda_target);
      const double se_gamma = fit.sensitivity * std::sqrt(fit.gamma_var) /
                              (row.mu * std::log(2.0) * static_cast<double>(t));
      row.stderr_exponent = std::hypot(se_bin, se_gamma);
    }
    result.rows.push_back(std::move(row));
  }

  // --- ROC comparison at t = roc_t ------------------------------------------
  std::vector<std::uint32_t> roc_sensor_counts;
  if (config.sensors >= 3) roc_sensor_counts.push_back(config.sensors - 1);
  roc_sensor_counts.push_back(config.sensors);
  for (const auto kk : roc_sensor_counts) {
    std::vector<std::vector<double>> fa_stats(config.placements);
    std::vector<std::vector<double>> miss_stats(config.placements);
    std::vector<double> pool;
    pool.reserve(static_cast<std::size_t>(config.placements) * config.trials * 2);
    for (std::uint32_t c = 0; c < config.placements; ++c) {
      const std::vector<std::vector<double>> noise_rows(kk, noise_pmf);
      std::vector<std::vector<double>> signal_rows(signal_pmfs[c].begin(),
                                                   signal_pmfs[c].begin() + kk);
      fa_stats[c] = run_block(config, noise_rows, config.roc_t,
                              rng::derive_seed(config.seed, {kTagRoc, kk, 0, c}));
      miss_stats[c] = run_block(config, signal_rows, config.roc_t,
                                rng::derive_seed(config.seed, {kTagRoc, kk, 1, c}));
      pool.insert(pool.end(), fa_stats[c].begin(), fa_stats[c].end());
      pool.insert(pool.end(), miss_stats[c].begin(), miss_stats[c].end());
    }
    std::sort(pool.begin(), pool.end());
    for (std::uint32_t j = 0; j < config.roc_points; ++j) {
      const double q =
          0.001 + (0.999 - 0.001) * static_cast<double>(j) / (config.roc_points - 1);
      const auto idx = static_cast<std::size_t>(
          std::llround(q * static_cast<double>(pool.size() - 1)));
      const double gamma = pool[idx];
      RocPoint pt;
      pt.sensors = kk;
      pt.gamma = gamma;
      pt.mu = 0.0;
      pt.lambda = 0.0;
      for (std::uint32_t c = 0; c < config.placements; ++c) {
        pt.mu = std::max(pt.mu, mean_at_least(fa_stats[c], gamma));
        pt.lambda = std::max(pt.lambda, mean_below(miss_stats[c], gamma));
      }
      result.roc.push_back(pt);
    }
  }

  return result;
}

double roc_miss_at(const std::vector<RocPoint>& points, std::uint32_t sensors, double mu) {
  std::vector<std::pair<double, double>> curve;  // (mu, lambda), mu ascending
  for (const auto& p : points) {
    if (p.sensors == sensors) curve.emplace_back(p.mu, p.lambda);
  }
  if (curve.empty()) {
    throw std::invalid_argument("roc_miss_at: no points for the requested sensor count");
  }
  std::sort(curve.begin(), curve.end());
  if (mu <= curve.front().first) return curve.front().second;
  if (mu >= curve.back().first) return curve.back().second;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (mu <= curve[i].first) {
      const double x0 = curve[i - 1].first, y0 = curve[i - 1].second;
      const double x1 = curve[i].first, y1 = curve[i].second;
      if (x1 == x0) return std::min(y0, y1);
      const double w = (mu - x0) / (x1 - x0);
      return y0 + w * (y1 - y0);
    }
  }
  return curve.back().second;
}

}  // namespace zms::scenario
