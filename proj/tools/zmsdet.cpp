// zmsdet — command-line front end for the masked-aggregation detection
// library.  Subcommands tie the modules into seeded, reproducible
// experiments; every run is fully determined by (command, flags, seed), and
// artifacts (CSV/JSON) land in --out-dir.  Use a separate --out-dir per run
// to keep runs isolated; each subcommand writes only its own fixed set of
// file names.
//
// Exit codes: 0 success, 2 flag/usage error, 3 declared capability limit,
// 1 any other error.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "zms/adversary.hpp"
#include "zms/crypto.hpp"
#include "zms/detection.hpp"
#include "zms/errors.hpp"
#include "zms/exponents.hpp"
#include "zms/protocol.hpp"
#include "zms/ring.hpp"
#include "zms/rng.hpp"
#include "zms/scenario.hpp"
#include "zms/typestat.hpp"

namespace {

constexpr std::uint64_t kTagDemo = 0x44454d4f;  // "DEMO"

void write_file(const std::filesystem::path& dir, const std::string& name,
                const std::string& text) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + (dir / name).string() + " for writing");
  out << text;
}

zms::crypto::SchemeKind parse_scheme(const std::string& name) {
  if (name == "group") return zms::crypto::SchemeKind::Group;
  if (name == "identity") return zms::crypto::SchemeKind::Identity;
  if (name == "fixed-pad") return zms::crypto::SchemeKind::FixedPad;
  throw CLI::ValidationError("--scheme", "unknown scheme '" + name + "'");
}

int cmd_protocol_demo(std::uint32_t sensors, std::uint32_t alphabet, std::uint32_t precision,
                      std::uint32_t samples, double threshold, const std::string& scheme_name,
                      std::uint32_t bits, std::uint64_t seed, const std::string& out_dir) {
  zms::protocol::ProtocolParams params;
  params.sensors = sensors;
  params.ring_p = zms::ring::RingParams(sensors + 1, precision);
  params.alphabet = alphabet;
  params.scheme_kind = parse_scheme(scheme_name);
  params.security_bits = bits;
  params.validate();

  // Synthetic inputs: one random smoothed distribution per sensor, sampled
  // `samples` times and quantized onto the ring grid.
  zms::rng::Engine eng(zms::rng::derive_seed(seed, {kTagDemo}));
  std::vector<zms::typestat::QuantizedSqrtType> types;
  types.reserve(sensors);
  for (std::uint32_t k = 0; k < sensors; ++k) {
    std::vector<double> weights(alphabet);
    double total = 0.0;
    for (double& w : weights) {
      w = eng.uniform01() + 0.1;
      total += w;
    }
    for (double& w : weights) w /= total;
    const zms::rng::AliasTable table(weights);
    std::vector<std::uint32_t> counts(alphabet, 0);
    for (std::uint32_t i = 0; i < samples; ++i) ++counts[table.sample(eng)];
    types.push_back(
        zms::typestat::quantize_sqrt(zms::typestat::make_type(std::move(counts)), params.ring_p));
  }

  const auto result = zms::protocol::run_protocol(params, types, threshold,
                                                  zms::rng::derive_seed(seed, {kTagDemo, 1}));
  const double band =
      std::ldexp(static_cast<double>(sensors) * sensors * alphabet, -static_cast<int>(precision));
  std::printf(
      "protocol-demo: sensors=%u alphabet=%u precision=%u statistic=%.12g threshold=%.12g "
      "decision=%d band=%.12g\n",
      sensors, alphabet, precision, result.statistic, threshold, result.decision, band);

  if (!out_dir.empty()) {
    nlohmann::json j;
    j["sensors"] = sensors;
    j["alphabet"] = alphabet;
    j["precision"] = precision;
    j["samples"] = samples;
    j["scheme"] = scheme_name;
    j["security_bits"] = bits;
    j["threshold"] = threshold;
    j["statistic"] = result.statistic;
    j["decision"] = result.decision;
    j["band"] = band;
    j["seed"] = seed;
    write_file(out_dir, "result.json", j.dump(2) + "\n");
    write_file(out_dir, "transcript.jsonl", result.transcript.to_jsonl());
    std::printf("protocol-demo: wrote result.json transcript.jsonl -> %s\n", out_dir.c_str());
  }
  return 0;
}

int cmd_study(const std::string& config_path, bool seed_set, std::uint64_t seed, bool workers_set,
              std::uint32_t workers, bool use_protocol, const std::string& out_dir) {
  zms::scenario::ScenarioConfig config;
  if (!config_path.empty()) {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read config file " + config_path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    config = zms::scenario::parse_config(text);
  }
  if (seed_set) config.seed = seed;
  if (workers_set) config.workers = workers;
  if (use_protocol) config.use_protocol = true;
  config.validate();

  const auto result = zms::scenario::run_study(config);
  for (const auto& row : result.rows) {
    std::printf("study: t=%u gamma=%.12g exponent=%.12g mu=%.12g stderr=%.12g\n", row.t, row.gamma,
                row.exponent, row.mu, row.stderr_exponent);
  }
  write_file(out_dir, "study_config.txt", zms::scenario::config_to_text(result.config));
  write_file(out_dir, "exponents.csv", result.exponents_csv());
  write_file(out_dir, "roc.csv", result.roc_csv());
  std::printf("study: wrote study_config.txt exponents.csv roc.csv -> %s\n", out_dir.c_str());
  return 0;
}

int cmd_exponents(const std::string& curve, double lo, double hi, int points, double d1,
                  double grid_step, const std::string& out_dir) {
  zms::exponents::ExponentProblem problem;
  problem.d1 = d1;
  problem.grid_step = grid_step;
  problem.validate();
  const auto sampled = zms::exponents::sample_curve(curve, problem, lo, hi, points);
  for (const auto& pt : sampled.points) {
    std::printf("exponents: %s(%.12g) = %.12g\n", curve.c_str(), pt.argument, pt.value);
  }
  if (!out_dir.empty()) {
    write_file(out_dir, "curve.csv", sampled.to_csv());
    std::printf("exponents: wrote curve.csv -> %s\n", out_dir.c_str());
  }
  return 0;
}

int cmd_gap(double d0, double d1, int alphas, double grid_step, const std::string& out_dir) {
  zms::exponents::ExponentProblem problem;
  problem.d0 = d0;
  problem.d1 = d1;
  problem.grid_step = grid_step;
  problem.validate();
  // Interior operating points strictly below the optimal exponent at d1.
  const double a_max = zms::exponents::alpha_star_binary_closed(d1);
  std::vector<double> alpha_values;
  alpha_values.reserve(alphas);
  for (int i = 1; i <= alphas; ++i) {
    alpha_values.push_back(a_max * static_cast<double>(i) / static_cast<double>(alphas + 1));
  }
  const auto table = zms::exponents::verify_gap(problem, alpha_values);
  std::fputs(table.to_csv().c_str(), stdout);
  double min_margin = table.rows.empty() ? 0.0 : table.rows.front().margin;
  for (const auto& row : table.rows) min_margin = std::min(min_margin, row.margin);
  std::printf("gap: d1=%.12g rows=%zu all_strict=%s min_margin=%.12g tolerance=%.12g\n", d1,
              table.rows.size(), table.all_strict ? "true" : "false", min_margin, table.tolerance);
  if (!out_dir.empty()) {
    write_file(out_dir, "gap.csv", table.to_csv());
    std::printf("gap: wrote gap.csv -> %s\n", out_dir.c_str());
  }
  return 0;
}

int cmd_privacy_games(std::uint32_t sensors, std::uint32_t colluding, std::uint32_t precision,
                      std::uint32_t draws, std::uint64_t trials, double tau,
                      const std::string& scheme_name, std::uint32_t bits,
                      std::uint64_t uniformity_samples, std::uint64_t seed,
                      const std::string& out_dir) {
  zms::protocol::ProtocolParams params;
  params.sensors = sensors;
  params.ring_p = zms::ring::RingParams(sensors + 1, precision);
  params.alphabet = 2;
  params.scheme_kind = parse_scheme(scheme_name);
  params.security_bits = bits;
  params.validate();
  if (colluding >= sensors) throw std::invalid_argument("--colluding must be below --sensors");

  const auto prior = zms::adversary::binomial_type_prior(draws, params.ring_p);
  const auto show = [](const zms::adversary::GameReport& r) {
    std::printf("privacy-games: %s %s win=%.5f baseline=%.5f band=%.5f verdict=%s\n",
                r.game.c_str(), r.attacker.c_str(), r.win_rate, r.baseline_rate, r.band,
                r.verdict.c_str());
  };

  const auto random_guess = zms::adversary::make_random_guess_tea_attacker(prior);
  const auto tea_random =
      zms::adversary::run_tea(params, colluding, prior, random_guess, tau, trials, seed);
  show(tea_random);
  const auto sum_aware =
      zms::adversary::make_sum_aware_tea_attacker(prior, params, colluding);
  const auto tea_sum =
      zms::adversary::run_tea(params, colluding, prior, sum_aware, tau, trials, seed);
  show(tea_sum);

  const auto [q0, q1] = zms::adversary::find_equal_sum_pair(prior, sensors - colluding);
  const zms::typestat::MarginalVector coalition_types(colluding,
                                                      prior.support[prior.support.size() / 2]);
  const auto recon = zms::adversary::make_reconstruction_tda_attacker();
  const auto tda =
      zms::adversary::run_tda(params, colluding, coalition_types, q0, q1, recon, trials, seed);
  show(tda);

  const auto uniformity = zms::adversary::check_mask_uniformity(sensors, colluding, precision, 2,
                                                                uniformity_samples, seed);
  std::printf(
      "privacy-games: mask-uniformity exact=%s uniform=%s point_mass=%s coset_size=%llu "
      "p_value=%.5g\n",
      uniformity.exact ? "true" : "false", uniformity.uniform ? "true" : "false",
      uniformity.point_mass ? "true" : "false",
      static_cast<unsigned long long>(uniformity.coset_size), uniformity.p_value);

  if (!out_dir.empty()) {
    write_file(out_dir, "tea_random_guess.json", tea_random.to_json() + "\n");
    write_file(out_dir, "tea_sum_aware.json", tea_sum.to_json() + "\n");
    write_file(out_dir, "tda_reconstruction.json", tda.to_json() + "\n");
    write_file(out_dir, "mask_uniformity.json", uniformity.to_json() + "\n");
    std::printf("privacy-games: wrote 4 reports -> %s\n", out_dir.c_str());
  }
  return 0;
}

int cmd_cpa_check(const std::string& scheme_name, std::uint32_t bits, std::uint64_t trials,
                  std::uint32_t upper, std::uint32_t precision, std::uint64_t seed,
                  const std::string& out_dir) {
  const auto scheme = zms::crypto::make_scheme(parse_scheme(scheme_name), bits);
  const zms::ring::RingParams ring_p(upper, precision);
  nlohmann::json all = nlohmann::json::array();
  for (auto maker : {zms::crypto::make_random_guess_attacker, zms::crypto::make_plaintext_match_attacker,
                     zms::crypto::make_reencrypt_attacker}) {
    auto attacker = maker();
    const auto report = zms::crypto::run_cpa_experiment(*scheme, ring_p, *attacker, trials, seed);
    std::printf("cpa-check: scheme=%s attacker=%s trials=%llu win=%.5f advantage=%.5f band=%.5f\n",
                report.scheme.c_str(), report.attacker.c_str(),
                static_cast<unsigned long long>(report.trials), report.win_rate, report.advantage,
                report.band);
    nlohmann::json j;
    j["scheme"] = report.scheme;
    j["attacker"] = report.attacker;
    j["trials"] = report.trials;
    j["win_rate"] = report.win_rate;
    j["advantage"] = report.advantage;
    j["band"] = report.band;
    all.push_back(j);
  }
  if (!out_dir.empty()) {
    write_file(out_dir, "cpa.json", all.dump(2) + "\n");
    std::printf("cpa-check: wrote cpa.json -> %s\n", out_dir.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"masked-aggregation event detection experiments"};
  app.require_subcommand(1);

  // protocol-demo ------------------------------------------------------------
  auto* demo = app.add_subcommand("protocol-demo", "run one aggregation round on synthetic types");
  std::uint32_t demo_sensors = 5, demo_alphabet = 4, demo_precision = 13, demo_samples = 200;
  std::uint32_t demo_bits = 64;
  double demo_threshold = 1.0;
  std::string demo_scheme = "group", demo_out;
  std::uint64_t demo_seed = 1;
  demo->add_option("--sensors", demo_sensors, "number of sensors")->capture_default_str();
  demo->add_option("--alphabet", demo_alphabet, "alphabet size")->capture_default_str();
  demo->add_option("--precision", demo_precision, "fixed-point bits")->capture_default_str();
  demo->add_option("--samples", demo_samples, "draws per sensor")->capture_default_str();
  demo->add_option("--threshold", demo_threshold, "decision threshold")->capture_default_str();
  demo->add_option("--scheme", demo_scheme, "group | identity | fixed-pad")->capture_default_str();
  demo->add_option("--bits", demo_bits, "security bits for the group scheme")
      ->capture_default_str();
  demo->add_option("--seed", demo_seed, "master seed")->capture_default_str();
  demo->add_option("--out-dir", demo_out, "directory for result.json and transcript.jsonl");

  // study ----------------------------------------------------------------------
  auto* study = app.add_subcommand("study", "Monte Carlo detection study over sensor placements");
  std::string study_config, study_out = "zmsdet-out";
  std::uint64_t study_seed = 1;
  std::uint32_t study_workers = 0;
  bool study_protocol = false;
  study->add_option("--config", study_config, "key=value config file (defaults when omitted)");
  auto* study_seed_opt = study->add_option("--seed", study_seed, "master seed override");
  auto* study_workers_opt =
      study->add_option("--workers", study_workers, "worker threads (0 = all cores)");
  study->add_flag("--protocol", study_protocol,
                  "route every trial through the full aggregation protocol");
  study->add_option("--out-dir", study_out, "output directory")->capture_default_str();

  // exponents ---------------------------------------------------------------------
  auto* expo = app.add_subcommand("exponents", "sample an error-exponent curve");
  std::string expo_curve = "alpha_star", expo_out;
  double expo_lo = 0.1, expo_hi = 0.4, expo_d1 = 0.5, expo_grid = 5e-4;
  int expo_points = 13;
  expo->add_option("--curve", expo_curve, "curve name")
      ->check(CLI::IsMember({"alpha_star", "gamma_star", "beta_star_lower", "beta_star_upper"}))
      ->capture_default_str();
  expo->add_option("--lo", expo_lo, "smallest argument")->capture_default_str();
  expo->add_option("--hi", expo_hi, "largest argument")->capture_default_str();
  expo->add_option("--points", expo_points, "sample count")->capture_default_str();
  expo->add_option("--d1", expo_d1, "alternative diameter threshold")->capture_default_str();
  expo->add_option("--grid", expo_grid, "grid step for the solvers")->capture_default_str();
  expo->add_option("--out-dir", expo_out, "directory for curve.csv");

  // gap ------------------------------------------------------------------------------
  auto* gap = app.add_subcommand("gap", "optimal-vs-achieved exponent gap table");
  double gap_d0 = 0.0, gap_d1 = 0.5, gap_grid = 5e-4;
  int gap_alphas = 5;
  std::string gap_out;
  gap->add_option("--d0", gap_d0, "null diameter threshold")->capture_default_str();
  gap->add_option("--d1", gap_d1, "alternative diameter threshold")->capture_default_str();
  gap->add_option("--alphas", gap_alphas, "number of interior operating points")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  gap->add_option("--grid", gap_grid, "grid step for the solvers")->capture_default_str();
  gap->add_option("--out-dir", gap_out, "directory for gap.csv");

  // privacy-games ----------------------------------------------------------------------
  auto* games = app.add_subcommand("privacy-games", "estimation/distinguishing game suite");
  std::uint32_t g_sensors = 3, g_colluding = 1, g_precision = 3, g_draws = 8, g_bits = 64;
  std::uint64_t g_trials = 10000, g_samples = 1000000, g_seed = 1;
  double g_tau = 0.0;
  std::string g_scheme = "group", g_out;
  games->add_option("--sensors", g_sensors, "number of sensors")->capture_default_str();
  games->add_option("--colluding", g_colluding, "coalition size")->capture_default_str();
  games->add_option("--precision", g_precision, "fixed-point bits")->capture_default_str();
  games->add_option("--draws", g_draws, "per-sensor draws behind the binary type prior")
      ->capture_default_str();
  games->add_option("--trials", g_trials, "game trials")->capture_default_str();
  games->add_option("--tau", g_tau, "estimation neighborhood radius")->capture_default_str();
  games->add_option("--scheme", g_scheme, "group | identity | fixed-pad")->capture_default_str();
  games->add_option("--bits", g_bits, "security bits for the group scheme")
      ->capture_default_str();
  games->add_option("--uniformity-samples", g_samples, "samples for the mask uniformity check")
      ->capture_default_str();
  games->add_option("--seed", g_seed, "master seed")->capture_default_str();
  games->add_option("--out-dir", g_out, "directory for the JSON reports");

  // cpa-check ------------------------------------------------------------------------------
  auto* cpa = app.add_subcommand("cpa-check", "chosen-plaintext game over the attacker suite");
  std::string cpa_scheme = "group", cpa_out;
  std::uint32_t cpa_bits = 64, cpa_upper = 9, cpa_precision = 13;
  std::uint64_t cpa_trials = 10000, cpa_seed = 1;
  cpa->add_option("--scheme", cpa_scheme, "group | identity | fixed-pad")->capture_default_str();
  cpa->add_option("--bits", cpa_bits, "security bits for the group scheme")
      ->capture_default_str();
  cpa->add_option("--trials", cpa_trials, "game trials")->capture_default_str();
  cpa->add_option("--upper", cpa_upper, "plaintext ring upper bound")->capture_default_str();
  cpa->add_option("--precision", cpa_precision, "plaintext ring precision bits")
      ->capture_default_str();
  cpa->add_option("--seed", cpa_seed, "master seed")->capture_default_str();
  cpa->add_option("--out-dir", cpa_out, "directory for cpa.json");

  try {
    app.parse(argc, argv);
    if (demo->parsed()) {
      return cmd_protocol_demo(demo_sensors, demo_alphabet, demo_precision, demo_samples,
                               demo_threshold, demo_scheme, demo_bits, demo_seed, demo_out);
    }
    if (study->parsed()) {
      return cmd_study(study_config, study_seed_opt->count() > 0, study_seed,
                       study_workers_opt->count() > 0, study_workers, study_protocol, study_out);
    }
    if (expo->parsed()) {
      return cmd_exponents(expo_curve, expo_lo, expo_hi, expo_points, expo_d1, expo_grid,
                           expo_out);
    }
    if (gap->parsed()) return cmd_gap(gap_d0, gap_d1, gap_alphas, gap_grid, gap_out);
    if (games->parsed()) {
      return cmd_privacy_games(g_sensors, g_colluding, g_precision, g_draws, g_trials, g_tau,
                               g_scheme, g_bits, g_samples, g_seed, g_out);
    }
    if (cpa->parsed()) {
      return cmd_cpa_check(cpa_scheme, cpa_bits, cpa_trials, cpa_upper, cpa_precision, cpa_seed,
                           cpa_out);
    }
    return 2;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const zms::capability_error& e) {
    std::fprintf(stderr, "zmsdet: declared capability limit: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "zmsdet: error: %s\n", e.what());
    return 1;
  }
}
