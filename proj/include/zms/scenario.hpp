#pragma once
// Spectrum-sensing Monte Carlo study: random sensor/source geometry, a
// two-slope path-loss model, exponentially distributed receiver noise power,
// uniform dB-domain power quantization, and a study driver that estimates
// worst-case error rates, error exponents, and ROC curves for the spread
// test over quantized types.
//
// Model summary (defaults in ScenarioConfig):
//   path loss    L(d) = base + slope_near * log10(d_km)   for d <  1 km
//                L(d) = base + slope_far  * log10(d_km)    for d >= 1 km
//                (continuous at the seam since log10(1) = 0); a free-space
//                alternative is selectable for comparison
//   received     linear power = theta * S + N * E, E ~ Exp(1) unit mean
//                (the additive two-degree chi-square noise component read in
//                the linear power domain), S = source power after loss,
//                N = configured noise power
//   quantizer    128 uniform dB levels over [-130, -60] dBm, clamped
//   statistic    spread of the m = 13 quantized square-root types of the
//                per-sensor level sequences
//
// The per-level distribution has a closed form (the exponential CDF evaluated
// at the level edges), which the study samples through alias tables; the
// direct per-draw sampler is kept for distribution checks.  The study loop
// is the OpenMP kernel of this project; a serial reference implementation is
// kept alongside it and must produce bit-identical results (per-trial derived
// seeds make trials order-independent).
//
// The carrier frequency and antenna heights are recorded in the config and
// outputs; the two-slope substitute model folds their effect into its
// coefficients, while the free-space model consumes the carrier directly.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "zms/errors.hpp"
#include "zms/rng.hpp"
#include "zms/typestat.hpp"

namespace zms::scenario {

enum class PathLossModel { TwoSlope, FreeSpace };

struct ScenarioConfig {
  std::uint32_t sensors = 8;  // K
  std::uint32_t roc_t = 500;  // sequence length for the ROC comparison
  std::vector<std::uint32_t> study_t = {360, 420, 480, 540, 600};

  double source_region_radius_km = 2.0;
  double sensor_region_radius_km = 1.0;
  double carrier_mhz = 3625.0;
  double source_antenna_m = 20.0;
  double sensor_antenna_m = 1.5;
  double source_power_dbm = 25.0;
  double noise_power_dbm = -103.0;

  std::uint32_t quant_levels = 128;
  double quant_lo_dbm = -130.0;
  double quant_hi_dbm = -60.0;
  std::uint32_t precision = 13;  // m, square-root quantization bits

  PathLossModel model = PathLossModel::TwoSlope;
  double base_loss_db = 125.5;  // two-slope coefficients (dB, dB/decade)
  double slope_near_db = 28.0;
  double slope_far_db = 36.378;

  std::uint64_t seed = 1;
  std::uint32_t placements = 10;  // configurations drawn per study
  std::uint32_t trials = 10000;   // per (t, theta, placement)
  double lambda_target = 5e-4;    // worst-case miss-rate target
  std::uint32_t roc_points = 200;
  bool use_protocol = false;  // route each trial through the aggregation protocol
  std::uint32_t workers = 0;  // 0 = all available; 1 = serial reference path

  void validate() const;
};

// Flat key=value text (one per line, '#' comments); unknown keys are errors.
ScenarioConfig parse_config(const std::string& text);
std::string config_to_text(const ScenarioConfig& config);

struct Placement {
  std::array<double, 2> source_km{};
  std::vector<std::array<double, 2>> sensors_km;
};

// Source uniform in the source disk, sensors uniform in the sensor disk.
Placement draw_placement(const ScenarioConfig& config, rng::Engine& eng);

// Deterministic loss in dB; throws std::invalid_argument for d <= 0.
double path_loss_dB(double distance_km, PathLossModel model, const ScenarioConfig& config);

// Source-to-sensor signal power in noise units: 10^((P_tx - L(d) - P_noise)/10).
double snr_linear(double distance_km, const ScenarioConfig& config);

// Exact level distribution for linear power snr + Exp(1) (noise units).
std::vector<double> level_pmf(double snr, const ScenarioConfig& config);

// One direct draw from the same distribution (theta = 0 ignores snr).
std::uint32_t sample_power(int theta, double snr, const ScenarioConfig& config, rng::Engine& eng);

struct TrialRecord {
  std::uint32_t config_id = 0;
  int theta = 0;
  std::uint32_t t = 0;
  std::vector<std::vector<std::uint32_t>> levels;  // sensors x t
  double statistic = 0.0;
  int decision = 0;
};

// Runs one trial at a placement: draws level sequences, quantizes the
// per-sensor types, evaluates the spread statistic (through the aggregation
// protocol when config.use_protocol), and thresholds against gamma.
TrialRecord run_trial(const ScenarioConfig& config, const Placement& placement, int theta,
                      std::uint32_t t, double gamma, std::uint64_t trial_seed);

// The Monte Carlo kernel: `trials` statistics at one (placement, theta, t)
// point, trial i seeded with derive_seed(block_seed, {i}).  The two variants
// are bit-identical; the parallel one fans trials across OpenMP threads.
std::vector<double> statistic_block_serial(const std::vector<std::vector<double>>& sensor_pmfs,
                                           std::uint32_t t, std::uint32_t trials,
                                           std::uint64_t block_seed, std::uint32_t precision);
std::vector<double> statistic_block_parallel(const std::vector<std::vector<double>>& sensor_pmfs,
                                             std::uint32_t t, std::uint32_t trials,
                                             std::uint64_t block_seed, std::uint32_t precision,
                                             std::uint32_t workers);

struct StudyRow {
  std::uint32_t t = 0;
  double lambda_target = 0.0;
  double gamma = 0.0;
  double exponent = 0.0;  // -(1/t) log2(mu); +infinity when no false alarm was seen
  double mu = 0.0;        // worst-case false-alarm rate over placements
  double stderr_exponent = 0.0;
  std::vector<double> placement_mu;  // per-placement rates behind the max
};

struct RocPoint {
  std::uint32_t sensors = 0;
  double gamma = 0.0;
  double mu = 0.0;      // worst-case false-alarm rate
  double lambda = 0.0;  // worst-case miss rate
};

struct StudyResult {
  ScenarioConfig config;
  std::vector<Placement> placements;
  std::vector<StudyRow> rows;
  std::vector<RocPoint> roc;  // sensors in {K-1, K} at t = roc_t

  // CSV: t,lambda_target,gamma,exponent_estimate,mu,stderr
  std::string exponents_csv() const;
  // CSV: K,gamma,mu,lambda
  std::string roc_csv() const;
};

StudyResult run_study(const ScenarioConfig& config);

// Piecewise-linear interpolation of the miss rate at a false-alarm target,
// for ROC comparisons at matched operating points.
double roc_miss_at(const std::vector<RocPoint>& points, std::uint32_t sensors, double mu);

}  // namespace zms::scenario
