#pragma once
// Decision rules over measurement types, and empirical threshold calibration.
//
// Two tests share the same thresholding convention (H1 iff statistic >= gamma):
//   - the spread test on the Hellinger diameter of per-sensor types, usable
//     with exact probabilities or quantized square-root types (the statistic
//     the aggregation protocol reproduces);
//   - a joint-type baseline that thresholds the relative-entropy projection
//     delta0 of the full joint type (needs every sensor's raw data in one
//     place, so it serves as a non-private reference point).
//
// calibrate_threshold implements the conservative empirical-quantile rule:
// given statistic samples drawn under H1 and a target miss rate lambda, it
// returns the largest gamma such that the fraction of samples strictly below
// gamma is at most lambda.  Conventions, documented here once:
//   - lambda = 1 returns the next double above the sample maximum;
//   - lambda below the 1/n resolution of the sample set is refused with a
//     capability_error naming the achievable floor.

#include <cstdint>
#include <string>
#include <vector>

#include "zms/errors.hpp"
#include "zms/exponents.hpp"
#include "zms/typestat.hpp"

namespace zms::detection {

enum class Decision { H0 = 0, H1 = 1 };

// The shared rule: H1 iff statistic >= gamma (gamma must be >= 0).
Decision decide_statistic(double statistic, double gamma);

// Spread test on exact marginals (H1 iff Hellinger diameter >= gamma).
Decision diameter_decide(const std::vector<std::vector<double>>& marginals, double gamma);
// Spread test on quantized square-root types.
Decision diameter_decide(const typestat::MarginalVector& marginals, double gamma);

// Joint-type baseline: H1 iff delta0(joint) >= gamma, with delta0 taken from
// the exponents module under `problem` (its d0 and family apply).  Supports
// joint.sensors <= 3 and joint.alphabet <= 4; larger instances are refused.
Decision hoeffding_decide(const exponents::JointDistribution& joint, double gamma,
                          const exponents::ExponentProblem& problem);

// Largest gamma whose empirical miss fraction is within lambda_target.
double calibrate_threshold(std::vector<double> h1_statistics, double lambda_target);

// Worst case over configurations: the bound must hold for every
// configuration, so the result is the smallest per-configuration threshold.
double calibrate_worst_case(const std::vector<std::vector<double>>& per_config_statistics,
                            double lambda_target);

// Statistic samples as CSV with columns config_id,theta,t,statistic.
struct StatisticRecord {
  std::uint32_t config_id = 0;
  int theta = 0;  // 0 = null hypothesis, 1 = event present
  std::uint32_t t = 0;
  double statistic = 0.0;

  friend bool operator==(const StatisticRecord&, const StatisticRecord&) = default;
};

std::string records_to_csv(const std::vector<StatisticRecord>& records);
std::vector<StatisticRecord> records_from_csv(const std::string& text);

}  // namespace zms::detection
