#include "zms/detection.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace zms::detection {

namespace {

void check_gamma(double gamma) {
  if (!(gamma >= 0.0)) {
    throw std::invalid_argument("detection: threshold gamma must be >= 0");
  }
}

}  // namespace

Decision decide_statistic(double statistic, double gamma) {
  check_gamma(gamma);
  if (std::isnan(statistic)) {
    throw std::invalid_argument("detection: statistic is NaN");
  }
  return statistic >= gamma ? Decision::H1 : Decision::H0;
}

Decision diameter_decide(const std::vector<std::vector<double>>& marginals, double gamma) {
  check_gamma(gamma);
  if (marginals.size() < 2) {
    throw std::invalid_argument("detection: spread test needs at least two sensors");
  }
  return decide_statistic(typestat::hellinger_diameter(marginals), gamma);
}

Decision diameter_decide(const typestat::MarginalVector& marginals, double gamma) {
  check_gamma(gamma);
  if (marginals.size() < 2) {
    throw std::invalid_argument("detection: spread test needs at least two sensors");
  }
  return decide_statistic(typestat::quantized_diameter(marginals), gamma);
}

Decision hoeffding_decide(const exponents::JointDistribution& joint, double gamma,
                          const exponents::ExponentProblem& problem) {
  check_gamma(gamma);
  joint.validate();
  if (joint.sensors > 3 || joint.alphabet > 4) {
    throw capability_error(
        "detection: joint-type baseline supports at most 3 sensors over a "
        "4-symbol alphabet; got K=" + std::to_string(joint.sensors) +
        ", |X|=" + std::to_string(joint.alphabet));
  }
  return decide_statistic(exponents::delta0(joint, problem), gamma);
}

double calibrate_threshold(std::vector<double> h1_statistics, double lambda_target) {
  const std::size_t n = h1_statistics.size();
  if (n == 0) {
    throw std::invalid_argument("calibrate_threshold: no statistic samples");
  }
  for (double s : h1_statistics) {
    if (std::isnan(s)) throw std::invalid_argument("calibrate_threshold: NaN statistic sample");
  }
  if (!(lambda_target > 0.0) || lambda_target > 1.0) {
    throw std::invalid_argument("calibrate_threshold: lambda_target must lie in (0, 1]");
  }
  if (lambda_target < 1.0 / static_cast<double>(n)) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "calibrate_threshold: lambda_target %.6g is below the achievable "
                  "resolution 1/n = %.6g for n = %zu samples",
                  lambda_target, 1.0 / static_cast<double>(n), n);
    throw capability_error(buf);
  }
  std::sort(h1_statistics.begin(), h1_statistics.end());
  // Largest j with j/n <= lambda; the small slack absorbs decimal targets
  // (0.3 * 10 must count as 3, not 2).
  const auto jmax =
      static_cast<std::size_t>(std::floor(lambda_target * static_cast<double>(n) + 1e-9));
  if (jmax >= n) {
    // Only reachable at lambda_target == 1: every sample may miss, so any
    // threshold just above the maximum works; return the tightest one.
    return std::nextafter(h1_statistics.back(), std::numeric_limits<double>::infinity());
  }
  // With gamma equal to the (jmax+1)-th order statistic, exactly the samples
  // strictly below it miss, and there are at most jmax of those.
  return h1_statistics[jmax];
}

double calibrate_worst_case(const std::vector<std::vector<double>>& per_config_statistics,
                            double lambda_target) {
  if (per_config_statistics.empty()) {
    throw std::invalid_argument("calibrate_worst_case: no configurations");
  }
  double gamma = std::numeric_limits<double>::infinity();
  for (const auto& samples : per_config_statistics) {
    gamma = std::min(gamma, calibrate_threshold(samples, lambda_target));
  }
  return gamma;
}

std::string records_to_csv(const std::vector<StatisticRecord>& records) {
  std::string out = "config_id,theta,t,statistic\n";
  char buf[96];
  for (const auto& r : records) {
    if (r.theta != 0 && r.theta != 1) {
      throw std::invalid_argument("records_to_csv: theta must be 0 or 1");
    }
    std::snprintf(buf, sizeof buf, "%u,%d,%u,%.12g\n", r.config_id, r.theta, r.t, r.statistic);
    out += buf;
  }
  return out;
}

std::vector<StatisticRecord> records_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "config_id,theta,t,statistic") {
    throw std::invalid_argument("records_from_csv: missing or wrong header line");
  }
  std::vector<StatisticRecord> records;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    StatisticRecord r;
    char trail = 0;
    if (std::sscanf(line.c_str(), "%u,%d,%u,%lf%c", &r.config_id, &r.theta, &r.t, &r.statistic,
                    &trail) != 4) {
      throw std::invalid_argument("records_from_csv: malformed row at line " +
                                  std::to_string(lineno));
    }
    if (r.theta != 0 && r.theta != 1) {
      throw std::invalid_argument("records_from_csv: theta must be 0 or 1 at line " +
                                  std::to_string(lineno));
    }
    records.push_back(r);
  }
  return records;
}

}  // namespace zms::detection
