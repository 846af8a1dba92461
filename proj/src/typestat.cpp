#include "zms/typestat.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace zms::typestat {

EmpiricalType make_type(std::vector<std::uint32_t> counts) {
  if (counts.empty()) throw std::invalid_argument("make_type: empty alphabet");
  std::uint64_t total = std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
  if (total == 0) throw std::invalid_argument("make_type: zero samples");
  if (total > std::numeric_limits<std::uint32_t>::max())
    throw std::invalid_argument("make_type: sample count overflow");
  return EmpiricalType{std::move(counts), static_cast<std::uint32_t>(total)};
}

namespace {

ring::RingElement quantize_one(double prob, const ring::RingParams& params) {
  const std::uint64_t full = std::uint64_t{1} << params.precision;
  const double q = std::sqrt(prob);
  std::uint64_t tick =
      static_cast<std::uint64_t>(std::floor(std::ldexp(q, static_cast<int>(params.precision)) + 0.5));
  if (tick >= full) tick = full - 1;  // sqrt(1) clamps below 1.0
  return ring::RingElement{tick};
}

}  // namespace

QuantizedSqrtType quantize_sqrt(const EmpiricalType& type, const ring::RingParams& params) {
  QuantizedSqrtType out{params, {}};
  out.value.reserve(type.counts.size());
  for (std::size_t x = 0; x < type.counts.size(); ++x) {
    out.value.push_back(quantize_one(type.probability(x), params));
  }
  return out;
}

QuantizedSqrtType quantize_sqrt(const std::vector<double>& probs, const ring::RingParams& params) {
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || p > 1.0) throw std::invalid_argument("quantize_sqrt: probability outside [0,1]");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("quantize_sqrt: probabilities do not sum to 1");
  QuantizedSqrtType out{params, {}};
  out.value.reserve(probs.size());
  for (double p : probs) out.value.push_back(quantize_one(p, params));
  return out;
}

double hellinger_sq(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw std::invalid_argument("hellinger_sq: alphabet mismatch");
  double bc = 0.0;
  for (std::size_t x = 0; x < p.size(); ++x) bc += std::sqrt(p[x] * q[x]);
  return 1.0 - bc;
}

double hellinger_diameter(const std::vector<std::vector<double>>& marginals) {
  if (marginals.empty()) throw std::invalid_argument("hellinger_diameter: no marginals");
  const std::size_t s = marginals.front().size();
  const double k = static_cast<double>(marginals.size());
  double acc = 0.0;
  for (std::size_t x = 0; x < s; ++x) {
    double col = 0.0;
    for (const auto& m : marginals) {
      if (m.size() != s) throw std::invalid_argument("hellinger_diameter: alphabet mismatch");
      col += std::sqrt(m[x]);
    }
    acc += col * col;
  }
  return k * k - acc;
}

double quantized_diameter(const MarginalVector& marginals) {
  if (marginals.empty()) throw std::invalid_argument("quantized_diameter: no marginals");
  const std::size_t s = marginals.front().alphabet();
  const double k = static_cast<double>(marginals.size());
  double acc = 0.0;
  for (std::size_t x = 0; x < s; ++x) {
    double col = 0.0;
    for (const auto& m : marginals) {
      if (m.alphabet() != s) throw std::invalid_argument("quantized_diameter: alphabet mismatch");
      col += m.real(x);
    }
    acc += col * col;
  }
  return k * k - acc;
}

double diameter_upper_bound(std::uint32_t k, std::uint32_t s) {
  if (k == 0 || s == 0) throw std::invalid_argument("diameter_upper_bound: zero arguments");
  const double kk = static_cast<double>(k);
  const double q = static_cast<double>(k / s);
  const double r = static_cast<double>(k % s);
  return kk * (kk - 1.0) - q * (kk - static_cast<double>(s) + r);
}

}  // namespace zms::typestat
