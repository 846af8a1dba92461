#pragma once
// Empirical types and quantized square-root statistics.
//
// An EmpiricalType is a count vector over a finite alphabet.  Sensors do not
// exchange raw types: each sensor takes the elementwise square root of its
// type and rounds it onto the fixed-point grid of a ring (nearest tick, half
// up).  Roots that would round to the tick at 1.0 (anything above
// 1 - 2^-(precision+1), including sqrt(1) itself) clamp to the largest tick
// below 1, which widens the rounding error there to one full step.
//
// The spread statistic over K marginals p_1..p_K is the pairwise sum of
// squared Hellinger distances,
//
//     d(p) = sum_{k != l} (1 - sum_x sqrt(p_k(x) p_l(x)))
//          = K^2 - sum_x (sum_k sqrt(p_k(x)))^2,
//
// which is zero iff all marginals coincide.  The quantized variant evaluates
// the same form on rounded square roots; its value can dip slightly below
// zero or exceed the exact maximum by at most 2^-precision * K^2 * |X|.

#include <cstdint>
#include <vector>

#include "zms/ring.hpp"

namespace zms::typestat {

struct EmpiricalType {
  std::vector<std::uint32_t> counts;
  std::uint32_t samples = 0;  // sum of counts

  double probability(std::size_t x) const {
    return static_cast<double>(counts.at(x)) / static_cast<double>(samples);
  }
};

// Builds a type from counts, validating consistency.
EmpiricalType make_type(std::vector<std::uint32_t> counts);

// Quantized square roots of a probability vector, stored as ring ticks.
struct QuantizedSqrtType {
  ring::RingParams params;
  std::vector<ring::RingElement> value;  // one tick count per symbol

  double real(std::size_t x) const { return ring::to_real(params, value.at(x)); }
  std::size_t alphabet() const { return value.size(); }
};

using MarginalVector = std::vector<QuantizedSqrtType>;

// Quantizes sqrt(p(x)) for each symbol; nearest tick, half up, sqrt(1)
// clamped to 2^precision - 1.
QuantizedSqrtType quantize_sqrt(const EmpiricalType& type, const ring::RingParams& params);
QuantizedSqrtType quantize_sqrt(const std::vector<double>& probs, const ring::RingParams& params);

// Exact spread statistic on real-valued marginals (rows of `marginals` are
// probability vectors over a shared alphabet).
double hellinger_diameter(const std::vector<std::vector<double>>& marginals);

// Same form evaluated on quantized square roots.
double quantized_diameter(const MarginalVector& marginals);

// Pairwise squared Hellinger distance 1 - sum_x sqrt(p(x) q(x)).
double hellinger_sq(const std::vector<double>& p, const std::vector<double>& q);

// Largest achievable spread for K marginals on an alphabet of size s:
// K(K-1) - floor(K/s) * (K - s + K mod s).
double diameter_upper_bound(std::uint32_t k, std::uint32_t s);

}  // namespace zms::typestat
