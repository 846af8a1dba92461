#pragma once
// Small shared statistics helpers.

#include <boost/math/distributions/chi_squared.hpp>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace zms::stats {

// Pearson goodness-of-fit p-value for observed counts against expected
// counts (same length, expected strictly positive).  Degrees of freedom are
// cells - 1 unless overridden.
inline double chi_square_p_value(const std::vector<std::uint64_t>& observed,
                                 const std::vector<double>& expected, int dof_override = -1) {
  if (observed.size() != expected.size() || observed.empty())
    throw std::invalid_argument("chi_square_p_value: size mismatch");
  double stat = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    if (!(expected[i] > 0.0))
      throw std::invalid_argument("chi_square_p_value: expected counts must be positive");
    const double diff = static_cast<double>(observed[i]) - expected[i];
    stat += diff * diff / expected[i];
  }
  const int dof = dof_override >= 0 ? dof_override : static_cast<int>(observed.size()) - 1;
  if (dof <= 0) throw std::invalid_argument("chi_square_p_value: nonpositive degrees of freedom");
  boost::math::chi_squared dist(static_cast<double>(dof));
  return boost::math::cdf(boost::math::complement(dist, stat));
}

}  // namespace zms::stats
