#pragma once
// Fixed-point modular ring.
//
// Values are the grid { j * 2^-precision : 0 <= j < upper * 2^precision },
// i.e. the interval [0, upper) sampled every 2^-precision.  Elements are
// stored as integer tick counts, so addition and subtraction modulo
// upper * 2^precision ticks are bit-exact; no floating-point rounding can
// enter the group operations.
//
// Serialization: each element is its tick count, unsigned little-endian,
// using byte_width() bytes (the minimum needed for size() - 1).

#include <cstdint>
#include <span>
#include <vector>

#include "zms/errors.hpp"

namespace zms::ring {

struct RingParams {
  std::uint32_t upper = 1;      // ring spans [0, upper)
  std::uint32_t precision = 0;  // grid spacing is 2^-precision

  RingParams() = default;
  RingParams(std::uint32_t upper_bound, std::uint32_t precision_bits);

  // Number of distinct elements: upper * 2^precision ticks.
  std::uint64_t size() const { return static_cast<std::uint64_t>(upper) << precision; }
  double spacing() const;
  // Bytes needed to serialize one element.
  std::size_t byte_width() const;

  friend bool operator==(const RingParams&, const RingParams&) = default;
};

struct RingElement {
  std::uint64_t ticks = 0;

  friend bool operator==(const RingElement&, const RingElement&) = default;
};

// Constructors / converters ------------------------------------------------

// Validates 0 <= ticks < params.size().
RingElement from_ticks(const RingParams& params, std::uint64_t ticks);

// Nearest grid point, ties rounding up; value must lie in [0, upper).
RingElement from_real(const RingParams& params, double value);

double to_real(const RingParams& params, RingElement a);

// Group operations ----------------------------------------------------------

RingElement add(const RingParams& params, RingElement a, RingElement b);
RingElement sub(const RingParams& params, RingElement a, RingElement b);
RingElement neg(const RingParams& params, RingElement a);

// Fold of add over a span; empty input yields the identity.
RingElement sum_mod(const RingParams& params, std::span<const RingElement> elems);

// Serialization --------------------------------------------------------------

std::vector<std::uint8_t> serialize(const RingParams& params, std::span<const RingElement> elems);
std::vector<RingElement> deserialize(const RingParams& params, std::span<const std::uint8_t> bytes);

}  // namespace zms::ring
