#include "zms/ring.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>
#include <string>

namespace zms::ring {

namespace {
// Keeps size() comfortably inside uint64 arithmetic: upper <= 2^16 and
// precision <= 40 give size <= 2^56, so even a + b cannot overflow.
constexpr std::uint32_t kMaxUpper = 1u << 16;
constexpr std::uint32_t kMaxPrecision = 40;
}  // namespace

RingParams::RingParams(std::uint32_t upper_bound, std::uint32_t precision_bits)
    : upper(upper_bound), precision(precision_bits) {
  if (upper == 0) throw std::invalid_argument("RingParams: upper bound must be positive");
  if (upper > kMaxUpper)
    throw capability_error("RingParams: upper bound above " + std::to_string(kMaxUpper));
  if (precision > kMaxPrecision)
    throw capability_error("RingParams: precision above " + std::to_string(kMaxPrecision) + " bits");
}

double RingParams::spacing() const { return std::ldexp(1.0, -static_cast<int>(precision)); }

std::size_t RingParams::byte_width() const {
  const std::uint64_t max_tick = size() - 1;
  const unsigned bits = max_tick == 0 ? 1u : static_cast<unsigned>(std::bit_width(max_tick));
  return (bits + 7) / 8;
}

RingElement from_ticks(const RingParams& params, std::uint64_t ticks) {
  if (ticks >= params.size())
    throw std::invalid_argument("from_ticks: tick count " + std::to_string(ticks) +
                                " outside ring of size " + std::to_string(params.size()));
  return RingElement{ticks};
}

RingElement from_real(const RingParams& params, double value) {
  if (!(value >= 0.0) || value >= static_cast<double>(params.upper))
    throw std::invalid_argument("from_real: value outside [0, upper)");
  const double scaled = std::floor(std::ldexp(value, static_cast<int>(params.precision)) + 0.5);
  std::uint64_t ticks = static_cast<std::uint64_t>(scaled);
  if (ticks == params.size()) ticks = 0;  // upper - epsilon rounded up wraps to 0
  return RingElement{ticks};
}

double to_real(const RingParams& params, RingElement a) {
  return std::ldexp(static_cast<double>(a.ticks), -static_cast<int>(params.precision));
}

RingElement add(const RingParams& params, RingElement a, RingElement b) {
  const std::uint64_t n = params.size();
  std::uint64_t s = a.ticks + b.ticks;
  if (s >= n) s -= n;
  return RingElement{s};
}

RingElement sub(const RingParams& params, RingElement a, RingElement b) {
  const std::uint64_t n = params.size();
  return RingElement{a.ticks >= b.ticks ? a.ticks - b.ticks : n - (b.ticks - a.ticks)};
}

RingElement neg(const RingParams& params, RingElement a) {
  return a.ticks == 0 ? RingElement{0} : RingElement{params.size() - a.ticks};
}

RingElement sum_mod(const RingParams& params, std::span<const RingElement> elems) {
  RingElement acc{0};
  for (RingElement e : elems) acc = add(params, acc, e);
  return acc;
}

std::vector<std::uint8_t> serialize(const RingParams& params, std::span<const RingElement> elems) {
  const std::size_t w = params.byte_width();
  std::vector<std::uint8_t> out;
  out.reserve(w * elems.size());
  for (RingElement e : elems) {
    std::uint64_t t = e.ticks;
    for (std::size_t i = 0; i < w; ++i) {
      out.push_back(static_cast<std::uint8_t>(t & 0xff));
      t >>= 8;
    }
  }
  return out;
}

std::vector<RingElement> deserialize(const RingParams& params, std::span<const std::uint8_t> bytes) {
  const std::size_t w = params.byte_width();
  if (bytes.size() % w != 0)
    throw std::invalid_argument("deserialize: byte count not a multiple of element width");
  std::vector<RingElement> out;
  out.reserve(bytes.size() / w);
  for (std::size_t off = 0; off < bytes.size(); off += w) {
    std::uint64_t t = 0;
    for (std::size_t i = 0; i < w; ++i) t |= static_cast<std::uint64_t>(bytes[off + i]) << (8 * i);
    out.push_back(from_ticks(params, t));
  }
  return out;
}

}  // namespace zms::ring
