#pragma once
// Three-phase privacy-preserving aggregation protocol.
//
// Phase 1: every sensor generates a key pair and broadcasts the public half.
// Phase 2: sensor k draws one uniform ring mask R_{k,l}(x) per foreign sensor
//          l and symbol x, sets the diagonal R_{k,k}(x) so its row sums to
//          zero, and sends each off-diagonal entry encrypted under sensor l's
//          key.  Each sensor decrypts its own column and stores the column
//          sum S_k(x) = sum_l R_{l,k}(x) (mod ring).
// Phase 3: sensor k broadcasts G_k(x) = Q_k(x) + S_k(x) (mod ring), where
//          Q_k is its quantized square-root type.  Because the S_k sum to
//          zero, sum_k G_k(x) = sum_k Q_k(x) < K < upper, so the fusion
//          center recovers the spread statistic
//              d~ = K^2 - sum_x (sum_k G_k(x))^2
//          exactly as if the types had been sent in the clear.
//
// Wire format (16-byte header, little-endian multi-byte fields):
//   offset 0   magic 0x5A 0x53
//          2   version (1)
//          3   phase (1..3)
//          4   message type (1 announce, 2 mask ciphertext, 3 report)
//          5   sender (1..K; 0 is the fusion center)
//          6   receiver (1..K, or 0xFF broadcast)
//          7   K
//          8   N (u16)
//          10  precision m
//          11  alphabet size (u16)
//          13  payload length (u16)
//          15  reserved (0)
// Payloads:
//   announce        public key wire form (tag, u16 bits, key bytes)
//   mask ciphertext u16 symbol index, then ciphertext wire form
//   report          alphabet-size ring elements, fixed width, little-endian
//
// The transport is an in-process broadcast bus delivering messages in a
// deterministic round-robin order per phase; every message is appended to a
// replayable JSON-lines transcript.  The honest model never aborts, but
// malformed input fails fast: decryption failures raise protocol_error
// naming the offending sender and phase.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "zms/crypto.hpp"
#include "zms/errors.hpp"
#include "zms/ring.hpp"
#include "zms/rng.hpp"
#include "zms/typestat.hpp"

namespace zms::protocol {

struct ProtocolParams {
  std::uint32_t sensors = 0;    // K
  ring::RingParams ring_p;      // (N, m); requires N > K
  std::uint32_t alphabet = 0;   // |X|
  crypto::SchemeKind scheme_kind = crypto::SchemeKind::Group;
  std::uint32_t security_bits = 64;

  void validate() const;
  friend bool operator==(const ProtocolParams&, const ProtocolParams&) = default;
};

enum class MsgType : std::uint8_t { PublicKeyAnnounce = 1, MaskCiphertext = 2, ObfuscatedReport = 3 };

constexpr std::uint8_t kBroadcast = 0xff;
constexpr std::uint8_t kFusionId = 0;

struct ObfuscatedMessage {
  std::uint8_t sensor = 0;
  std::vector<ring::RingElement> g;  // one element per symbol

  friend bool operator==(const ObfuscatedMessage&, const ObfuscatedMessage&) = default;
};

struct ProtocolMessage {
  std::uint8_t phase = 0;
  MsgType type = MsgType::PublicKeyAnnounce;
  std::uint8_t sender = 0;
  std::uint8_t receiver = kBroadcast;
  ProtocolParams params;  // scheme fields not carried on the wire

  // exactly one of these is meaningful, per `type`
  crypto::PublicKey announce_key;
  std::uint16_t symbol = 0;
  crypto::Ciphertext mask_ct;
  std::vector<ring::RingElement> report;

  std::vector<std::uint8_t> serialize() const;
  static ProtocolMessage parse(std::span<const std::uint8_t> wire,
                               const ProtocolParams& expected);
};

// One mask row: entry(l-1, x) = R_{k,l}(x) for the row's owner k.
struct MaskRow {
  std::uint32_t sensors = 0;
  std::uint32_t alphabet = 0;
  std::vector<ring::RingElement> entries;  // (l, x) -> entries[l * alphabet + x]

  ring::RingElement& at(std::uint32_t l, std::uint32_t x) { return entries[l * alphabet + x]; }
  const ring::RingElement& at(std::uint32_t l, std::uint32_t x) const {
    return entries[l * alphabet + x];
  }
};

// Draws a full row for sensor k: off-diagonal uniform, diagonal balancing.
MaskRow draw_mask_row(const ProtocolParams& params, std::uint32_t k, rng::Engine& eng);
// Verifies the diagonal constraint R_{k,k}(x) = -(sum of off-diagonal).
void validate_mask_row(const ProtocolParams& params, std::uint32_t k, const MaskRow& row);

// Test-only injection points (used by the adversary games).
struct SensorHooks {
  std::function<crypto::KeyPair(rng::Engine&)> keygen;  // replaces key generation
  std::function<MaskRow(rng::Engine&)> masks;           // replaces the mask row (validated)
};

struct TranscriptEntry {
  std::uint64_t seq = 0;
  ProtocolMessage message;
  std::vector<std::uint8_t> wire;
};

struct Transcript {
  std::vector<TranscriptEntry> entries;

  std::string to_jsonl() const;
  // Parses and re-validates every line against `params`.
  static Transcript from_jsonl(const std::string& text, const ProtocolParams& params);
};

class SensorEngine {
 public:
  // k is 1-based.  The engine owns its deterministic randomness.
  SensorEngine(const ProtocolParams& params, std::uint8_t k, const crypto::EncryptionScheme* scheme,
               std::uint64_t seed, SensorHooks hooks = {});

  void load_measurements(const typestat::EmpiricalType& type);
  void load_type(const typestat::QuantizedSqrtType& type);

  ProtocolMessage phase1_announce();
  void receive_announce(const ProtocolMessage& msg);
  std::vector<ProtocolMessage> phase2_exchange();
  void receive_mask_ciphertext(const ProtocolMessage& msg);
  ProtocolMessage phase3_report();

  std::uint8_t id() const { return k_; }
  // Column sum S_k(x); valid once all foreign ciphertexts are in.
  const std::vector<ring::RingElement>& column_sum() const;
  const typestat::QuantizedSqrtType& quantized_type() const;

 private:
  enum class State { Fresh, Loaded, Announced, Exchanged, Reported };
  void expect(State s, const char* op) const;
  void require_complete_column() const;

  ProtocolParams params_;
  std::uint8_t k_;
  const crypto::EncryptionScheme* scheme_;
  rng::Engine eng_;
  SensorHooks hooks_;
  State state_ = State::Fresh;

  std::optional<typestat::QuantizedSqrtType> type_;
  crypto::KeyPair keys_;
  std::vector<std::optional<crypto::PublicKey>> foreign_keys_;  // by sensor id 1..K
  MaskRow row_;
  std::vector<ring::RingElement> column_sum_;  // S_k(x)
  std::vector<bool> column_seen_;              // (sender id 1..K) * alphabet + symbol
};

class FusionEngine {
 public:
  explicit FusionEngine(const ProtocolParams& params);

  void receive_report(const ProtocolMessage& msg);
  bool complete() const;
  double statistic() const;              // requires complete()
  int decide(double threshold) const;    // 1 = event detected
  const std::vector<ObfuscatedMessage>& reports() const { return reports_; }

 private:
  ProtocolParams params_;
  std::vector<ObfuscatedMessage> reports_;
  std::vector<bool> seen_;
};

// d~ = K^2 - sum_x (real value of the modular report sum)^2.
double fusion_statistic(const ProtocolParams& params, const std::vector<ObfuscatedMessage>& reports);

struct ProtocolResult {
  int decision = 0;        // 1 = event detected
  double statistic = 0.0;
  std::vector<ObfuscatedMessage> reports;
  Transcript transcript;
};

// Drives the full three-phase exchange over the in-process bus.
// `types` supplies one quantized type per sensor (index 0 is sensor 1).
// `hooks`, when given, must have one entry per sensor.
ProtocolResult run_protocol(const ProtocolParams& params,
                            const std::vector<typestat::QuantizedSqrtType>& types, double threshold,
                            std::uint64_t seed, const std::vector<SensorHooks>* hooks = nullptr);

}  // namespace zms::protocol
