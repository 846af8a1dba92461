#include "zms/protocol.hpp"

#include <json.hpp>

#include <algorithm>
#include <sstream>

namespace zms::protocol {

namespace {

constexpr std::uint8_t kMagic0 = 0x5a;
constexpr std::uint8_t kMagic1 = 0x53;
constexpr std::uint8_t kVersion = 1;
constexpr std::size_t kHeaderSize = 16;

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

std::uint16_t get_u16(std::span<const std::uint8_t> in, std::size_t off) {
  return static_cast<std::uint16_t>(in[off]) | (static_cast<std::uint16_t>(in[off + 1]) << 8);
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xf]);
  }
  return out;
}

std::vector<std::uint8_t> from_hex(const std::string& hex) {
  if (hex.size() % 2 != 0) throw std::invalid_argument("from_hex: odd length");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw std::invalid_argument("from_hex: bad digit");
  };
  std::vector<std::uint8_t> out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<std::uint8_t>((nibble(hex[2 * i]) << 4) | nibble(hex[2 * i + 1]));
  }
  return out;
}

const char* type_name(MsgType t) {
  switch (t) {
    case MsgType::PublicKeyAnnounce: return "announce";
    case MsgType::MaskCiphertext:    return "mask";
    case MsgType::ObfuscatedReport:  return "report";
  }
  return "unknown";
}

}  // namespace

void ProtocolParams::validate() const {
  if (sensors < 2) throw std::invalid_argument("ProtocolParams: need at least two sensors");
  if (sensors > 250) throw capability_error("ProtocolParams: more than 250 sensors unsupported");
  if (ring_p.upper <= sensors)
    throw std::invalid_argument("ProtocolParams: ring upper bound must exceed sensor count");
  if (alphabet == 0 || alphabet > 0xffff)
    throw std::invalid_argument("ProtocolParams: alphabet size out of range");
}

// --- wire format -------------------------------------------------------------

std::vector<std::uint8_t> ProtocolMessage::serialize() const {
  std::vector<std::uint8_t> payload;
  switch (type) {
    case MsgType::PublicKeyAnnounce: {
      payload = announce_key.serialize();
      break;
    }
    case MsgType::MaskCiphertext: {
      put_u16(payload, symbol);
      const auto ct = mask_ct.serialize();
      payload.insert(payload.end(), ct.begin(), ct.end());
      break;
    }
    case MsgType::ObfuscatedReport: {
      payload = ring::serialize(params.ring_p, report);
      break;
    }
  }
  if (payload.size() > 0xffff) throw std::invalid_argument("ProtocolMessage: payload too long");

  std::vector<std::uint8_t> out;
  out.reserve(kHeaderSize + payload.size());
  out.push_back(kMagic0);
  out.push_back(kMagic1);
  out.push_back(kVersion);
  out.push_back(phase);
  out.push_back(static_cast<std::uint8_t>(type));
  out.push_back(sender);
  out.push_back(receiver);
  out.push_back(static_cast<std::uint8_t>(params.sensors));
  put_u16(out, static_cast<std::uint16_t>(params.ring_p.upper));
  out.push_back(static_cast<std::uint8_t>(params.ring_p.precision));
  put_u16(out, static_cast<std::uint16_t>(params.alphabet));
  put_u16(out, static_cast<std::uint16_t>(payload.size()));
  out.push_back(0);
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

ProtocolMessage ProtocolMessage::parse(std::span<const std::uint8_t> wire,
                                       const ProtocolParams& expected) {
  if (wire.size() < kHeaderSize) throw std::invalid_argument("ProtocolMessage: truncated header");
  if (wire[0] != kMagic0 || wire[1] != kMagic1)
    throw std::invalid_argument("ProtocolMessage: bad magic");
  if (wire[2] != kVersion) throw std::invalid_argument("ProtocolMessage: unsupported version");

  ProtocolMessage msg;
  msg.phase = wire[3];
  msg.type = static_cast<MsgType>(wire[4]);
  msg.sender = wire[5];
  msg.receiver = wire[6];
  msg.params = expected;

  const std::uint32_t k = wire[7];
  const std::uint32_t upper = get_u16(wire, 8);
  const std::uint32_t precision = wire[10];
  const std::uint32_t alphabet = get_u16(wire, 11);
  if (k != expected.sensors || upper != expected.ring_p.upper ||
      precision != expected.ring_p.precision || alphabet != expected.alphabet)
    throw protocol_error("ProtocolMessage: header parameters disagree with configuration",
                         msg.sender, msg.phase);

  const std::size_t len = get_u16(wire, 13);
  if (wire.size() != kHeaderSize + len)
    throw std::invalid_argument("ProtocolMessage: payload length mismatch");
  const auto payload = wire.subspan(kHeaderSize);

  switch (msg.type) {
    case MsgType::PublicKeyAnnounce:
      msg.announce_key = crypto::PublicKey::parse(payload);
      break;
    case MsgType::MaskCiphertext: {
      if (payload.size() < 2) throw std::invalid_argument("ProtocolMessage: truncated mask payload");
      msg.symbol = get_u16(payload, 0);
      if (msg.symbol >= expected.alphabet)
        throw std::invalid_argument("ProtocolMessage: symbol index out of range");
      msg.mask_ct = crypto::Ciphertext::parse(payload.subspan(2));
      break;
    }
    case MsgType::ObfuscatedReport: {
      msg.report = ring::deserialize(expected.ring_p, payload);
      if (msg.report.size() != expected.alphabet)
        throw std::invalid_argument("ProtocolMessage: report alphabet mismatch");
      break;
    }
    default:
      throw std::invalid_argument("ProtocolMessage: unknown message type");
  }
  return msg;
}

// --- masks ---------------------------------------------------------------------

MaskRow draw_mask_row(const ProtocolParams& params, std::uint32_t k, rng::Engine& eng) {
  MaskRow row{params.sensors, params.alphabet, {}};
  row.entries.assign(static_cast<std::size_t>(params.sensors) * params.alphabet, ring::RingElement{0});
  for (std::uint32_t x = 0; x < params.alphabet; ++x) {
    ring::RingElement off_sum{0};
    for (std::uint32_t l = 0; l < params.sensors; ++l) {
      if (l + 1 == k) continue;
      const ring::RingElement r{eng.below(params.ring_p.size())};
      row.at(l, x) = r;
      off_sum = ring::add(params.ring_p, off_sum, r);
    }
    row.at(k - 1, x) = ring::neg(params.ring_p, off_sum);
  }
  return row;
}

void validate_mask_row(const ProtocolParams& params, std::uint32_t k, const MaskRow& row) {
  if (row.sensors != params.sensors || row.alphabet != params.alphabet ||
      row.entries.size() != static_cast<std::size_t>(params.sensors) * params.alphabet)
    throw disqualified_error("mask row has wrong shape");
  for (const auto& e : row.entries) {
    if (e.ticks >= params.ring_p.size()) throw disqualified_error("mask row entry outside ring");
  }
  for (std::uint32_t x = 0; x < params.alphabet; ++x) {
    ring::RingElement total{0};
    for (std::uint32_t l = 0; l < params.sensors; ++l) {
      total = ring::add(params.ring_p, total, row.at(l, x));
    }
    if (!(total == ring::RingElement{0}))
      throw disqualified_error("mask row violates the zero-sum diagonal constraint at symbol " +
                               std::to_string(x) + " for sensor " + std::to_string(k));
  }
}

// --- sensor engine ----------------------------------------------------------------

SensorEngine::SensorEngine(const ProtocolParams& params, std::uint8_t k,
                           const crypto::EncryptionScheme* scheme, std::uint64_t seed,
                           SensorHooks hooks)
    : params_(params),
      k_(k),
      scheme_(scheme),
      eng_(rng::derive_seed(seed, {0x5e5e, k})),
      hooks_(std::move(hooks)) {
  params_.validate();
  if (k_ == 0 || k_ > params_.sensors)
    throw std::invalid_argument("SensorEngine: sensor id out of range");
  if (scheme_ == nullptr) throw std::invalid_argument("SensorEngine: null scheme");
  foreign_keys_.resize(params_.sensors + 1);
  column_seen_.assign(static_cast<std::size_t>(params_.sensors + 1) * params_.alphabet, false);
  column_sum_.assign(params_.alphabet, ring::RingElement{0});
}

void SensorEngine::expect(State s, const char* op) const {
  if (state_ != s)
    throw protocol_error(std::string(op) + ": engine not in the required state", k_,
                         static_cast<int>(state_));
}

void SensorEngine::load_measurements(const typestat::EmpiricalType& type) {
  expect(State::Fresh, "load_measurements");
  if (type.counts.size() != params_.alphabet)
    throw std::invalid_argument("load_measurements: alphabet mismatch");
  type_ = typestat::quantize_sqrt(type, params_.ring_p);
  state_ = State::Loaded;
}

void SensorEngine::load_type(const typestat::QuantizedSqrtType& type) {
  expect(State::Fresh, "load_type");
  if (type.value.size() != params_.alphabet || !(type.params == params_.ring_p))
    throw std::invalid_argument("load_type: shape mismatch");
  type_ = type;
  state_ = State::Loaded;
}

ProtocolMessage SensorEngine::phase1_announce() {
  expect(State::Loaded, "phase1_announce");
  keys_ = hooks_.keygen ? hooks_.keygen(eng_) : scheme_->keygen(eng_);
  state_ = State::Announced;

  ProtocolMessage msg;
  msg.phase = 1;
  msg.type = MsgType::PublicKeyAnnounce;
  msg.sender = k_;
  msg.receiver = kBroadcast;
  msg.params = params_;
  msg.announce_key = keys_.public_key;
  return msg;
}

void SensorEngine::receive_announce(const ProtocolMessage& msg) {
  if (msg.type != MsgType::PublicKeyAnnounce || msg.sender == 0 || msg.sender > params_.sensors)
    throw protocol_error("receive_announce: malformed announcement", msg.sender, 1);
  foreign_keys_[msg.sender] = msg.announce_key;
}

std::vector<ProtocolMessage> SensorEngine::phase2_exchange() {
  expect(State::Announced, "phase2_exchange");
  for (std::uint32_t l = 1; l <= params_.sensors; ++l) {
    if (l != k_ && !foreign_keys_[l].has_value())
      throw protocol_error("phase2_exchange: missing public key for sensor " + std::to_string(l),
                           k_, 2);
  }

  row_ = hooks_.masks ? hooks_.masks(eng_) : draw_mask_row(params_, k_, eng_);
  validate_mask_row(params_, k_, row_);

  // own row contributes to own column sum
  for (std::uint32_t x = 0; x < params_.alphabet; ++x) {
    column_sum_[x] = ring::add(params_.ring_p, column_sum_[x], row_.at(k_ - 1, x));
    column_seen_[static_cast<std::size_t>(k_) * params_.alphabet + x] = true;
  }

  std::vector<ProtocolMessage> out;
  out.reserve(static_cast<std::size_t>(params_.sensors - 1) * params_.alphabet);
  for (std::uint32_t l = 1; l <= params_.sensors; ++l) {
    if (l == k_) continue;
    for (std::uint32_t x = 0; x < params_.alphabet; ++x) {
      ProtocolMessage msg;
      msg.phase = 2;
      msg.type = MsgType::MaskCiphertext;
      msg.sender = k_;
      msg.receiver = static_cast<std::uint8_t>(l);
      msg.params = params_;
      msg.symbol = static_cast<std::uint16_t>(x);
      msg.mask_ct = scheme_->encrypt(row_.at(l - 1, x), *foreign_keys_[l], eng_);
      out.push_back(std::move(msg));
    }
  }
  state_ = State::Exchanged;
  return out;
}

void SensorEngine::receive_mask_ciphertext(const ProtocolMessage& msg) {
  if (msg.type != MsgType::MaskCiphertext)
    throw protocol_error("receive_mask_ciphertext: wrong message type", msg.sender, 2);
  if (msg.receiver != k_) return;  // public channel: everyone sees it, only we decrypt ours
  if (msg.sender == 0 || msg.sender > params_.sensors || msg.sender == k_)
    throw protocol_error("receive_mask_ciphertext: bad sender", msg.sender, 2);

  const std::size_t slot = static_cast<std::size_t>(msg.sender) * params_.alphabet + msg.symbol;
  if (column_seen_[slot])
    throw protocol_error("receive_mask_ciphertext: duplicate entry", msg.sender, 2);

  const auto plain = scheme_->decrypt(msg.mask_ct, keys_);
  if (!plain.has_value() || plain->ticks >= params_.ring_p.size())
    throw protocol_error("mask ciphertext from sensor " + std::to_string(msg.sender) +
                             " failed integrity check",
                         msg.sender, 2);
  column_sum_[msg.symbol] = ring::add(params_.ring_p, column_sum_[msg.symbol], *plain);
  column_seen_[slot] = true;
}

void SensorEngine::require_complete_column() const {
  for (std::uint32_t l = 1; l <= params_.sensors; ++l) {
    for (std::uint32_t x = 0; x < params_.alphabet; ++x) {
      if (!column_seen_[static_cast<std::size_t>(l) * params_.alphabet + x])
        throw protocol_error("incomplete round: missing mask ciphertext from sensor " +
                                 std::to_string(l) + " for symbol " + std::to_string(x),
                             l, 2);
    }
  }
}

ProtocolMessage SensorEngine::phase3_report() {
  expect(State::Exchanged, "phase3_report");
  require_complete_column();
  ProtocolMessage msg;
  msg.phase = 3;
  msg.type = MsgType::ObfuscatedReport;
  msg.sender = k_;
  msg.receiver = kBroadcast;
  msg.params = params_;
  msg.report.reserve(params_.alphabet);
  for (std::uint32_t x = 0; x < params_.alphabet; ++x) {
    msg.report.push_back(ring::add(params_.ring_p, type_->value[x], column_sum_[x]));
  }
  state_ = State::Reported;
  return msg;
}

const std::vector<ring::RingElement>& SensorEngine::column_sum() const {
  if (state_ != State::Exchanged && state_ != State::Reported)
    throw protocol_error("column_sum: exchange not complete", k_, 2);
  require_complete_column();
  return column_sum_;
}

const typestat::QuantizedSqrtType& SensorEngine::quantized_type() const {
  if (!type_.has_value()) throw protocol_error("quantized_type: measurements not loaded", k_, 0);
  return *type_;
}

// --- fusion engine ------------------------------------------------------------------

FusionEngine::FusionEngine(const ProtocolParams& params) : params_(params) {
  params_.validate();
  seen_.assign(params_.sensors + 1, false);
}

void FusionEngine::receive_report(const ProtocolMessage& msg) {
  if (msg.type != MsgType::ObfuscatedReport)
    throw protocol_error("receive_report: wrong message type", msg.sender, 3);
  if (msg.sender == 0 || msg.sender > params_.sensors)
    throw protocol_error("receive_report: bad sender", msg.sender, 3);
  if (seen_[msg.sender])
    throw protocol_error("receive_report: duplicate report", msg.sender, 3);
  if (msg.report.size() != params_.alphabet)
    throw protocol_error("receive_report: alphabet mismatch", msg.sender, 3);
  seen_[msg.sender] = true;
  reports_.push_back(ObfuscatedMessage{msg.sender, msg.report});
}

bool FusionEngine::complete() const {
  return reports_.size() == params_.sensors;
}

double FusionEngine::statistic() const {
  if (!complete()) throw protocol_error("statistic: reports missing", kFusionId, 3);
  return fusion_statistic(params_, reports_);
}

int FusionEngine::decide(double threshold) const {
  return statistic() >= threshold ? 1 : 0;
}

double fusion_statistic(const ProtocolParams& params, const std::vector<ObfuscatedMessage>& reports) {
  if (reports.size() != params.sensors)
    throw protocol_error("fusion_statistic: expected " + std::to_string(params.sensors) +
                             " reports, got " + std::to_string(reports.size()),
                         kFusionId, 3);
  const double k = static_cast<double>(params.sensors);
  double acc = 0.0;
  for (std::uint32_t x = 0; x < params.alphabet; ++x) {
    ring::RingElement sum{0};
    for (const auto& rep : reports) {
      if (rep.g.size() != params.alphabet)
        throw protocol_error("fusion_statistic: report alphabet mismatch", rep.sensor, 3);
      sum = ring::add(params.ring_p, sum, rep.g[x]);
    }
    // reduce the modular sum to its real value before squaring
    const double v = ring::to_real(params.ring_p, sum);
    acc += v * v;
  }
  return k * k - acc;
}

// --- transcript ---------------------------------------------------------------------

std::string Transcript::to_jsonl() const {
  std::ostringstream out;
  for (const auto& e : entries) {
    nlohmann::json j{
        {"seq", e.seq},
        {"phase", e.message.phase},
        {"type", type_name(e.message.type)},
        {"sender", e.message.sender},
        {"receiver", e.message.receiver},
        {"bytes", to_hex(e.wire)},
    };
    out << j.dump() << '\n';
  }
  return out.str();
}

Transcript Transcript::from_jsonl(const std::string& text, const ProtocolParams& params) {
  Transcript t;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    TranscriptEntry e;
    e.seq = j.at("seq").get<std::uint64_t>();
    e.wire = from_hex(j.at("bytes").get<std::string>());
    e.message = ProtocolMessage::parse(e.wire, params);
    if (e.message.phase != j.at("phase").get<int>() ||
        e.message.sender != j.at("sender").get<int>())
      throw std::invalid_argument("Transcript: line metadata disagrees with wire bytes");
    t.entries.push_back(std::move(e));
  }
  return t;
}

// --- full run -----------------------------------------------------------------------

ProtocolResult run_protocol(const ProtocolParams& params,
                            const std::vector<typestat::QuantizedSqrtType>& types, double threshold,
                            std::uint64_t seed, const std::vector<SensorHooks>* hooks) {
  params.validate();
  if (types.size() != params.sensors)
    throw std::invalid_argument("run_protocol: need one type per sensor");
  if (hooks != nullptr && hooks->size() != params.sensors)
    throw std::invalid_argument("run_protocol: need one hook set per sensor");
  if (!(threshold >= 0.0)) throw std::invalid_argument("run_protocol: threshold must be >= 0");

  const auto scheme = crypto::make_scheme(params.scheme_kind, params.security_bits);

  std::vector<SensorEngine> sensors;
  sensors.reserve(params.sensors);
  for (std::uint32_t k = 1; k <= params.sensors; ++k) {
    sensors.emplace_back(params, static_cast<std::uint8_t>(k), scheme.get(), seed,
                         hooks ? (*hooks)[k - 1] : SensorHooks{});
    sensors.back().load_type(types[k - 1]);
  }
  FusionEngine fusion(params);

  ProtocolResult result;
  std::uint64_t seq = 0;
  auto log = [&](const ProtocolMessage& msg) {
    result.transcript.entries.push_back(TranscriptEntry{seq++, msg, msg.serialize()});
  };

  // Phase 1: announcements, round-robin by sensor id.
  std::vector<ProtocolMessage> announces;
  for (auto& s : sensors) announces.push_back(s.phase1_announce());
  for (const auto& msg : announces) {
    log(msg);
    for (auto& s : sensors) {
      if (s.id() != msg.sender) s.receive_announce(msg);
    }
  }

  // Phase 2: mask ciphertexts, round-robin by sender.
  std::vector<std::vector<ProtocolMessage>> batches;
  for (auto& s : sensors) batches.push_back(s.phase2_exchange());
  for (const auto& batch : batches) {
    for (const auto& msg : batch) {
      log(msg);
      for (auto& s : sensors) {
        if (s.id() != msg.sender) s.receive_mask_ciphertext(msg);
      }
    }
  }

  // Phase 3: obfuscated reports to the fusion center.
  for (auto& s : sensors) {
    const auto msg = s.phase3_report();
    log(msg);
    fusion.receive_report(msg);
  }

  result.statistic = fusion.statistic();
  result.decision = fusion.decide(threshold);
  result.reports = fusion.reports();
  return result;
}

}  // namespace zms::protocol
