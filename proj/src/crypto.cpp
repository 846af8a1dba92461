#include "zms/crypto.hpp"

#include <openssl/bn.h>
#include <openssl/evp.h>

#include <array>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "zms/errors.hpp"

namespace zms::crypto {

namespace {

// --- plaintext block: 8-byte LE tick count + 4-byte checksum ---------------

constexpr std::size_t kBlockSize = 12;

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> data) {
  std::array<std::uint8_t, 32> out{};
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
      len != 32) {
    throw std::runtime_error("sha256: digest failure");
  }
  return out;
}

std::array<std::uint8_t, kBlockSize> encode_block(ring::RingElement r) {
  std::array<std::uint8_t, kBlockSize> block{};
  for (int i = 0; i < 8; ++i) block[i] = static_cast<std::uint8_t>(r.ticks >> (8 * i));
  const auto digest = sha256(std::span<const std::uint8_t>(block.data(), 8));
  std::memcpy(block.data() + 8, digest.data(), 4);
  return block;
}

std::optional<ring::RingElement> decode_block(std::span<const std::uint8_t> block) {
  if (block.size() != kBlockSize) return std::nullopt;
  std::uint64_t ticks = 0;
  for (int i = 0; i < 8; ++i) ticks |= static_cast<std::uint64_t>(block[i]) << (8 * i);
  const auto digest = sha256(block.first(8));
  if (std::memcmp(digest.data(), block.data() + 8, 4) != 0) return std::nullopt;
  return ring::RingElement{ticks};
}

// --- OpenSSL BIGNUM helpers -------------------------------------------------

struct BnDeleter {
  void operator()(BIGNUM* p) const { BN_free(p); }
};
struct CtxDeleter {
  void operator()(BN_CTX* p) const { BN_CTX_free(p); }
};
using Bn = std::unique_ptr<BIGNUM, BnDeleter>;
using Ctx = std::unique_ptr<BN_CTX, CtxDeleter>;

Bn bn_new() {
  Bn b(BN_new());
  if (!b) throw std::runtime_error("BN_new failed");
  return b;
}

Bn bn_from_hex(const char* hex) {
  BIGNUM* raw = nullptr;
  if (BN_hex2bn(&raw, hex) == 0) throw std::runtime_error("BN_hex2bn failed");
  return Bn(raw);
}

Bn bn_from_bytes(std::span<const std::uint8_t> bytes) {
  Bn b(BN_bin2bn(bytes.data(), static_cast<int>(bytes.size()), nullptr));
  if (!b) throw std::runtime_error("BN_bin2bn failed");
  return b;
}

std::vector<std::uint8_t> bn_to_bytes(const BIGNUM* b, std::size_t width) {
  std::vector<std::uint8_t> out(width);
  if (BN_bn2binpad(b, out.data(), static_cast<int>(width)) < 0)
    throw std::runtime_error("BN_bn2binpad failed");
  return out;
}

// Safe primes (p = 2q + 1 with q prime), one per supported security level.
// g = 4 is a square, hence generates the order-q subgroup.
const char* safe_prime_hex(std::uint32_t bits) {
  switch (bits) {
    case 64:  return "F9613A35E34124B7";
    case 128: return "F56E55FB0840527C919E9929F368E497";
    case 256: return "F3E93BDB0070D807DCE996AA724573F5628A4BDF2FCFF1D38E7CC284877C3FFF";
    case 512:
      return "DF8AEF42FAD7B60E1753E40173180BB9550B435593883367C414D9B3DA76F72C"
             "910C7B51E174FB8F127C26E35112F76B4D05057FCCC13A3DCE520DFC88BA54FB";
    default:  return nullptr;
  }
}

// --- hashed ElGamal over the safe-prime group -------------------------------

class GroupScheme final : public EncryptionScheme {
 public:
  explicit GroupScheme(std::uint32_t bits) : bits_(bits) {
    const char* hex = safe_prime_hex(bits);
    if (hex == nullptr)
      throw std::invalid_argument("group scheme: unsupported security parameter " +
                                  std::to_string(bits) + " (use 64, 128, 256 or 512)");
    p_ = bn_from_hex(hex);
    q_ = bn_new();
    // q = (p - 1) / 2
    if (BN_rshift1(q_.get(), p_.get()) != 1) throw std::runtime_error("BN_rshift1 failed");
    g_ = bn_new();
    BN_set_word(g_.get(), 4);
  }

  std::string name() const override { return "group" + std::to_string(bits_); }
  SchemeKind kind() const override { return SchemeKind::Group; }
  std::uint32_t security_bits() const override { return bits_; }

  KeyPair keygen(rng::Engine& eng) const override {
    Ctx ctx(BN_CTX_new());
    Bn x = random_exponent(eng);
    Bn h = bn_new();
    if (BN_mod_exp(h.get(), g_.get(), x.get(), p_.get(), ctx.get()) != 1)
      throw std::runtime_error("BN_mod_exp failed");
    KeyPair kp;
    kp.security_bits = bits_;
    kp.public_key = PublicKey{static_cast<std::uint8_t>(SchemeKind::Group), bits_,
                              bn_to_bytes(h.get(), width())};
    kp.secret_key = bn_to_bytes(x.get(), width());
    return kp;
  }

  Ciphertext encrypt(ring::RingElement plaintext, const PublicKey& pk,
                     rng::Engine& eng) const override {
    check_key(pk);
    Ctx ctx(BN_CTX_new());
    Bn h = bn_from_bytes(pk.bytes);
    if (BN_is_zero(h.get()) || BN_cmp(h.get(), p_.get()) >= 0)
      throw std::invalid_argument("group scheme: public key outside group range");
    Bn y = random_exponent(eng);
    Bn c1 = bn_new(), s = bn_new();
    if (BN_mod_exp(c1.get(), g_.get(), y.get(), p_.get(), ctx.get()) != 1 ||
        BN_mod_exp(s.get(), h.get(), y.get(), p_.get(), ctx.get()) != 1)
      throw std::runtime_error("BN_mod_exp failed");

    const auto c1_bytes = bn_to_bytes(c1.get(), width());
    const auto pad = derive_pad(c1_bytes, bn_to_bytes(s.get(), width()));
    auto block = encode_block(plaintext);
    for (std::size_t i = 0; i < kBlockSize; ++i) block[i] ^= pad[i];

    Ciphertext ct{static_cast<std::uint8_t>(SchemeKind::Group), {}};
    ct.payload.reserve(width() + kBlockSize);
    ct.payload.insert(ct.payload.end(), c1_bytes.begin(), c1_bytes.end());
    ct.payload.insert(ct.payload.end(), block.begin(), block.end());
    return ct;
  }

  std::optional<ring::RingElement> decrypt(const Ciphertext& ct,
                                           const KeyPair& keys) const override {
    if (ct.scheme_tag != static_cast<std::uint8_t>(SchemeKind::Group) ||
        ct.payload.size() != width() + kBlockSize)
      return std::nullopt;
    Ctx ctx(BN_CTX_new());
    const std::span<const std::uint8_t> c1_bytes(ct.payload.data(), width());
    Bn c1 = bn_from_bytes(c1_bytes);
    if (BN_is_zero(c1.get()) || BN_cmp(c1.get(), p_.get()) >= 0) return std::nullopt;
    Bn x = bn_from_bytes(keys.secret_key);
    Bn s = bn_new();
    if (BN_mod_exp(s.get(), c1.get(), x.get(), p_.get(), ctx.get()) != 1)
      throw std::runtime_error("BN_mod_exp failed");
    const auto pad = derive_pad(std::vector<std::uint8_t>(c1_bytes.begin(), c1_bytes.end()),
                                bn_to_bytes(s.get(), width()));
    std::array<std::uint8_t, kBlockSize> block{};
    for (std::size_t i = 0; i < kBlockSize; ++i) block[i] = ct.payload[width() + i] ^ pad[i];
    return decode_block(block);
  }

 private:
  std::size_t width() const { return bits_ / 8; }

  void check_key(const PublicKey& pk) const {
    if (pk.scheme_tag != static_cast<std::uint8_t>(SchemeKind::Group) ||
        pk.security_bits != bits_ || pk.bytes.size() != width())
      throw std::invalid_argument("group scheme: mismatched public key");
  }

  // Uniform exponent in [1, q-1], driven entirely by the caller's engine.
  Bn random_exponent(rng::Engine& eng) const {
    Ctx ctx(BN_CTX_new());
    const auto raw = eng.bytes(width() * 2);
    Bn r = bn_from_bytes(raw);
    Bn qm1 = bn_new(), e = bn_new();
    if (BN_sub(qm1.get(), q_.get(), BN_value_one()) != 1 ||
        BN_mod(e.get(), r.get(), qm1.get(), ctx.get()) != 1 ||
        BN_add(e.get(), e.get(), BN_value_one()) != 1)
      throw std::runtime_error("exponent sampling failed");
    return e;
  }

  static std::array<std::uint8_t, kBlockSize> derive_pad(const std::vector<std::uint8_t>& c1,
                                                         const std::vector<std::uint8_t>& shared) {
    std::vector<std::uint8_t> material;
    material.reserve(c1.size() + shared.size());
    material.insert(material.end(), c1.begin(), c1.end());
    material.insert(material.end(), shared.begin(), shared.end());
    const auto digest = sha256(material);
    std::array<std::uint8_t, kBlockSize> pad{};
    std::memcpy(pad.data(), digest.data(), kBlockSize);
    return pad;
  }

  std::uint32_t bits_;
  Bn p_, q_, g_;
};

// --- toy schemes -------------------------------------------------------------

class IdentityScheme final : public EncryptionScheme {
 public:
  explicit IdentityScheme(std::uint32_t bits) : bits_(bits) {}
  std::string name() const override { return "identity"; }
  SchemeKind kind() const override { return SchemeKind::Identity; }
  std::uint32_t security_bits() const override { return bits_; }

  KeyPair keygen(rng::Engine& eng) const override {
    KeyPair kp;
    kp.security_bits = bits_;
    kp.public_key =
        PublicKey{static_cast<std::uint8_t>(SchemeKind::Identity), bits_, eng.bytes(16)};
    kp.secret_key = kp.public_key.bytes;
    return kp;
  }

  Ciphertext encrypt(ring::RingElement plaintext, const PublicKey&, rng::Engine&) const override {
    const auto block = encode_block(plaintext);
    return Ciphertext{static_cast<std::uint8_t>(SchemeKind::Identity),
                      std::vector<std::uint8_t>(block.begin(), block.end())};
  }

  std::optional<ring::RingElement> decrypt(const Ciphertext& ct, const KeyPair&) const override {
    return decode_block(ct.payload);
  }

 private:
  std::uint32_t bits_;
};

class FixedPadScheme final : public EncryptionScheme {
 public:
  explicit FixedPadScheme(std::uint32_t bits) : bits_(bits) {}
  std::string name() const override { return "fixed_pad"; }
  SchemeKind kind() const override { return SchemeKind::FixedPad; }
  std::uint32_t security_bits() const override { return bits_; }

  KeyPair keygen(rng::Engine& eng) const override {
    KeyPair kp;
    kp.security_bits = bits_;
    kp.public_key =
        PublicKey{static_cast<std::uint8_t>(SchemeKind::FixedPad), bits_, eng.bytes(16)};
    kp.secret_key = kp.public_key.bytes;
    return kp;
  }

  Ciphertext encrypt(ring::RingElement plaintext, const PublicKey& pk, rng::Engine&) const override {
    auto block = encode_block(plaintext);
    const auto pad = pad_for(pk.bytes);
    for (std::size_t i = 0; i < kBlockSize; ++i) block[i] ^= pad[i];
    return Ciphertext{static_cast<std::uint8_t>(SchemeKind::FixedPad),
                      std::vector<std::uint8_t>(block.begin(), block.end())};
  }

  std::optional<ring::RingElement> decrypt(const Ciphertext& ct,
                                           const KeyPair& keys) const override {
    if (ct.payload.size() != kBlockSize) return std::nullopt;
    const auto pad = pad_for(keys.public_key.bytes);
    std::array<std::uint8_t, kBlockSize> block{};
    for (std::size_t i = 0; i < kBlockSize; ++i) block[i] = ct.payload[i] ^ pad[i];
    return decode_block(block);
  }

 private:
  static std::array<std::uint8_t, kBlockSize> pad_for(const std::vector<std::uint8_t>& pk_bytes) {
    const auto digest = sha256(pk_bytes);
    std::array<std::uint8_t, kBlockSize> pad{};
    std::memcpy(pad.data(), digest.data(), kBlockSize);
    return pad;
  }
  std::uint32_t bits_;
};

}  // namespace

// --- wire formats -------------------------------------------------------------

std::vector<std::uint8_t> PublicKey::serialize() const {
  std::vector<std::uint8_t> out;
  out.reserve(3 + bytes.size());
  out.push_back(scheme_tag);
  out.push_back(static_cast<std::uint8_t>(security_bits & 0xff));
  out.push_back(static_cast<std::uint8_t>((security_bits >> 8) & 0xff));
  out.insert(out.end(), bytes.begin(), bytes.end());
  return out;
}

PublicKey PublicKey::parse(std::span<const std::uint8_t> wire) {
  if (wire.size() < 3) throw std::invalid_argument("PublicKey::parse: truncated");
  PublicKey pk;
  pk.scheme_tag = wire[0];
  pk.security_bits = static_cast<std::uint32_t>(wire[1]) | (static_cast<std::uint32_t>(wire[2]) << 8);
  pk.bytes.assign(wire.begin() + 3, wire.end());
  return pk;
}

std::vector<std::uint8_t> Ciphertext::serialize() const {
  if (payload.size() > 0xffff) throw std::invalid_argument("Ciphertext::serialize: payload too long");
  std::vector<std::uint8_t> out;
  out.reserve(3 + payload.size());
  out.push_back(scheme_tag);
  out.push_back(static_cast<std::uint8_t>(payload.size() & 0xff));
  out.push_back(static_cast<std::uint8_t>((payload.size() >> 8) & 0xff));
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

Ciphertext Ciphertext::parse(std::span<const std::uint8_t> wire) {
  if (wire.size() < 3) throw std::invalid_argument("Ciphertext::parse: truncated");
  const std::size_t len =
      static_cast<std::size_t>(wire[1]) | (static_cast<std::size_t>(wire[2]) << 8);
  if (wire.size() != 3 + len) throw std::invalid_argument("Ciphertext::parse: length mismatch");
  Ciphertext ct;
  ct.scheme_tag = wire[0];
  ct.payload.assign(wire.begin() + 3, wire.end());
  return ct;
}

std::unique_ptr<EncryptionScheme> make_scheme(SchemeKind kind, std::uint32_t security_bits) {
  switch (kind) {
    case SchemeKind::Group:    return std::make_unique<GroupScheme>(security_bits);
    case SchemeKind::Identity: return std::make_unique<IdentityScheme>(security_bits);
    case SchemeKind::FixedPad: return std::make_unique<FixedPadScheme>(security_bits);
  }
  throw std::invalid_argument("make_scheme: unknown scheme kind");
}

std::vector<Ciphertext> multi_encrypt(
    const EncryptionScheme& scheme,
    const std::vector<std::pair<ring::RingElement, const PublicKey*>>& batch, rng::Engine& eng) {
  std::vector<Ciphertext> out;
  out.reserve(batch.size());
  for (const auto& [plaintext, pk] : batch) {
    if (pk == nullptr) throw std::invalid_argument("multi_encrypt: missing public key");
    out.push_back(scheme.encrypt(plaintext, *pk, eng));
  }
  return out;
}

// --- CPA experiment -----------------------------------------------------------

std::pair<ring::RingElement, ring::RingElement> CpaAttacker::choose_pair(
    const ring::RingParams& params, rng::Engine& eng) {
  // uniform without replacement
  const std::uint64_t n = params.size();
  if (n < 2) throw std::invalid_argument("choose_pair: ring too small for distinct pair");
  const std::uint64_t a = eng.below(n);
  std::uint64_t b = eng.below(n - 1);
  if (b >= a) ++b;
  return {ring::RingElement{a}, ring::RingElement{b}};
}

CpaReport run_cpa_experiment(const EncryptionScheme& scheme, const ring::RingParams& params,
                             CpaAttacker& attacker, std::uint64_t trials, std::uint64_t seed) {
  if (trials == 0) throw std::invalid_argument("run_cpa_experiment: trials must be positive");
  std::uint64_t wins = 0;
  for (std::uint64_t trial = 0; trial < trials; ++trial) {
    rng::Engine eng(rng::derive_seed(seed, {0x0c9a, trial}));
    const KeyPair keys = scheme.keygen(eng);
    const auto [r0, r1] = attacker.choose_pair(params, eng);
    if (r0 == r1) throw std::invalid_argument("run_cpa_experiment: challenge pair must be distinct");
    const int b = static_cast<int>(eng.below(2));
    const Ciphertext challenge = scheme.encrypt(b == 0 ? r0 : r1, keys.public_key, eng);
    const int guess = attacker.guess(challenge, r0, r1, keys.public_key, scheme, eng);
    if (guess != 0 && guess != 1)
      throw std::invalid_argument("run_cpa_experiment: attacker output not a bit");
    wins += (guess == b) ? 1 : 0;
  }
  CpaReport rep;
  rep.scheme = scheme.name();
  rep.attacker = attacker.name();
  rep.trials = trials;
  rep.win_rate = static_cast<double>(wins) / static_cast<double>(trials);
  rep.advantage = std::abs(rep.win_rate - 0.5);
  rep.band = 3.0 * (0.5 / std::sqrt(static_cast<double>(trials)));
  return rep;
}

// --- suite attackers -----------------------------------------------------------

namespace {

class RandomGuessAttacker final : public CpaAttacker {
 public:
  std::string name() const override { return "random_guess"; }
  int guess(const Ciphertext&, ring::RingElement, ring::RingElement, const PublicKey&,
            const EncryptionScheme&, rng::Engine& eng) override {
    return static_cast<int>(eng.below(2));
  }
};

class PlaintextMatchAttacker final : public CpaAttacker {
 public:
  std::string name() const override { return "plaintext_match"; }
  int guess(const Ciphertext& challenge, ring::RingElement r0, ring::RingElement r1,
            const PublicKey&, const EncryptionScheme&, rng::Engine& eng) override {
    if (auto decoded = decode_block(challenge.payload)) {
      if (*decoded == r0) return 0;
      if (*decoded == r1) return 1;
    }
    return static_cast<int>(eng.below(2));
  }
};

class ReEncryptAttacker final : public CpaAttacker {
 public:
  std::string name() const override { return "re_encrypt"; }
  int guess(const Ciphertext& challenge, ring::RingElement r0, ring::RingElement r1,
            const PublicKey& pk, const EncryptionScheme& scheme, rng::Engine& eng) override {
    const auto wire = challenge.serialize();
    if (scheme.encrypt(r0, pk, eng).serialize() == wire) return 0;
    if (scheme.encrypt(r1, pk, eng).serialize() == wire) return 1;
    return static_cast<int>(eng.below(2));
  }
};

}  // namespace

std::unique_ptr<CpaAttacker> make_random_guess_attacker() {
  return std::make_unique<RandomGuessAttacker>();
}
std::unique_ptr<CpaAttacker> make_plaintext_match_attacker() {
  return std::make_unique<PlaintextMatchAttacker>();
}
std::unique_ptr<CpaAttacker> make_reencrypt_attacker() {
  return std::make_unique<ReEncryptAttacker>();
}

}  // namespace zms::crypto
