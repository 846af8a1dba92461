#pragma once
// Pluggable public-key encryption over ring elements, plus a mechanized
// chosen-plaintext (CPA) distinguishing experiment.
//
// Schemes:
//   - group:     hashed ElGamal over a fixed safe-prime group.  Ciphertext is
//                (g^y, pad XOR block) with pad = SHA-256(c1 || h^y); the
//                block is the plaintext tick count plus a short integrity
//                checksum, so decryption under the wrong key is detected.
//   - identity:  ciphertext literally encodes the plaintext block.  Insecure
//                by construction; used to validate that the games can tell.
//   - fixed_pad: XOR with a pad derived only from the public key, hence
//                deterministic.  Randomization-dependent properties fail.
//
// Wire formats:
//   Ciphertext  = scheme tag byte || u16-LE payload length || payload
//   PublicKey   = scheme tag byte || u16-LE group bits     || key bytes

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "zms/ring.hpp"
#include "zms/rng.hpp"

namespace zms::crypto {

enum class SchemeKind : std::uint8_t { Group = 1, Identity = 2, FixedPad = 3 };

struct PublicKey {
  std::uint8_t scheme_tag = 0;
  std::uint32_t security_bits = 0;
  std::vector<std::uint8_t> bytes;

  std::vector<std::uint8_t> serialize() const;
  static PublicKey parse(std::span<const std::uint8_t> wire);
  friend bool operator==(const PublicKey&, const PublicKey&) = default;
};

struct KeyPair {
  PublicKey public_key;
  std::vector<std::uint8_t> secret_key;  // never serialized into transcripts
  std::uint32_t security_bits = 0;
};

struct Ciphertext {
  std::uint8_t scheme_tag = 0;
  std::vector<std::uint8_t> payload;

  std::vector<std::uint8_t> serialize() const;
  static Ciphertext parse(std::span<const std::uint8_t> wire);
  friend bool operator==(const Ciphertext&, const Ciphertext&) = default;
};

class EncryptionScheme {
 public:
  virtual ~EncryptionScheme() = default;
  virtual std::string name() const = 0;
  virtual SchemeKind kind() const = 0;
  virtual std::uint32_t security_bits() const = 0;

  virtual KeyPair keygen(rng::Engine& eng) const = 0;
  virtual Ciphertext encrypt(ring::RingElement plaintext, const PublicKey& pk,
                             rng::Engine& eng) const = 0;
  // nullopt when the integrity checksum fails (wrong key or tampering).
  virtual std::optional<ring::RingElement> decrypt(const Ciphertext& ct,
                                                   const KeyPair& keys) const = 0;
};

// security_bits must be one of {64, 128, 256, 512} for the group scheme;
// toy schemes accept any value and record it.
std::unique_ptr<EncryptionScheme> make_scheme(SchemeKind kind, std::uint32_t security_bits);

// Encrypts each (plaintext, key) pair independently, preserving order.
std::vector<Ciphertext> multi_encrypt(
    const EncryptionScheme& scheme,
    const std::vector<std::pair<ring::RingElement, const PublicKey*>>& batch, rng::Engine& eng);

// ---------------------------------------------------------------------------
// CPA experiment
// ---------------------------------------------------------------------------

class CpaAttacker {
 public:
  virtual ~CpaAttacker() = default;
  virtual std::string name() const = 0;

  // Challenge pair; must be two distinct ring elements.  The default draws
  // uniformly without replacement.
  virtual std::pair<ring::RingElement, ring::RingElement> choose_pair(
      const ring::RingParams& params, rng::Engine& eng);

  // Returns 0 or 1; any other value is a harness error.
  virtual int guess(const Ciphertext& challenge, ring::RingElement r0, ring::RingElement r1,
                    const PublicKey& pk, const EncryptionScheme& scheme, rng::Engine& eng) = 0;
};

struct CpaReport {
  std::string scheme;
  std::string attacker;
  std::uint64_t trials = 0;
  double win_rate = 0.0;
  double advantage = 0.0;   // |win_rate - 1/2|
  double band = 0.0;        // 3 * (0.5 / sqrt(trials))
};

CpaReport run_cpa_experiment(const EncryptionScheme& scheme, const ring::RingParams& params,
                             CpaAttacker& attacker, std::uint64_t trials, std::uint64_t seed);

// Suite attackers -----------------------------------------------------------

// Coin flip; calibrates the harness.
std::unique_ptr<CpaAttacker> make_random_guess_attacker();
// Decodes the challenge as if it were an identity-scheme block.
std::unique_ptr<CpaAttacker> make_plaintext_match_attacker();
// Re-encrypts both candidates and compares ciphertext bytes; beats every
// deterministic scheme.
std::unique_ptr<CpaAttacker> make_reencrypt_attacker();

}  // namespace zms::crypto
