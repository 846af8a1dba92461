#pragma once
// Privacy games over the aggregation protocol, mechanized as seeded Monte
// Carlo experiments:
//
//   - the type-estimation game: a coalition of corrupted sensors plus the
//     fusion center tries to estimate the honest sensors' quantized types
//     from everything it legitimately sees; its win rate is compared against
//     a paired baseline estimator that, by construction, knows only the
//     leaked masked sum and the coalition's own data (realized by rescoring
//     the same estimate against a fresh truth resampled from the prior
//     conditioned on that sum),
//   - the type-distinguishing game: the coalition picks two honest type
//     collections with equal elementwise masked sums, the challenger commits
//     to one at random, and the coalition guesses which,
//   - a mask-uniformity check: exhaustive (or chi-square, when enumeration is
//     too large) verification that the published masked sums of any two
//     honest sensors are conditionally uniform over the coset fixed by the
//     coalition-visible mask entries — the structural fact the games rest on.
//
// The challenger in both games drives the three protocol phases directly on
// the crypto and masking primitives, with attacker callbacks at the three
// deviation points (key generation, mask generation, final estimate), each
// validated against the same constraints the protocol enforces.  A mask row
// whose diagonal breaks the zero-sum constraint disqualifies the attacker.
//
// Attackers receive exactly the information the threat model grants them
// (public keys, every ciphertext, the honest sensors' obfuscated reports,
// plus the coalition's own types, keys, masks, and reports) — never an
// honest sensor's private key or raw mask row.

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "zms/crypto.hpp"
#include "zms/errors.hpp"
#include "zms/protocol.hpp"
#include "zms/ring.hpp"
#include "zms/rng.hpp"
#include "zms/typestat.hpp"

namespace zms::adversary {

// --- attacker-visible bundles ----------------------------------------------
// All sensor indices are 1-based to match the protocol; vectors indexed by
// sensor use slot [k-1].  The coalition is the last `colluding` sensors.

// What the attacker sees when choosing its own key pairs: the honest
// sensors' public keys (coalition slots still empty).
struct KeygenView {
  protocol::ProtocolParams params;
  std::vector<std::uint8_t> colluding;          // coalition sensor ids, ascending
  std::vector<crypto::PublicKey> public_keys;   // [k-1]; honest entries filled
};

// What the attacker sees when choosing its own mask rows: everything from
// phase 2, including the masks honest sensors encrypted to the coalition.
struct MaskView {
  protocol::ProtocolParams params;
  std::vector<std::uint8_t> colluding;
  std::vector<crypto::PublicKey> public_keys;   // all K filled
  std::vector<crypto::KeyPair> own_keys;        // aligned with `colluding`
  typestat::MarginalVector own_types;           // aligned with `colluding`
  // [sender-1][receiver-1][symbol]; filled for honest senders, receiver != sender
  std::vector<std::vector<std::vector<crypto::Ciphertext>>> ciphertexts;
  // [sender-1][receiver-1][symbol]; filled for honest sender -> coalition receiver
  std::vector<std::vector<std::vector<ring::RingElement>>> received_masks;
};

// The full end-of-protocol bundle the estimator runs on.
struct AttackerContext {
  protocol::ProtocolParams params;
  std::vector<std::uint8_t> colluding;
  std::vector<crypto::PublicKey> public_keys;
  std::vector<crypto::KeyPair> own_keys;
  typestat::MarginalVector own_types;
  std::vector<std::vector<std::vector<crypto::Ciphertext>>> ciphertexts;  // now all senders
  std::vector<std::vector<std::vector<ring::RingElement>>> received_masks;
  std::vector<protocol::MaskRow> own_masks;              // aligned with `colluding`
  std::vector<protocol::ObfuscatedMessage> honest_reports;  // ascending honest id
  std::vector<protocol::ObfuscatedMessage> own_reports;     // aligned with `colluding`
};

// --- attackers ---------------------------------------------------------------

struct TeaAttacker {
  std::string name;
  // optional deviations; defaults follow the protocol honestly
  std::function<std::vector<crypto::KeyPair>(const KeygenView&, rng::Engine&)> keygen;
  std::function<std::vector<protocol::MaskRow>(const MaskView&, rng::Engine&)> masks;
  // required: estimate of the honest sensors' types, ascending honest id
  std::function<typestat::MarginalVector(const AttackerContext&, rng::Engine&)> estimate;
};

struct TdaAttacker {
  std::string name;
  std::function<std::vector<crypto::KeyPair>(const KeygenView&, rng::Engine&)> keygen;
  std::function<std::vector<protocol::MaskRow>(const MaskView&, rng::Engine&)> masks;
  // required: which of the two candidate collections was committed (0 or 1)
  std::function<int(const AttackerContext&, const typestat::MarginalVector& candidate0,
                    const typestat::MarginalVector& candidate1, rng::Engine&)>
      distinguish;
};

// --- type prior ---------------------------------------------------------------

// Finite per-sensor prior over quantized types; honest sensors draw i.i.d.
struct TypePrior {
  std::vector<typestat::QuantizedSqrtType> support;
  std::vector<double> probs;

  void validate() const;
};

// Binary-alphabet prior induced by symbol counts Binomial(t, 1/2): support
// entry c is the quantized square-root type of (c/t, 1 - c/t).
TypePrior binomial_type_prior(std::uint32_t t, const ring::RingParams& ring_p);

// --- estimation neighborhood ---------------------------------------------------

// True iff the candidate collection lies within squared-distance tau of the
// truth (sum over sensors and symbols of the squared difference of the
// quantized square-root values) AND the per-symbol modular tick sums agree.
bool neighborhood_contains(const typestat::MarginalVector& candidate,
                           const typestat::MarginalVector& truth, double tau);

// --- coset structure of a prior (exact oracles for the games) -----------------

// Sizes of the equivalence classes of honest type tuples under "equal
// per-symbol modular tick sums", in deterministic enumeration order.
std::vector<std::uint32_t> coset_class_sizes(const TypePrior& prior,
                                             std::uint32_t honest_count);

// Exact win rate of the estimator that outputs the most likely tuple in the
// observed sum class (radius-zero wins), i.e. sum over classes of the
// largest member probability.
double exact_map_win_rate(const TypePrior& prior, std::uint32_t honest_count);

// Exact probability that an independent redraw from the observed sum class
// equals the truth: sum over classes of (sum of squared member
// probabilities) / (class mass).  This is the paired-baseline rate against
// an estimator that reconstructs the truth exactly.
double exact_collision_rate(const TypePrior& prior, std::uint32_t honest_count);

// First pair (in enumeration order) of distinct honest tuples with equal
// per-symbol modular sums; the canonical distinguishing challenge.
std::pair<typestat::MarginalVector, typestat::MarginalVector> find_equal_sum_pair(
    const TypePrior& prior, std::uint32_t honest_count);

// --- games ---------------------------------------------------------------------

struct GameReport {
  std::string game;     // "type-estimation" | "type-distinguishing"
  std::string attacker;
  std::string scheme;
  std::uint32_t sensors = 0;
  std::uint32_t colluding = 0;
  std::uint32_t alphabet = 0;
  std::uint32_t precision = 0;
  double tau = 0.0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
  double win_rate = 0.0;
  double baseline_rate = 0.0;  // paired resample baseline; 1/2 for distinguishing
  double band = 0.0;           // 3 * 0.5 / sqrt(trials)
  std::string verdict;         // "consistent-with-baseline" | "above-baseline" | "below-baseline"

  std::string to_json() const;
};

// Runs the estimation game: the challenger draws every sensor's type i.i.d.
// from `prior`, executes the three phases (honoring the attacker's keygen
// and mask deviations), hands the attacker its bundle, and scores the
// estimate both against the truth and against a fresh truth resampled from
// the same masked-sum class (the paired baseline).
// The coalition is the last `colluding_count` sensors; the privacy guarantee
// regime needs colluding_count <= sensors - 2.
GameReport run_tea(const protocol::ProtocolParams& params, std::uint32_t colluding_count,
                   const TypePrior& prior, const TeaAttacker& attacker, double tau,
                   std::uint64_t trials, std::uint64_t seed);

// Runs the distinguishing game on a fixed challenge: candidate collections
// must have equal per-symbol modular sums (input error otherwise); the
// challenger commits to one uniformly at random each trial.
GameReport run_tda(const protocol::ProtocolParams& params, std::uint32_t colluding_count,
                   const typestat::MarginalVector& coalition_types,
                   const typestat::MarginalVector& candidate0,
                   const typestat::MarginalVector& candidate1, const TdaAttacker& attacker,
                   std::uint64_t trials, std::uint64_t seed);

// Suite attackers ---------------------------------------------------------------

// Ignores the transcript entirely; redraws the honest tuple from the prior.
TeaAttacker make_random_guess_tea_attacker(const TypePrior& prior);

// Computes the leaked per-symbol masked sum from its bundle, attempts full
// mask reconstruction by decrypting every honest ciphertext with its own
// keys (succeeds only when the scheme is breakable), and otherwise outputs
// the most likely tuple in the observed sum class.
TeaAttacker make_sum_aware_tea_attacker(const TypePrior& prior,
                                        const protocol::ProtocolParams& params,
                                        std::uint32_t colluding_count);

// Same reconstruction attempt; on success compares the recovered types with
// the two candidates, otherwise flips a coin.
TdaAttacker make_reconstruction_tda_attacker();

// --- mask uniformity ------------------------------------------------------------

struct UniformityReport {
  bool exact = false;       // exhaustive enumeration (else chi-square sampling)
  bool uniform = false;     // conditional law uniform over a coset of size > 1
  bool point_mass = false;  // degenerate regime: the coset has a single element
  std::uint64_t coset_size = 0;
  double coset_mass = 0.0;  // per-element conditional mass when uniform
  double p_value = -1.0;    // chi-square p-value (statistical mode only)
  std::uint64_t samples = 0;
  std::string notice;

  std::string to_json() const;
};

// Verifies that the per-symbol masked sums of (up to) two honest sensors'
// rows, restricted to honest columns, are conditionally uniform given the
// coalition-visible columns — uniform over the coset the zero-sum constraint
// fixes, with per-element mass 2^(-precision * (honest - 1) * alphabet).
// Masks here live on 2^precision ticks per symbol (the mask space itself;
// the protocol ring's extra headroom factor scales the coset identically).
// Enumerates exhaustively when the assignment space is at most 2^20,
// otherwise falls back to a seeded chi-square test with a notice.
UniformityReport check_mask_uniformity(std::uint32_t sensors, std::uint32_t colluding,
                                       std::uint32_t precision, std::uint32_t alphabet,
                                       std::uint64_t samples = 1000000, std::uint64_t seed = 1);

}  // namespace zms::adversary
