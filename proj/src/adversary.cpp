#include "zms/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>
#include <json.hpp>

namespace zms::adversary {
namespace {

constexpr std::uint64_t kTagTea = 0x544541;   // "TEA"
constexpr std::uint64_t kTagTda = 0x544441;   // "TDA"
constexpr std::uint64_t kTagUnif = 0x554e4946;  // "UNIF"

// Exhaustive-enumeration ceiling shared by the coset table and the exact
// uniformity check.
constexpr std::uint64_t kEnumerationCap = std::uint64_t{1} << 20;
// Cell-table ceiling for the chi-square fallback.
constexpr std::uint32_t kMaxCellBits = 16;

std::uint64_t mod_add(std::uint64_t a, std::uint64_t b, std::uint64_t m) { return (a + b) % m; }
std::uint64_t mod_sub(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return (a + m - b % m) % m;
}

// Stable 64-bit mixer (std::hash is not pinned across implementations).
std::uint64_t mix64(std::uint64_t h) {
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdULL;
  h ^= h >> 33;
  h *= 0xc4ceb9fe1a85ec53ULL;
  h ^= h >> 33;
  return h;
}

std::string verdict_against(double win, double baseline, double band) {
  if (win > baseline + band) return "above-baseline";
  if (win < baseline - band) return "below-baseline";
  return "consistent-with-baseline";
}

// Per-symbol modular tick sums of a type collection.
std::vector<std::uint64_t> signature_of(const typestat::MarginalVector& types,
                                        std::uint64_t modulus) {
  if (types.empty()) return {};
  std::vector<std::uint64_t> sig(types.front().alphabet(), 0);
  for (const auto& q : types) {
    for (std::size_t x = 0; x < sig.size(); ++x) {
      sig[x] = mod_add(sig[x], q.value[x].ticks % modulus, modulus);
    }
  }
  return sig;
}

// --- coset table over honest type tuples -------------------------------------

struct CosetClass {
  std::vector<std::uint32_t> members;  // tuple indices (base-S digits, LSB = sensor 0)
  std::vector<double> probs;
  double total = 0.0;
  std::uint32_t argmax = 0;  // tuple index of the most likely member
  std::optional<rng::AliasTable> alias;
};

struct CosetTable {
  std::uint32_t honest = 0;
  std::uint64_t modulus = 0;
  // Ordered by signature so iteration order is deterministic.
  std::map<std::vector<std::uint64_t>, CosetClass> classes;
};

typestat::MarginalVector tuple_marginals(const TypePrior& prior, std::uint32_t honest,
                                         std::uint64_t index) {
  const std::uint64_t s = prior.support.size();
  typestat::MarginalVector out;
  out.reserve(honest);
  for (std::uint32_t j = 0; j < honest; ++j) {
    out.push_back(prior.support[index % s]);
    index /= s;
  }
  return out;
}

CosetTable build_coset_table(const TypePrior& prior, std::uint32_t honest) {
  prior.validate();
  if (honest == 0) throw std::invalid_argument("coset table: need at least one honest sensor");
  const std::uint64_t s = prior.support.size();
  std::uint64_t total = 1;
  for (std::uint32_t j = 0; j < honest; ++j) {
    total *= s;
    if (total > kEnumerationCap) {
      throw capability_error(
          "coset table: type-tuple enumeration exceeds 2^20; shrink the prior support or the "
          "honest sensor count");
    }
  }
  CosetTable table;
  table.honest = honest;
  table.modulus = prior.support.front().params.size();
  const std::uint32_t alphabet = prior.support.front().alphabet();
  for (std::uint64_t idx = 0; idx < total; ++idx) {
    std::vector<std::uint64_t> sig(alphabet, 0);
    double prob = 1.0;
    std::uint64_t rest = idx;
    for (std::uint32_t j = 0; j < honest; ++j) {
      const std::uint64_t d = rest % s;
      rest /= s;
      prob *= prior.probs[d];
      for (std::uint32_t x = 0; x < alphabet; ++x) {
        sig[x] = mod_add(sig[x], prior.support[d].value[x].ticks, table.modulus);
      }
    }
    auto& cls = table.classes[sig];
    cls.members.push_back(static_cast<std::uint32_t>(idx));
    cls.probs.push_back(prob);
  }
  for (auto& [sig, cls] : table.classes) {
    std::size_t best = 0;
    for (std::size_t i = 0; i < cls.probs.size(); ++i) {
      cls.total += cls.probs[i];
      if (cls.probs[i] > cls.probs[best]) best = i;
    }
    cls.argmax = cls.members[best];
    cls.alias.emplace(cls.probs);
  }
  return table;
}

// --- challenger ----------------------------------------------------------------

void require_shape(const typestat::MarginalVector& types, std::size_t count,
                   const protocol::ProtocolParams& params, const char* who) {
  if (types.size() != count) {
    throw std::invalid_argument(std::string(who) + ": expected " + std::to_string(count) +
                                " types, got " + std::to_string(types.size()));
  }
  for (const auto& q : types) {
    if (!(q.params == params.ring_p)) {
      throw std::invalid_argument(std::string(who) + ": ring parameters do not match the game");
    }
    if (q.alphabet() != params.alphabet) {
      throw std::invalid_argument(std::string(who) + ": alphabet size does not match the game");
    }
    for (const auto& e : q.value) {
      if (e.ticks >= params.ring_p.size()) {
        throw std::invalid_argument(std::string(who) + ": tick value outside the ring");
      }
    }
  }
}

using KeygenCb = std::function<std::vector<crypto::KeyPair>(const KeygenView&, rng::Engine&)>;
using MaskCb = std::function<std::vector<protocol::MaskRow>(const MaskView&, rng::Engine&)>;

// Runs key announcement, mask exchange, and report publication for one trial
// and returns the coalition's view of it.  The coalition is "rushing": its
// keys are chosen after the honest announcements and its mask rows after all
// honest ciphertexts have been delivered.  Honest secrets never leave this
// function.
AttackerContext run_phases(const protocol::ProtocolParams& params,
                           const std::vector<std::uint8_t>& colluding,
                           const typestat::MarginalVector& honest_types,
                           const typestat::MarginalVector& coalition_types,
                           const crypto::EncryptionScheme& scheme, const KeygenCb& keygen_cb,
                           const MaskCb& masks_cb, rng::Engine& eng) {
  const std::uint32_t sensors = params.sensors;
  const std::uint32_t alphabet = params.alphabet;
  const std::uint64_t modulus = params.ring_p.size();

  std::vector<char> is_colluding(sensors + 1, 0);
  std::vector<int> coalition_index(sensors + 1, -1);
  for (std::size_t i = 0; i < colluding.size(); ++i) {
    is_colluding[colluding[i]] = 1;
    coalition_index[colluding[i]] = static_cast<int>(i);
  }

  // Phase 1: keys.  Honest sensors announce first; the coalition answers.
  std::vector<crypto::PublicKey> public_keys(sensors);
  std::vector<crypto::KeyPair> honest_keys(sensors);
  std::vector<crypto::KeyPair> coalition_keys(colluding.size());
  for (std::uint32_t k = 1; k <= sensors; ++k) {
    if (is_colluding[k]) continue;
    honest_keys[k - 1] = scheme.keygen(eng);
    public_keys[k - 1] = honest_keys[k - 1].public_key;
  }
  if (keygen_cb) {
    KeygenView view{params, colluding, public_keys};
    auto chosen = keygen_cb(view, eng);
    if (chosen.size() != colluding.size()) {
      throw disqualified_error("key deviation: wrong number of key pairs");
    }
    coalition_keys = std::move(chosen);
  } else {
    for (std::size_t i = 0; i < colluding.size(); ++i) coalition_keys[i] = scheme.keygen(eng);
  }
  for (std::size_t i = 0; i < colluding.size(); ++i) {
    public_keys[colluding[i] - 1] = coalition_keys[i].public_key;
  }

  // Phase 2: masks.  Honest rows are drawn and their off-diagonal entries
  // encrypted to each receiver; entries addressed to the coalition are
  // decrypted with the coalition's announced keys.
  std::vector<protocol::MaskRow> rows(sensors);
  std::vector<std::vector<std::vector<crypto::Ciphertext>>> ciphertexts(
      sensors, std::vector<std::vector<crypto::Ciphertext>>(sensors));
  std::vector<std::vector<std::vector<ring::RingElement>>> received(
      sensors, std::vector<std::vector<ring::RingElement>>(sensors));
  for (std::uint32_t k = 1; k <= sensors; ++k) {
    if (is_colluding[k]) continue;
    rows[k - 1] = protocol::draw_mask_row(params, k, eng);
    for (std::uint32_t r = 1; r <= sensors; ++r) {
      if (r == k) continue;
      std::vector<crypto::Ciphertext> cts(alphabet);
      for (std::uint32_t x = 0; x < alphabet; ++x) {
        try {
          cts[x] = scheme.encrypt(rows[k - 1].at(r - 1, x), public_keys[r - 1], eng);
        } catch (const std::exception& e) {
          throw disqualified_error(std::string("announced public key rejected by the scheme: ") +
                                   e.what());
        }
      }
      if (is_colluding[r]) {
        auto& slot = received[k - 1][r - 1];
        slot.resize(alphabet);
        for (std::uint32_t x = 0; x < alphabet; ++x) {
          auto plain = scheme.decrypt(cts[x], coalition_keys[coalition_index[r]]);
          if (!plain) {
            throw disqualified_error(
                "key deviation: announced key pair cannot decrypt traffic addressed to it");
          }
          slot[x] = *plain;
        }
      }
      ciphertexts[k - 1][r - 1] = std::move(cts);
    }
  }
  if (masks_cb) {
    MaskView view{params,         colluding,   public_keys, coalition_keys,
                  coalition_types, ciphertexts, received};
    auto chosen = masks_cb(view, eng);
    if (chosen.size() != colluding.size()) {
      throw disqualified_error("mask deviation: wrong number of rows");
    }
    for (std::size_t i = 0; i < colluding.size(); ++i) {
      const auto& row = chosen[i];
      if (row.sensors != sensors || row.alphabet != alphabet ||
          row.entries.size() != static_cast<std::size_t>(sensors) * alphabet) {
        throw disqualified_error("mask deviation: row has the wrong shape");
      }
      for (const auto& e : row.entries) {
        if (e.ticks >= modulus) throw disqualified_error("mask deviation: tick outside the ring");
      }
      try {
        protocol::validate_mask_row(params, colluding[i], row);
      } catch (const std::exception& e) {
        throw disqualified_error(std::string("mask deviation: diagonal constraint violated: ") +
                                 e.what());
      }
      rows[colluding[i] - 1] = row;
    }
  } else {
    for (std::uint8_t c : colluding) rows[c - 1] = protocol::draw_mask_row(params, c, eng);
  }
  for (std::uint8_t c : colluding) {
    for (std::uint32_t r = 1; r <= sensors; ++r) {
      if (r == c) continue;
      std::vector<crypto::Ciphertext> cts(alphabet);
      for (std::uint32_t x = 0; x < alphabet; ++x) {
        cts[x] = scheme.encrypt(rows[c - 1].at(r - 1, x), public_keys[r - 1], eng);
      }
      ciphertexts[c - 1][r - 1] = std::move(cts);
    }
  }

  // Phase 3: obfuscated reports G_l(x) = Q_l(x) + sum_k R_{k,l}(x).
  std::vector<protocol::ObfuscatedMessage> honest_reports;
  std::vector<protocol::ObfuscatedMessage> own_reports;
  std::size_t honest_seen = 0;
  for (std::uint32_t l = 1; l <= sensors; ++l) {
    const typestat::QuantizedSqrtType& q =
        is_colluding[l] ? coalition_types[coalition_index[l]] : honest_types[honest_seen];
    protocol::ObfuscatedMessage msg;
    msg.sensor = static_cast<std::uint8_t>(l);
    msg.g.resize(alphabet);
    for (std::uint32_t x = 0; x < alphabet; ++x) {
      std::uint64_t col = 0;
      for (std::uint32_t k = 1; k <= sensors; ++k) {
        col = mod_add(col, rows[k - 1].at(l - 1, x).ticks, modulus);
      }
      msg.g[x] = ring::from_ticks(params.ring_p, mod_add(q.value[x].ticks, col, modulus));
    }
    if (is_colluding[l]) {
      own_reports.push_back(std::move(msg));
    } else {
      honest_reports.push_back(std::move(msg));
      ++honest_seen;
    }
  }

  AttackerContext ctx;
  ctx.params = params;
  ctx.colluding = colluding;
  ctx.public_keys = std::move(public_keys);
  ctx.own_keys = std::move(coalition_keys);
  ctx.own_types = coalition_types;
  ctx.ciphertexts = std::move(ciphertexts);
  ctx.received_masks = std::move(received);
  ctx.own_masks.reserve(colluding.size());
  for (std::uint8_t c : colluding) ctx.own_masks.push_back(rows[c - 1]);
  ctx.honest_reports = std::move(honest_reports);
  ctx.own_reports = std::move(own_reports);
  return ctx;
}

std::vector<std::uint8_t> last_sensors(std::uint32_t sensors, std::uint32_t colluding_count) {
  std::vector<std::uint8_t> ids;
  ids.reserve(colluding_count);
  for (std::uint32_t k = sensors - colluding_count + 1; k <= sensors; ++k) {
    ids.push_back(static_cast<std::uint8_t>(k));
  }
  return ids;
}

// The per-symbol modular sum of the honest types, recovered from the public
// reports: every mask row sums to zero across receivers, so the reports sum
// to the sum of all types; subtracting the coalition's own types leaves the
// honest share.
std::vector<std::uint64_t> leaked_honest_sum(const AttackerContext& ctx) {
  const std::uint64_t m = ctx.params.ring_p.size();
  std::vector<std::uint64_t> sum(ctx.params.alphabet, 0);
  for (const auto* group : {&ctx.honest_reports, &ctx.own_reports}) {
    for (const auto& msg : *group) {
      for (std::uint32_t x = 0; x < ctx.params.alphabet; ++x) {
        sum[x] = mod_add(sum[x], msg.g[x].ticks, m);
      }
    }
  }
  for (const auto& q : ctx.own_types) {
    for (std::uint32_t x = 0; x < ctx.params.alphabet; ++x) {
      sum[x] = mod_sub(sum[x], q.value[x].ticks, m);
    }
  }
  return sum;
}

// Full plaintext recovery: decrypt every honest sensor's ciphertexts with a
// coalition key (possible only against a scheme whose decryption ignores the
// key), rebuild the honest mask rows including the balancing diagonal, strip
// the column sums from the reports.  nullopt as soon as one checksum fails.
std::optional<typestat::MarginalVector> reconstruct_honest_types(const AttackerContext& ctx) {
  const std::uint32_t sensors = ctx.params.sensors;
  const std::uint32_t alphabet = ctx.params.alphabet;
  const std::uint64_t m = ctx.params.ring_p.size();
  std::vector<char> is_colluding(sensors + 1, 0);
  for (std::uint8_t c : ctx.colluding) is_colluding[c] = 1;
  const crypto::KeyPair probe = ctx.own_keys.empty() ? crypto::KeyPair{} : ctx.own_keys.front();
  const auto scheme = crypto::make_scheme(ctx.params.scheme_kind, ctx.params.security_bits);

  // entries[k-1][(l-1)*alphabet + x] for honest senders k
  std::vector<std::vector<std::uint64_t>> entries(
      sensors, std::vector<std::uint64_t>(static_cast<std::size_t>(sensors) * alphabet, 0));
  for (std::uint32_t k = 1; k <= sensors; ++k) {
    if (is_colluding[k]) continue;
    std::vector<std::uint64_t> diag(alphabet, 0);
    for (std::uint32_t r = 1; r <= sensors; ++r) {
      if (r == k) continue;
      for (std::uint32_t x = 0; x < alphabet; ++x) {
        std::uint64_t ticks = 0;
        if (is_colluding[r]) {
          ticks = ctx.received_masks[k - 1][r - 1][x].ticks;
        } else {
          auto plain = scheme->decrypt(ctx.ciphertexts[k - 1][r - 1][x], probe);
          if (!plain) return std::nullopt;
          ticks = plain->ticks % m;
        }
        entries[k - 1][(r - 1) * alphabet + x] = ticks;
        diag[x] = mod_add(diag[x], ticks, m);
      }
    }
    for (std::uint32_t x = 0; x < alphabet; ++x) {
      entries[k - 1][(k - 1) * alphabet + x] = mod_sub(0, diag[x], m);
    }
  }

  typestat::MarginalVector out;
  std::size_t honest_seen = 0;
  for (std::uint32_t l = 1; l <= sensors; ++l) {
    if (is_colluding[l]) continue;
    typestat::QuantizedSqrtType q;
    q.params = ctx.params.ring_p;
    q.value.resize(alphabet);
    for (std::uint32_t x = 0; x < alphabet; ++x) {
      std::uint64_t col = 0;
      for (std::uint32_t k = 1; k <= sensors; ++k) {
        if (is_colluding[k]) continue;
        col = mod_add(col, entries[k - 1][(l - 1) * alphabet + x], m);
      }
      for (std::size_t i = 0; i < ctx.colluding.size(); ++i) {
        col = mod_add(col, ctx.own_masks[i].at(l - 1, x).ticks, m);
      }
      q.value[x] = ring::from_ticks(
          ctx.params.ring_p, mod_sub(ctx.honest_reports[honest_seen].g[x].ticks, col, m));
    }
    out.push_back(std::move(q));
    ++honest_seen;
  }
  return out;
}

bool same_ticks(const typestat::MarginalVector& a, const typestat::MarginalVector& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a[k].value != b[k].value) return false;
  }
  return true;
}

}  // namespace

// --- type prior ------------------------------------------------------------------

void TypePrior::validate() const {
  if (support.empty()) throw std::invalid_argument("type prior: empty support");
  if (probs.size() != support.size()) {
    throw std::invalid_argument("type prior: probability vector length mismatch");
  }
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
      throw std::invalid_argument("type prior: probabilities must be finite and nonnegative");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-6) {
    throw std::invalid_argument("type prior: probabilities must sum to one");
  }
  const auto& first = support.front();
  for (const auto& q : support) {
    if (!(q.params == first.params) || q.alphabet() != first.alphabet() || q.alphabet() == 0) {
      throw std::invalid_argument("type prior: support entries must share ring and alphabet");
    }
    for (const auto& e : q.value) {
      if (e.ticks >= q.params.size()) {
        throw std::invalid_argument("type prior: tick value outside the ring");
      }
    }
  }
}

TypePrior binomial_type_prior(std::uint32_t t, const ring::RingParams& ring_p) {
  if (t == 0) throw std::invalid_argument("binomial type prior: t must be positive");
  TypePrior prior;
  prior.support.reserve(t + 1);
  prior.probs.resize(t + 1);
  double total = 0.0;
  const double log_half = -std::log(2.0);
  for (std::uint32_t c = 0; c <= t; ++c) {
    const double logw = std::lgamma(static_cast<double>(t) + 1.0) -
                        std::lgamma(static_cast<double>(c) + 1.0) -
                        std::lgamma(static_cast<double>(t - c) + 1.0) +
                        static_cast<double>(t) * log_half;
    prior.probs[c] = std::exp(logw);
    total += prior.probs[c];
    const double p = static_cast<double>(c) / static_cast<double>(t);
    prior.support.push_back(typestat::quantize_sqrt(std::vector<double>{p, 1.0 - p}, ring_p));
  }
  for (double& p : prior.probs) p /= total;
  return prior;
}

// --- estimation neighborhood -------------------------------------------------------

bool neighborhood_contains(const typestat::MarginalVector& candidate,
                           const typestat::MarginalVector& truth, double tau) {
  if (candidate.empty() || candidate.size() != truth.size()) {
    throw std::invalid_argument("neighborhood: collections must be nonempty and equal-sized");
  }
  if (!(tau >= 0.0)) throw std::invalid_argument("neighborhood: tau must be nonnegative");
  const auto& params = truth.front().params;
  const std::uint64_t m = params.size();
  for (std::size_t k = 0; k < truth.size(); ++k) {
    if (!(candidate[k].params == params) || !(truth[k].params == params) ||
        candidate[k].alphabet() != truth[k].alphabet() ||
        truth[k].alphabet() != truth.front().alphabet()) {
      throw std::invalid_argument("neighborhood: mismatched ring or alphabet");
    }
  }
  const auto sig_c = signature_of(candidate, m);
  const auto sig_t = signature_of(truth, m);
  if (sig_c != sig_t) return false;
  double dist = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    for (std::size_t x = 0; x < truth[k].alphabet(); ++x) {
      const double d = candidate[k].real(x) - truth[k].real(x);
      dist += d * d;
    }
  }
  return dist <= tau;
}

// --- coset oracles -------------------------------------------------------------------

std::vector<std::uint32_t> coset_class_sizes(const TypePrior& prior, std::uint32_t honest_count) {
  const CosetTable table = build_coset_table(prior, honest_count);
  std::vector<std::uint32_t> sizes;
  sizes.reserve(table.classes.size());
  for (const auto& [sig, cls] : table.classes) {
    sizes.push_back(static_cast<std::uint32_t>(cls.members.size()));
  }
  return sizes;
}

double exact_map_win_rate(const TypePrior& prior, std::uint32_t honest_count) {
  const CosetTable table = build_coset_table(prior, honest_count);
  double win = 0.0;
  for (const auto& [sig, cls] : table.classes) {
    win += *std::max_element(cls.probs.begin(), cls.probs.end());
  }
  return win;
}

double exact_collision_rate(const TypePrior& prior, std::uint32_t honest_count) {
  const CosetTable table = build_coset_table(prior, honest_count);
  double rate = 0.0;
  for (const auto& [sig, cls] : table.classes) {
    double sq = 0.0;
    for (double p : cls.probs) sq += p * p;
    rate += sq / cls.total;
  }
  return rate;
}

std::pair<typestat::MarginalVector, typestat::MarginalVector> find_equal_sum_pair(
    const TypePrior& prior, std::uint32_t honest_count) {
  const CosetTable table = build_coset_table(prior, honest_count);
  const CosetClass* best = nullptr;
  for (const auto& [sig, cls] : table.classes) {
    if (cls.members.size() < 2) continue;
    if (!best || cls.members.front() < best->members.front()) best = &cls;
  }
  if (!best) {
    throw std::invalid_argument("no two distinct type tuples share a masked sum under this prior");
  }
  return {tuple_marginals(prior, honest_count, best->members[0]),
          tuple_marginals(prior, honest_count, best->members[1])};
}

// --- game reports ---------------------------------------------------------------------

std::string GameReport::to_json() const {
  nlohmann::json j;
  j["game"] = game;
  j["attacker"] = attacker;
  j["scheme"] = scheme;
  j["sensors"] = sensors;
  j["colluding"] = colluding;
  j["alphabet"] = alphabet;
  j["precision"] = precision;
  j["tau"] = tau;
  j["trials"] = trials;
  j["seed"] = seed;
  j["win_rate"] = win_rate;
  j["baseline_rate"] = baseline_rate;
  j["band"] = band;
  j["verdict"] = verdict;
  return j.dump(2);
}

// --- games -------------------------------------------------------------------------

GameReport run_tea(const protocol::ProtocolParams& params, std::uint32_t colluding_count,
                   const TypePrior& prior, const TeaAttacker& attacker, double tau,
                   std::uint64_t trials, std::uint64_t seed) {
  params.validate();
  if (!attacker.estimate) {
    throw std::invalid_argument("estimation game: attacker must provide an estimate callback");
  }
  if (colluding_count >= params.sensors) {
    throw std::invalid_argument("estimation game: coalition must leave an honest sensor");
  }
  if (trials == 0) throw std::invalid_argument("estimation game: trials must be positive");
  if (!(tau >= 0.0)) throw std::invalid_argument("estimation game: tau must be nonnegative");
  prior.validate();
  if (!(prior.support.front().params == params.ring_p) ||
      prior.support.front().alphabet() != params.alphabet) {
    throw std::invalid_argument("estimation game: prior must live on the protocol ring/alphabet");
  }
  const std::uint32_t honest = params.sensors - colluding_count;
  const CosetTable table = build_coset_table(prior, honest);
  const rng::AliasTable prior_alias(prior.probs);
  const auto scheme = crypto::make_scheme(params.scheme_kind, params.security_bits);
  const auto colluding = last_sensors(params.sensors, colluding_count);

  std::uint64_t wins = 0;
  std::uint64_t baseline_wins = 0;
  for (std::uint64_t i = 0; i < trials; ++i) {
    rng::Engine eng(rng::derive_seed(seed, {kTagTea, i}));
    typestat::MarginalVector truth;
    truth.reserve(honest);
    for (std::uint32_t j = 0; j < honest; ++j) truth.push_back(prior.support[prior_alias.sample(eng)]);
    typestat::MarginalVector coalition_types;
    coalition_types.reserve(colluding_count);
    for (std::uint32_t j = 0; j < colluding_count; ++j) {
      coalition_types.push_back(prior.support[prior_alias.sample(eng)]);
    }
    AttackerContext ctx = run_phases(params, colluding, truth, coalition_types, *scheme,
                                     attacker.keygen, attacker.masks, eng);
    typestat::MarginalVector estimate = attacker.estimate(ctx, eng);
    try {
      require_shape(estimate, honest, params, "estimate");
    } catch (const std::invalid_argument& e) {
      throw disqualified_error(e.what());
    }
    if (neighborhood_contains(estimate, truth, tau)) ++wins;

    const auto& cls = table.classes.at(signature_of(truth, table.modulus));
    const std::uint32_t resampled = cls.members[cls.alias->sample(eng)];
    if (neighborhood_contains(estimate, tuple_marginals(prior, honest, resampled), tau)) {
      ++baseline_wins;
    }
  }

  GameReport report;
  report.game = "type-estimation";
  report.attacker = attacker.name;
  report.scheme = scheme->name();
  report.sensors = params.sensors;
  report.colluding = colluding_count;
  report.alphabet = params.alphabet;
  report.precision = params.ring_p.precision;
  report.tau = tau;
  report.trials = trials;
  report.seed = seed;
  report.win_rate = static_cast<double>(wins) / static_cast<double>(trials);
  report.baseline_rate = static_cast<double>(baseline_wins) / static_cast<double>(trials);
  report.band = 3.0 * 0.5 / std::sqrt(static_cast<double>(trials));
  report.verdict = verdict_against(report.win_rate, report.baseline_rate, report.band);
  return report;
}

GameReport run_tda(const protocol::ProtocolParams& params, std::uint32_t colluding_count,
                   const typestat::MarginalVector& coalition_types,
                   const typestat::MarginalVector& candidate0,
                   const typestat::MarginalVector& candidate1, const TdaAttacker& attacker,
                   std::uint64_t trials, std::uint64_t seed) {
  params.validate();
  if (!attacker.distinguish) {
    throw std::invalid_argument("distinguishing game: attacker must provide a distinguish callback");
  }
  if (colluding_count >= params.sensors) {
    throw std::invalid_argument("distinguishing game: coalition must leave an honest sensor");
  }
  if (trials == 0) throw std::invalid_argument("distinguishing game: trials must be positive");
  const std::uint32_t honest = params.sensors - colluding_count;
  require_shape(coalition_types, colluding_count, params, "coalition types");
  require_shape(candidate0, honest, params, "candidate 0");
  require_shape(candidate1, honest, params, "candidate 1");
  const std::uint64_t m = params.ring_p.size();
  if (signature_of(candidate0, m) != signature_of(candidate1, m)) {
    throw std::invalid_argument(
        "distinguishing game: candidate collections must share per-symbol masked sums");
  }
  const auto scheme = crypto::make_scheme(params.scheme_kind, params.security_bits);
  const auto colluding = last_sensors(params.sensors, colluding_count);

  std::uint64_t wins = 0;
  for (std::uint64_t i = 0; i < trials; ++i) {
    rng::Engine eng(rng::derive_seed(seed, {kTagTda, i}));
    const int committed = static_cast<int>(eng.below(2));
    const auto& honest_types = committed == 0 ? candidate0 : candidate1;
    AttackerContext ctx = run_phases(params, colluding, honest_types, coalition_types, *scheme,
                                     attacker.keygen, attacker.masks, eng);
    const int guess = attacker.distinguish(ctx, candidate0, candidate1, eng);
    if (guess != 0 && guess != 1) {
      throw disqualified_error("distinguishing game: guess must be 0 or 1");
    }
    if (guess == committed) ++wins;
  }

  GameReport report;
  report.game = "type-distinguishing";
  report.attacker = attacker.name;
  report.scheme = scheme->name();
  report.sensors = params.sensors;
  report.colluding = colluding_count;
  report.alphabet = params.alphabet;
  report.precision = params.ring_p.precision;
  report.tau = 0.0;
  report.trials = trials;
  report.seed = seed;
  report.win_rate = static_cast<double>(wins) / static_cast<double>(trials);
  report.baseline_rate = 0.5;
  report.band = 3.0 * 0.5 / std::sqrt(static_cast<double>(trials));
  report.verdict = verdict_against(report.win_rate, report.baseline_rate, report.band);
  return report;
}

// --- suite attackers -------------------------------------------------------------------

TeaAttacker make_random_guess_tea_attacker(const TypePrior& prior) {
  prior.validate();
  struct State {
    TypePrior prior;
    rng::AliasTable alias;
  };
  auto state = std::make_shared<State>(State{prior, rng::AliasTable(prior.probs)});
  TeaAttacker attacker;
  attacker.name = "random-guess";
  attacker.estimate = [state](const AttackerContext& ctx, rng::Engine& eng) {
    const std::uint32_t honest =
        ctx.params.sensors - static_cast<std::uint32_t>(ctx.colluding.size());
    typestat::MarginalVector guess;
    guess.reserve(honest);
    for (std::uint32_t j = 0; j < honest; ++j) {
      guess.push_back(state->prior.support[state->alias.sample(eng)]);
    }
    return guess;
  };
  return attacker;
}

TeaAttacker make_sum_aware_tea_attacker(const TypePrior& prior,
                                        const protocol::ProtocolParams& params,
                                        std::uint32_t colluding_count) {
  params.validate();
  if (colluding_count >= params.sensors) {
    throw std::invalid_argument("sum-aware attacker: coalition must leave an honest sensor");
  }
  prior.validate();
  struct State {
    TypePrior prior;
    std::uint32_t honest;
    CosetTable table;
    rng::AliasTable alias;
  };
  const std::uint32_t honest = params.sensors - colluding_count;
  auto state = std::make_shared<State>(
      State{prior, honest, build_coset_table(prior, honest), rng::AliasTable(prior.probs)});
  TeaAttacker attacker;
  attacker.name = "sum-aware-map";
  attacker.estimate = [state](const AttackerContext& ctx, rng::Engine& eng) {
    if (auto recovered = reconstruct_honest_types(ctx)) return std::move(*recovered);
    const auto sum = leaked_honest_sum(ctx);
    const auto it = state->table.classes.find(sum);
    if (it == state->table.classes.end()) {
      // Unreachable when the challenger draws from the same prior; degrade to
      // an independent redraw rather than aborting.
      typestat::MarginalVector guess;
      guess.reserve(state->honest);
      for (std::uint32_t j = 0; j < state->honest; ++j) {
        guess.push_back(state->prior.support[state->alias.sample(eng)]);
      }
      return guess;
    }
    return tuple_marginals(state->prior, state->honest, it->second.argmax);
  };
  return attacker;
}

TdaAttacker make_reconstruction_tda_attacker() {
  TdaAttacker attacker;
  attacker.name = "reconstruction";
  attacker.distinguish = [](const AttackerContext& ctx, const typestat::MarginalVector& c0,
                            const typestat::MarginalVector& c1, rng::Engine& eng) {
    const auto recovered = reconstruct_honest_types(ctx);
    if (!recovered) return static_cast<int>(eng.below(2));
    const bool eq0 = same_ticks(*recovered, c0);
    const bool eq1 = same_ticks(*recovered, c1);
    if (eq0 && !eq1) return 0;
    if (eq1 && !eq0) return 1;
    return static_cast<int>(eng.below(2));
  };
  return attacker;
}

// --- mask uniformity ----------------------------------------------------------------------

std::string UniformityReport::to_json() const {
  nlohmann::json j;
  j["exact"] = exact;
  j["uniform"] = uniform;
  j["point_mass"] = point_mass;
  j["coset_size"] = coset_size;
  j["coset_mass"] = coset_mass;
  j["p_value"] = p_value;
  j["samples"] = samples;
  j["notice"] = notice;
  return j.dump(2);
}

UniformityReport check_mask_uniformity(std::uint32_t sensors, std::uint32_t colluding,
                                       std::uint32_t precision, std::uint32_t alphabet,
                                       std::uint64_t samples, std::uint64_t seed) {
  if (sensors < 2) throw std::invalid_argument("mask uniformity: need at least two sensors");
  if (colluding >= sensors) {
    throw std::invalid_argument("mask uniformity: coalition must leave an honest sensor");
  }
  if (precision == 0 || precision > 30) {
    throw std::invalid_argument("mask uniformity: precision must be in [1, 30]");
  }
  if (alphabet == 0) throw std::invalid_argument("mask uniformity: alphabet must be positive");
  if (samples == 0) throw std::invalid_argument("mask uniformity: samples must be positive");

  const std::uint32_t honest = sensors - colluding;
  UniformityReport report;
  if (honest == 1) {
    report.exact = true;
    report.uniform = false;
    report.point_mass = true;
    report.coset_size = 1;
    report.coset_mass = 1.0;
    report.samples = 0;
    report.notice =
        "coalition of size sensors-1 sees every mask entry; the conditional law is a point mass";
    return report;
  }

  const std::uint32_t observed = std::min<std::uint32_t>(2, honest);
  const std::uint64_t free_bits =
      static_cast<std::uint64_t>(precision) * observed * (sensors - 1) * alphabet;
  const std::uint64_t cell_bits =
      static_cast<std::uint64_t>(precision) * (honest - 1) * alphabet;
  if (cell_bits > kMaxCellBits) {
    throw capability_error(
        "mask uniformity: conditional coset too large to tabulate; shrink precision, alphabet, "
        "or the honest sensor count");
  }
  const std::uint64_t modulus = std::uint64_t{1} << precision;
  const std::uint64_t cells = std::uint64_t{1} << cell_bits;
  report.coset_size = cells;
  report.coset_mass = std::ldexp(1.0, -static_cast<int>(cell_bits));

  // Column ids 1..honest are honest, honest+1..sensors colluding; the
  // observed rows belong to the first `observed` honest sensors.
  const auto off_columns = [&](std::uint32_t owner) {
    std::vector<std::uint32_t> cols;
    cols.reserve(sensors - 1);
    for (std::uint32_t l = 1; l <= sensors; ++l) {
      if (l != owner) cols.push_back(l);
    }
    return cols;
  };
  std::vector<std::vector<std::uint32_t>> columns;  // off-diagonal column ids per observed row
  for (std::uint32_t i = 0; i < observed; ++i) columns.push_back(off_columns(i + 1));

  if (free_bits <= 20) {
    // Exhaustive: every off-diagonal assignment of the observed rows, tallied
    // as (coalition-visible part) -> histogram of the honest column sums.
    const std::uint64_t total = std::uint64_t{1} << free_bits;
    std::map<std::uint64_t, std::unordered_map<std::uint64_t, std::uint64_t>> tallies;
    std::vector<std::vector<std::uint64_t>> entry(
        observed, std::vector<std::uint64_t>(static_cast<std::size_t>(sensors) * alphabet, 0));
    for (std::uint64_t assignment = 0; assignment < total; ++assignment) {
      std::uint64_t bits = assignment;
      for (std::uint32_t i = 0; i < observed; ++i) {
        std::vector<std::uint64_t> diag(alphabet, 0);
        for (std::uint32_t c : columns[i]) {
          for (std::uint32_t x = 0; x < alphabet; ++x) {
            const std::uint64_t digit = bits & (modulus - 1);
            bits >>= precision;
            entry[i][(c - 1) * alphabet + x] = digit;
            diag[x] = mod_add(diag[x], digit, modulus);
          }
        }
        for (std::uint32_t x = 0; x < alphabet; ++x) {
          entry[i][i * alphabet + x] = mod_sub(0, diag[x], modulus);
        }
      }
      std::uint64_t key = 0;
      for (std::uint32_t i = 0; i < observed; ++i) {
        for (std::uint32_t l = honest + 1; l <= sensors; ++l) {
          for (std::uint32_t x = 0; x < alphabet; ++x) {
            key = (key << precision) | entry[i][(l - 1) * alphabet + x];
          }
        }
      }
      std::uint64_t sigma = 0;
      for (std::uint32_t l = 1; l < honest; ++l) {  // reduced: last column is determined
        for (std::uint32_t x = 0; x < alphabet; ++x) {
          std::uint64_t s = 0;
          for (std::uint32_t i = 0; i < observed; ++i) {
            s = mod_add(s, entry[i][(l - 1) * alphabet + x], modulus);
          }
          sigma = (sigma << precision) | s;
        }
      }
      ++tallies[key][sigma];
    }
    bool uniform = !tallies.empty();
    for (const auto& [key, hist] : tallies) {
      if (hist.size() != cells) {
        uniform = false;
        break;
      }
      const std::uint64_t expect = hist.begin()->second;
      for (const auto& [sigma, count] : hist) {
        if (count != expect) {
          uniform = false;
          break;
        }
      }
      if (!uniform) break;
    }
    report.exact = true;
    report.uniform = uniform;
    report.samples = total;
    report.notice = "exhaustive enumeration of the observed mask rows";
    return report;
  }

  // Statistical fallback: sample rows, bucket by a hash of the
  // coalition-visible entries, and chi-square the honest column sums against
  // the uniform law within each bucket.
  const std::uint32_t buckets = colluding == 0 ? 1 : 16;
  std::vector<std::vector<std::uint64_t>> counts(buckets, std::vector<std::uint64_t>(cells, 0));
  std::vector<std::uint64_t> bucket_totals(buckets, 0);
  rng::Engine eng(rng::derive_seed(seed, {kTagUnif}));
  std::vector<std::vector<std::uint64_t>> entry(
      observed, std::vector<std::uint64_t>(static_cast<std::size_t>(sensors) * alphabet, 0));
  bool support_ok = true;
  for (std::uint64_t s = 0; s < samples; ++s) {
    for (std::uint32_t i = 0; i < observed; ++i) {
      std::vector<std::uint64_t> diag(alphabet, 0);
      for (std::uint32_t c : columns[i]) {
        for (std::uint32_t x = 0; x < alphabet; ++x) {
          const std::uint64_t digit = eng.below(modulus);
          entry[i][(c - 1) * alphabet + x] = digit;
          diag[x] = mod_add(diag[x], digit, modulus);
        }
      }
      for (std::uint32_t x = 0; x < alphabet; ++x) {
        entry[i][i * alphabet + x] = mod_sub(0, diag[x], modulus);
      }
    }
    std::uint64_t h = 0;
    for (std::uint32_t i = 0; i < observed; ++i) {
      for (std::uint32_t l = honest + 1; l <= sensors; ++l) {
        for (std::uint32_t x = 0; x < alphabet; ++x) {
          h = mix64(h ^ (entry[i][(l - 1) * alphabet + x] + 0x9e3779b97f4a7c15ULL));
        }
      }
    }
    const std::uint32_t bucket = static_cast<std::uint32_t>(h % buckets);
    std::uint64_t sigma = 0;
    for (std::uint32_t l = 1; l < honest; ++l) {
      for (std::uint32_t x = 0; x < alphabet; ++x) {
        std::uint64_t col = 0;
        for (std::uint32_t i = 0; i < observed; ++i) {
          col = mod_add(col, entry[i][(l - 1) * alphabet + x], modulus);
        }
        sigma = (sigma << precision) | col;
      }
    }
    // Support check: the honest column sums must land in the coset fixed by
    // the coalition-visible entries (equivalent to zero row sums).
    for (std::uint32_t x = 0; x < alphabet && support_ok; ++x) {
      std::uint64_t all_honest = 0;
      for (std::uint32_t l = 1; l <= honest; ++l) {
        for (std::uint32_t i = 0; i < observed; ++i) {
          all_honest = mod_add(all_honest, entry[i][(l - 1) * alphabet + x], modulus);
        }
      }
      std::uint64_t visible = 0;
      for (std::uint32_t l = honest + 1; l <= sensors; ++l) {
        for (std::uint32_t i = 0; i < observed; ++i) {
          visible = mod_add(visible, entry[i][(l - 1) * alphabet + x], modulus);
        }
      }
      if (all_honest != mod_sub(0, visible, modulus)) support_ok = false;
    }
    ++counts[bucket][sigma];
    ++bucket_totals[bucket];
  }

  double stat = 0.0;
  double df = 0.0;
  for (std::uint32_t b = 0; b < buckets; ++b) {
    if (bucket_totals[b] == 0) continue;
    const double expect =
        static_cast<double>(bucket_totals[b]) / static_cast<double>(cells);
    for (std::uint64_t cell = 0; cell < cells; ++cell) {
      const double diff = static_cast<double>(counts[b][cell]) - expect;
      stat += diff * diff / expect;
    }
    df += static_cast<double>(cells - 1);
  }
  const boost::math::chi_squared_distribution<double> dist(df);
  report.exact = false;
  report.p_value = boost::math::cdf(boost::math::complement(dist, stat));
  report.uniform = support_ok && report.p_value > 0.01;
  report.samples = samples;
  report.notice =
      "assignment space exceeds the exhaustive bound; chi-square sampling fallback in effect";
  return report;
}

}  // namespace zms::adversary
