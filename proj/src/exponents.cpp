#include "zms/exponents.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "zms/typestat.hpp"

namespace zms::exponents {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFeasTol = 1e-12;  // feasibility slack for constraint checks

double xlog2x(double x) { return x > 0.0 ? x * std::log2(x) : 0.0; }

// x * log2(x / y) with the 0 log 0 = 0 convention; +inf when y = 0 < x.
double xlog2_ratio(double x, double y) {
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return kInf;
  return x * std::log2(x / y);
}

void check_distribution(std::span<const double> p, const char* who) {
  if (p.empty()) throw std::invalid_argument(std::string(who) + ": empty distribution");
  double total = 0.0;
  for (double v : p) {
    if (!(v >= 0.0)) throw std::invalid_argument(std::string(who) + ": negative probability");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument(std::string(who) + ": probabilities do not sum to 1");
}

// angle parameterization of binary distributions: r(phi) = cos^2(phi),
// phi in [0, pi/2]; Hellinger diameter d(r(a), r(b)) = 2(1 - cos(a-b)).
double prob_from_angle(double phi) {
  const double c = std::cos(phi);
  return c * c;
}

double angle_gap(double d) {
  // |a - b| on the boundary d(r(a), r(b)) = d
  return std::acos(std::clamp(1.0 - d / 2.0, -1.0, 1.0));
}

// Golden-section minimization of f over [lo, hi] (f may return +inf).
template <typename F>
double golden_min(F&& f, double lo, double hi, int iters = 80) {
  constexpr double invphi = 0.6180339887498949;
  double a = lo, b = hi;
  double x1 = b - invphi * (b - a);
  double x2 = a + invphi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters && b - a > 1e-13; ++i) {
    if (f1 <= f2) {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - invphi * (b - a);
      f1 = f(x1);
    } else {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + invphi * (b - a);
      f2 = f(x2);
    }
  }
  return std::min({f(0.5 * (a + b)), f1, f2});
}

// min over the boundary curve |phi - psi| = gap of
//   binary_kl(q1, r(phi)) + binary_kl(q2, r(psi)),
// scanning both branches densely and refining the best bracket.
double boundary_pair_min(double q1, double q2, double gap, int scan_points) {
  constexpr double half_pi = 1.5707963267948966;
  double best = kInf;
  for (double sgn : {+1.0, -1.0}) {
    auto objective = [&](double phi) {
      const double psi = phi + sgn * gap;
      if (psi < 0.0 || psi > half_pi) return kInf;
      return binary_kl(q1, prob_from_angle(phi)) + binary_kl(q2, prob_from_angle(psi));
    };
    // valid phi range for this branch
    const double lo = std::max(0.0, -sgn * gap);
    const double hi = std::min(half_pi, half_pi - sgn * gap);
    if (lo > hi) continue;
    const int n = std::max(scan_points, 8);
    double best_phi = lo;
    double best_val = kInf;
    for (int i = 0; i <= n; ++i) {
      const double phi = lo + (hi - lo) * i / n;
      const double v = objective(phi);
      if (v < best_val) {
        best_val = v;
        best_phi = phi;
      }
    }
    const double h = (hi - lo) / n;
    best = std::min(best, golden_min(objective, std::max(lo, best_phi - h),
                                     std::min(hi, best_phi + h)));
    best = std::min(best, best_val);
  }
  return best;
}

// Sub-grid refinement of min{delta0 : d >= gamma} for the d0 = 0 ensemble.
// The minimum sits on the boundary d = gamma, which in angle space is the
// segment psi = phi + angle_gap(gamma); a dense scan plus golden refinement
// removes the O(grid_step) bias of taking the best grid node.
double alpha_star_boundary_refined(double gamma) {
  constexpr double half_pi = 1.5707963267948966;
  const double gap = angle_gap(gamma);
  const double hi = half_pi - gap;
  if (hi < 0.0) return kInf;
  auto objective = [&](double phi) {
    return delta0_binary_closed(prob_from_angle(phi), prob_from_angle(phi + gap));
  };
  constexpr int kScan = 1600;
  double best = kInf, best_phi = 0.0;
  for (int i = 0; i <= kScan; ++i) {
    const double phi = hi * i / kScan;
    const double v = objective(phi);
    if (v < best) {
      best = v;
      best_phi = phi;
    }
  }
  const double h = hi / kScan;
  return std::min(best, golden_min(objective, std::max(0.0, best_phi - h),
                                   std::min(hi, best_phi + h)));
}

void require_binary_pair(const ExponentProblem& problem, const char* op) {
  if (problem.sensors != 2 || problem.alphabet != 2)
    throw capability_error(std::string(op) +
                           ": constrained search is implemented for the K=2 binary ensemble only "
                           "(got K=" +
                           std::to_string(problem.sensors) +
                           ", |X|=" + std::to_string(problem.alphabet) + ")");
}

std::uint64_t simplex_grid_count(std::uint64_t n, std::uint32_t cells) {
  // number of compositions of n into `cells` nonnegative parts
  double v = 1.0;
  for (std::uint32_t i = 1; i < cells; ++i) v *= static_cast<double>(n + i) / i;
  return static_cast<std::uint64_t>(v + 0.5);
}

// Enumerates compositions of n into `cells` parts, invoking fn(parts).
template <typename Fn>
void for_each_composition(std::uint64_t n, std::uint32_t cells, std::vector<std::uint64_t>& parts,
                          std::uint32_t at, Fn&& fn) {
  if (at + 1 == cells) {
    parts[at] = n;
    fn(parts);
    return;
  }
  for (std::uint64_t v = 0; v <= n; ++v) {
    parts[at] = v;
    for_each_composition(n - v, cells, parts, at + 1, fn);
  }
}

}  // namespace

// --- elementary measures ------------------------------------------------------

double binary_entropy(double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("binary_entropy: q outside [0,1]");
  return -xlog2x(q) - xlog2x(1.0 - q);
}

double entropy(std::span<const double> p) {
  check_distribution(p, "entropy");
  double h = 0.0;
  for (double v : p) h -= xlog2x(v);
  return h;
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  check_distribution(p, "kl_divergence");
  check_distribution(q, "kl_divergence");
  if (p.size() != q.size()) throw std::invalid_argument("kl_divergence: size mismatch");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double term = xlog2_ratio(p[i], q[i]);
    if (term == kInf) return kInf;
    d += term;
  }
  return std::max(d, 0.0);
}

double binary_kl(double q, double r) {
  // xlog2_ratio never returns -inf, so the sum is +inf exactly on support
  // violation and finite otherwise
  return xlog2_ratio(q, r) + xlog2_ratio(1.0 - q, 1.0 - r);
}

// --- problem / joint distribution ----------------------------------------------

void ExponentProblem::validate() const {
  if (sensors < 2) throw std::invalid_argument("ExponentProblem: need at least two sensors");
  if (alphabet < 2) throw std::invalid_argument("ExponentProblem: need at least two symbols");
  double cells = 1.0;
  for (std::uint32_t k = 0; k < sensors; ++k) cells *= alphabet;
  if (cells > (1 << 20))
    throw capability_error("ExponentProblem: joint alphabet too large for the solvers");
  if (!(d0 >= 0.0)) throw std::invalid_argument("ExponentProblem: d0 must be >= 0");
  if (!(d1 > d0)) throw std::invalid_argument("ExponentProblem: d1 must exceed d0 strictly");
  if (d1 > d_max() + kFeasTol)
    throw std::invalid_argument("ExponentProblem: d1 exceeds the attainable diameter");
  if (!(grid_step > 0.0 && grid_step <= 0.1))
    throw std::invalid_argument("ExponentProblem: grid_step outside (0, 0.1]");
  if (budget == 0) throw std::invalid_argument("ExponentProblem: zero budget");
}

double ExponentProblem::d_max() const {
  return typestat::diameter_upper_bound(sensors, alphabet);
}

JointDistribution JointDistribution::from_product(
    const std::vector<std::vector<double>>& marginals) {
  if (marginals.size() < 2) throw std::invalid_argument("from_product: need at least two factors");
  const std::size_t alphabet = marginals.front().size();
  for (const auto& m : marginals) {
    check_distribution(m, "from_product");
    if (m.size() != alphabet) throw std::invalid_argument("from_product: ragged marginals");
  }
  JointDistribution out;
  out.sensors = static_cast<std::uint32_t>(marginals.size());
  out.alphabet = static_cast<std::uint32_t>(alphabet);
  std::size_t cells = 1;
  for (std::size_t k = 0; k < marginals.size(); ++k) cells *= alphabet;
  out.mass.resize(cells);
  for (std::size_t idx = 0; idx < cells; ++idx) {
    double v = 1.0;
    std::size_t rest = idx;
    for (std::size_t k = 0; k < marginals.size(); ++k) {
      v *= marginals[k][rest % alphabet];
      rest /= alphabet;
    }
    out.mass[idx] = v;
  }
  return out;
}

void JointDistribution::validate() const {
  if (sensors < 2 || alphabet < 2) throw std::invalid_argument("JointDistribution: bad shape");
  std::size_t cells = 1;
  for (std::uint32_t k = 0; k < sensors; ++k) {
    cells *= alphabet;
    if (cells > (1u << 20)) throw capability_error("JointDistribution: joint alphabet too large");
  }
  if (mass.size() != cells) throw std::invalid_argument("JointDistribution: mass size mismatch");
  check_distribution(mass, "JointDistribution");
}

std::vector<std::vector<double>> JointDistribution::marginals() const {
  std::vector<std::vector<double>> out(sensors, std::vector<double>(alphabet, 0.0));
  for (std::size_t idx = 0; idx < mass.size(); ++idx) {
    std::size_t rest = idx;
    for (std::uint32_t k = 0; k < sensors; ++k) {
      out[k][rest % alphabet] += mass[idx];
      rest /= alphabet;
    }
  }
  return out;
}

double JointDistribution::diameter() const { return typestat::hellinger_diameter(marginals()); }

// --- closed forms ----------------------------------------------------------------

double binary_diameter(double q1, double q2) {
  return 2.0 * (1.0 - std::sqrt(q1 * q2) - std::sqrt((1.0 - q1) * (1.0 - q2)));
}

double delta0_binary_closed(double q1, double q2) {
  return 2.0 * binary_entropy(0.5 * (q1 + q2)) - binary_entropy(q1) - binary_entropy(q2);
}

double alpha_star_binary_closed(double gamma) {
  if (!(gamma >= 0.0 && gamma <= 2.0))
    throw std::invalid_argument("alpha_star_binary_closed: gamma outside [0, 2]");
  const double z = gamma * (1.0 - gamma / 4.0);
  return 2.0 * binary_entropy(0.5 * z) - binary_entropy(z);
}

// --- projections -----------------------------------------------------------------

namespace {

// D(p || product of p's own marginals): the family-independent base cost of
// projecting a joint argument onto factorized laws.
double product_base_cost(const JointDistribution& p,
                         const std::vector<std::vector<double>>& marg) {
  double cost = -entropy(p.mass);
  for (std::size_t idx = 0; idx < p.mass.size(); ++idx) {
    if (p.mass[idx] <= 0.0) continue;
    double logq = 0.0;
    std::size_t rest = idx;
    for (std::uint32_t k = 0; k < p.sensors; ++k) {
      const double mv = marg[k][rest % p.alphabet];
      logq += std::log2(mv);  // mv > 0 whenever p.mass[idx] > 0
      rest /= p.alphabet;
    }
    cost -= p.mass[idx] * logq;
  }
  return std::max(cost, 0.0);
}

std::vector<double> mean_marginal(const std::vector<std::vector<double>>& marg) {
  std::vector<double> mean(marg.front().size(), 0.0);
  for (const auto& m : marg)
    for (std::size_t x = 0; x < mean.size(); ++x) mean[x] += m[x];
  for (auto& v : mean) v /= static_cast<double>(marg.size());
  return mean;
}

// Joint-family delta0 closed form for the 2x2, d0 = 0 case: the minimizer is
// the symmetrized coupling u(x,y) = (p(x,y) + p(y,x)) / 2 (it satisfies the
// equal-marginal constraint and the KKT stationarity condition).
double delta0_joint_binary_closed(const JointDistribution& p) {
  const double a = p.mass[1];  // x1=1, x2=0
  const double b = p.mass[2];  // x1=0, x2=1
  const double s = 0.5 * (a + b);
  return std::max(xlog2_ratio(a, s) + xlog2_ratio(b, s), 0.0);
}

// Brute joint-family search over the composition grid for 2x2 instances.
double joint_grid_search(const JointDistribution& p, const ExponentProblem& problem,
                         bool upper_constraint) {
  require_binary_pair(problem, "joint_grid_search");
  const auto n = static_cast<std::uint64_t>(std::llround(1.0 / problem.grid_step));
  if (simplex_grid_count(n, 4) > problem.budget)
    throw capability_error("joint_grid_search: grid exceeds the evaluation budget");
  const double bound = upper_constraint ? problem.d0 : problem.d1;
  double best = kInf;
  std::vector<std::uint64_t> parts(4);
  for_each_composition(n, 4, parts, 0, [&](const std::vector<std::uint64_t>& c) {
    const double inv = 1.0 / static_cast<double>(n);
    const double u00 = c[0] * inv, u10 = c[1] * inv, u01 = c[2] * inv, u11 = c[3] * inv;
    const double m1 = u10 + u11;  // P(X1 = 1)
    const double m2 = u01 + u11;  // P(X2 = 1)
    const double d = binary_diameter(m1, m2);
    if (upper_constraint ? d > bound + kFeasTol : d < bound - kFeasTol) return;
    const double v = xlog2_ratio(p.mass[0], u00) + xlog2_ratio(p.mass[1], u10) +
                     xlog2_ratio(p.mass[2], u01) + xlog2_ratio(p.mass[3], u11);
    best = std::min(best, v);
  });
  return best;
}

}  // namespace

double delta0(const JointDistribution& p, const ExponentProblem& problem) {
  problem.validate();
  p.validate();
  if (p.sensors != problem.sensors || p.alphabet != problem.alphabet)
    throw std::invalid_argument("delta0: distribution shape disagrees with the problem");
  const auto marg = p.marginals();
  const double d_arg = typestat::hellinger_diameter(marg);

  if (problem.family == Family::Joint) {
    if (d_arg <= problem.d0 + kFeasTol) return 0.0;  // p itself is feasible
    if (problem.sensors == 2 && problem.alphabet == 2 && problem.d0 == 0.0)
      return delta0_joint_binary_closed(p);
    return joint_grid_search(p, problem, /*upper_constraint=*/true);
  }

  // product family
  const double base = product_base_cost(p, marg);
  if (d_arg <= problem.d0 + kFeasTol) return base;  // the marginal tuple is feasible
  if (problem.d0 == 0.0) {
    // all factors forced equal; the optimum is the mean marginal
    const auto mean = mean_marginal(marg);
    double h_mean = 0.0;
    for (double v : mean) h_mean -= xlog2x(v);
    return std::max(problem.sensors * h_mean - entropy(p.mass), 0.0);
  }
  require_binary_pair(problem, "delta0 with d0 > 0");
  const double inner =
      boundary_pair_min(marg[0][1], marg[1][1], angle_gap(problem.d0), 2001);
  return base + inner;
}

double delta1(const JointDistribution& p, const ExponentProblem& problem) {
  problem.validate();
  p.validate();
  if (p.sensors != problem.sensors || p.alphabet != problem.alphabet)
    throw std::invalid_argument("delta1: distribution shape disagrees with the problem");
  const auto marg = p.marginals();
  const double d_arg = typestat::hellinger_diameter(marg);

  if (problem.family == Family::Joint) {
    if (d_arg >= problem.d1 - kFeasTol) return 0.0;
    return joint_grid_search(p, problem, /*upper_constraint=*/false);
  }

  const double base = product_base_cost(p, marg);
  if (d_arg >= problem.d1 - kFeasTol) return base;
  require_binary_pair(problem, "delta1 below the alternative diameter");
  const double inner =
      boundary_pair_min(marg[0][1], marg[1][1], angle_gap(problem.d1), 2001);
  return base + inner;
}

double delta0_grid(const JointDistribution& p, const ExponentProblem& problem) {
  problem.validate();
  p.validate();
  if (p.sensors != problem.sensors || p.alphabet != problem.alphabet)
    throw std::invalid_argument("delta0_grid: distribution shape disagrees with the problem");

  if (problem.family == Family::Joint) return joint_grid_search(p, problem, true);

  const auto marg = p.marginals();
  const double base = product_base_cost(p, marg);
  const auto n = static_cast<std::uint64_t>(std::llround(1.0 / problem.grid_step));

  if (problem.d0 == 0.0) {
    // single common factor r: scan the |X|-cell composition grid
    if (simplex_grid_count(n, problem.alphabet) > problem.budget)
      throw capability_error("delta0_grid: grid exceeds the evaluation budget");
    double best = kInf;
    std::vector<std::uint64_t> parts(problem.alphabet);
    std::vector<double> r(problem.alphabet);
    for_each_composition(n, problem.alphabet, parts, 0, [&](const std::vector<std::uint64_t>& c) {
      for (std::size_t x = 0; x < r.size(); ++x) r[x] = static_cast<double>(c[x]) / n;
      double v = 0.0;
      for (const auto& m : marg) {
        for (std::size_t x = 0; x < r.size() && v < kInf; ++x) {
          const double term = xlog2_ratio(m[x], r[x]);
          if (term == kInf) { v = kInf; break; }
          v += term;
        }
        if (v == kInf) break;
      }
      best = std::min(best, v);
    });
    return base + best;
  }

  require_binary_pair(problem, "delta0_grid with d0 > 0");
  if ((n + 1) * (n + 1) > problem.budget)
    throw capability_error("delta0_grid: grid exceeds the evaluation budget");
  const double q1 = marg[0][1], q2 = marg[1][1];
  double best = kInf;
  for (std::uint64_t i = 0; i <= n; ++i) {
    for (std::uint64_t j = 0; j <= n; ++j) {
      const double r1 = static_cast<double>(i) / n;
      const double r2 = static_cast<double>(j) / n;
      if (binary_diameter(r1, r2) > problem.d0 + kFeasTol) continue;
      best = std::min(best, binary_kl(q1, r1) + binary_kl(q2, r2));
    }
  }
  return base + best;
}

// --- curves ------------------------------------------------------------------------

BinaryCurveSolver::BinaryCurveSolver(const ExponentProblem& problem) : problem_(problem) {
  problem_.validate();
  if (problem_.sensors != 2 || problem_.alphabet != 2 || problem_.family != Family::Product)
    throw capability_error(
        "BinaryCurveSolver: curves are computed over the K=2 binary product ensemble only");

  const auto n = static_cast<std::uint64_t>(std::llround(1.0 / problem_.grid_step));
  const std::uint64_t points = (n + 1) * (n + 1);
  const std::uint64_t per_point = problem_.d0 == 0.0 ? 1 : 801;
  if (points * per_point > problem_.budget)
    throw capability_error("BinaryCurveSolver: grid exceeds the evaluation budget");

  std::vector<std::pair<double, double>> grid;  // (diameter, delta0)
  grid.reserve(points);
  for (std::uint64_t i = 0; i <= n; ++i) {
    const double q1 = static_cast<double>(i) / n;
    for (std::uint64_t j = 0; j <= n; ++j) {
      const double q2 = static_cast<double>(j) / n;
      const double d = binary_diameter(q1, q2);
      double v;
      if (d <= problem_.d0 + kFeasTol) {
        v = 0.0;
      } else if (problem_.d0 == 0.0) {
        v = delta0_binary_closed(q1, q2);
      } else {
        v = boundary_pair_min(q1, q2, angle_gap(problem_.d0), 801);
      }
      grid.emplace_back(d, v);
    }
  }
  std::sort(grid.begin(), grid.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  diameters_.resize(grid.size());
  prefix_min_.resize(grid.size());
  double running = kInf;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    diameters_[i] = grid[i].first;
    running = std::min(running, grid[i].second);
    prefix_min_[i] = running;
  }
}

double BinaryCurveSolver::alpha_star(double gamma) const {
  if (!(gamma >= 0.0)) throw std::invalid_argument("alpha_star: gamma must be >= 0");
  // last index with diameter >= gamma (diameters_ sorted descending)
  const auto it = std::lower_bound(diameters_.begin(), diameters_.end(), gamma,
                                   [](double d, double g) { return d >= g; });
  if (it == diameters_.begin()) return kInf;  // no grid point reaches gamma
  const double node_min = prefix_min_[static_cast<std::size_t>(it - diameters_.begin()) - 1];
  if (problem_.d0 != 0.0 || gamma <= 0.0) return node_min;
  return std::min(node_min, alpha_star_boundary_refined(gamma));
}

double BinaryCurveSolver::gamma_star(double alpha) const {
  if (alpha <= 0.0) return 0.0;
  // first index whose prefix minimum drops below alpha (prefix_min_ is
  // non-increasing); its diameter is the largest d with delta0 < alpha.
  const auto it = std::lower_bound(prefix_min_.begin(), prefix_min_.end(), alpha,
                                   [](double v, double a) { return v >= a; });
  const double node =
      it == prefix_min_.end() ? 0.0 : diameters_[static_cast<std::size_t>(it - prefix_min_.begin())];
  if (problem_.d0 != 0.0) return node;
  // Keep gamma* the exact inverse of the refined alpha*: bisect the
  // boundary-refined curve for the largest gamma with alpha*(gamma) < alpha.
  if (alpha_star_boundary_refined(2.0) < alpha) return 2.0;
  double lo = std::max(0.0, node - 4.0 * problem_.grid_step);
  double hi = std::min(2.0, node + 4.0 * problem_.grid_step);
  for (int i = 0; i < 20 && lo > 0.0 && alpha_star_boundary_refined(lo) >= alpha; ++i) {
    lo = std::max(0.0, lo - (hi - lo));
  }
  for (int i = 0; i < 20 && hi < 2.0 && alpha_star_boundary_refined(hi) < alpha; ++i) {
    hi = std::min(2.0, hi + (hi - lo));
  }
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (lo + hi);
    (alpha_star_boundary_refined(mid) < alpha ? lo : hi) = mid;
  }
  return lo;
}

double BinaryCurveSolver::delta1_point(double q1, double q2) const {
  if (binary_diameter(q1, q2) >= problem_.d1 - kFeasTol) return 0.0;
  return boundary_pair_min(q1, q2, angle_gap(problem_.d1), 2001);
}

double BinaryCurveSolver::beta_star_lower(double alpha) const {
  const double gs = gamma_star(alpha);
  if (!std::isfinite(gs)) return 0.0;
  if (gs >= problem_.d1) return 0.0;
  if (gs <= 0.0) return kInf;  // {d < 0} is empty
  // The infimum over the open region {d < gamma*} is approached on its
  // boundary d = gamma* (delta1 does not increase as d grows), so scan the
  // boundary curve in angle space.
  constexpr double half_pi = 1.5707963267948966;
  const double gap = angle_gap(gs);
  double best = kInf;
  const int npts = 2001;
  for (double sgn : {+1.0, -1.0}) {
    const double lo = std::max(0.0, -sgn * gap);
    const double hi = std::min(half_pi, half_pi - sgn * gap);
    if (lo > hi) continue;
    for (int i = 0; i <= npts; ++i) {
      const double phi = lo + (hi - lo) * i / npts;
      best = std::min(best, delta1_point(prob_from_angle(phi), prob_from_angle(phi + sgn * gap)));
    }
  }
  return best;
}

double BinaryCurveSolver::beta_star_upper(double alpha) const {
  if (alpha <= 0.0) return kInf;  // {delta0 < alpha} is empty
  // If the strict region already reaches diameter d1, delta1 vanishes there.
  if (gamma_star(alpha) >= problem_.d1) return 0.0;
  // Otherwise the infimum sits on the boundary delta0 = alpha: for each q1,
  // walk q2 away from q1 until delta0 crosses alpha and evaluate just inside.
  double best = kInf;
  const int nq = 1601;
  for (int i = 0; i <= nq; ++i) {
    const double q1 = static_cast<double>(i) / nq;
    for (double side : {+1.0, -1.0}) {
      const double end = side > 0 ? 1.0 : 0.0;
      double q2b;
      if (delta0_binary_closed(q1, end) < alpha) {
        q2b = end;  // the whole segment stays strictly inside
      } else {
        double lo = q1, hi = end;
        for (int iter = 0; iter < 60; ++iter) {
          const double mid = 0.5 * (lo + hi);
          (delta0_binary_closed(q1, mid) < alpha ? lo : hi) = mid;
        }
        q2b = lo;  // strictly inside the region
      }
      best = std::min(best, delta1_point(q1, q2b));
    }
  }
  return best;
}

double alpha_star(double gamma, const ExponentProblem& problem) {
  problem.validate();
  if (problem.sensors != 2 || problem.alphabet != 2 || problem.family != Family::Product)
    throw capability_error("alpha_star: implemented for the K=2 binary product ensemble only");
  if (!(gamma >= 0.0)) throw std::invalid_argument("alpha_star: gamma must be >= 0");
  // single filtered scan; no need for the solver's sorted table
  const auto n = static_cast<std::uint64_t>(std::llround(1.0 / problem.grid_step));
  const std::uint64_t per_point = problem.d0 == 0.0 ? 1 : 801;
  if ((n + 1) * (n + 1) * per_point > problem.budget)
    throw capability_error("alpha_star: grid exceeds the evaluation budget");
  double best = kInf;
  for (std::uint64_t i = 0; i <= n; ++i) {
    const double q1 = static_cast<double>(i) / n;
    for (std::uint64_t j = 0; j <= n; ++j) {
      const double q2 = static_cast<double>(j) / n;
      if (binary_diameter(q1, q2) < gamma) continue;
      double v;
      if (binary_diameter(q1, q2) <= problem.d0 + kFeasTol) {
        v = 0.0;
      } else if (problem.d0 == 0.0) {
        v = delta0_binary_closed(q1, q2);
      } else {
        v = boundary_pair_min(q1, q2, angle_gap(problem.d0), 801);
      }
      best = std::min(best, v);
    }
  }
  if (problem.d0 == 0.0 && gamma > 0.0 && std::isfinite(best))
    best = std::min(best, alpha_star_boundary_refined(gamma));
  return best;
}

double gamma_star(double alpha, const ExponentProblem& problem) {
  return BinaryCurveSolver(problem).gamma_star(alpha);
}

double beta_star_lower(double alpha, const ExponentProblem& problem) {
  return BinaryCurveSolver(problem).beta_star_lower(alpha);
}

double beta_star_upper(double alpha, const ExponentProblem& problem) {
  return BinaryCurveSolver(problem).beta_star_upper(alpha);
}

// --- curve sampling / gap table -----------------------------------------------------

std::string ExponentCurve::to_csv() const {
  std::ostringstream out;
  out << "argument,value,grid_step\n";
  char buf[96];
  for (const auto& pt : points) {
    std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g\n", pt.argument, pt.value, grid_step);
    out << buf;
  }
  return out.str();
}

ExponentCurve sample_curve(const std::string& name, const ExponentProblem& problem, double lo,
                           double hi, int n) {
  if (n < 2) throw std::invalid_argument("sample_curve: need at least two points");
  if (!(hi > lo)) throw std::invalid_argument("sample_curve: empty argument range");
  const BinaryCurveSolver solver(problem);
  double (BinaryCurveSolver::*query)(double) const = nullptr;
  if (name == "alpha_star") query = &BinaryCurveSolver::alpha_star;
  else if (name == "gamma_star") query = &BinaryCurveSolver::gamma_star;
  else if (name == "beta_star_lower") query = &BinaryCurveSolver::beta_star_lower;
  else if (name == "beta_star_upper") query = &BinaryCurveSolver::beta_star_upper;
  else throw std::invalid_argument("sample_curve: unknown curve " + name);

  ExponentCurve curve;
  curve.name = name;
  curve.grid_step = problem.grid_step;
  curve.points.reserve(n);
  for (int i = 0; i < n; ++i) {
    const double arg = lo + (hi - lo) * i / (n - 1);
    curve.points.push_back(CurvePoint{arg, (solver.*query)(arg)});
  }
  return curve;
}

std::string GapTable::to_csv() const {
  std::ostringstream out;
  out << "alpha,beta_lower,beta_upper,margin,conclusive\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g,%d\n", r.alpha, r.beta_lower,
                  r.beta_upper, r.margin, r.conclusive ? 1 : 0);
    out << buf;
  }
  return out.str();
}

GapTable verify_gap(const ExponentProblem& problem, const std::vector<double>& alphas) {
  const BinaryCurveSolver solver(problem);
  const double ceiling = solver.alpha_star(problem.d1);
  GapTable table;
  table.d1 = problem.d1;
  table.tolerance = 2.0 * problem.grid_step;
  table.all_strict = !alphas.empty();
  for (const double alpha : alphas) {
    if (!(alpha > 0.0 && alpha < ceiling))
      throw std::invalid_argument("verify_gap: alpha must lie strictly inside (0, alpha*(d1))");
    GapRow row;
    row.alpha = alpha;
    row.beta_lower = solver.beta_star_lower(alpha);
    row.beta_upper = solver.beta_star_upper(alpha);
    row.margin = row.beta_upper - row.beta_lower;
    row.conclusive = row.margin > table.tolerance;
    table.all_strict = table.all_strict && row.conclusive && row.margin > 0.0;
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace zms::exponents
