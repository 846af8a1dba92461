#pragma once
// Error-exponent numerics for the diameter test: KL divergence, the
// constrained projections delta0/delta1, and the threshold/exponent curves
// alpha*, gamma*, beta_* (test-achievable) and beta* (optimal).
//
// Definitions (all logarithms base 2, exponents in bits):
//   delta0(p) = min { D(p || u) : u in the null family,        d(u) <= d0 }
//   delta1(p) = min { D(p || u) : u in the alternative family, d(u) >= d1 }
//   alpha*(gamma)  = min { delta0(p) : d(p) >= gamma }
//   gamma*(alpha)  = inf { gamma >= 0 : alpha*(gamma) >= alpha }
//   beta_*(alpha)  = inf { delta1(p) : d(p) < gamma*(alpha) }
//   beta*(alpha)   = inf { delta1(p) : delta0(p) < alpha }
// where d(.) is the Hellinger diameter of the per-sensor marginals and any
// minimum over an empty set is +infinity.
//
// Families.  The null/alternative families come in two flavors:
//   Family::Product — distributions that factor across sensors, with the
//     diameter constraint on the factor marginals.  This is the ensemble the
//     K=2 binary closed forms hold for (delta0 = 2 H2((q1+q2)/2) - H2(q1) -
//     H2(q2), alpha*(g) = 2 H2((g/2)(1-g/4)) - H2(g(1-g/4))), and the
//     default.
//   Family::Joint — arbitrary joint distributions whose marginal diameter
//     satisfies the constraint.  The glb over this larger family can be
//     strictly smaller: at p = product(0.1, 0.9) with d0 = 0 the joint
//     family attains ~0.7421 bits (at the symmetrized coupling) versus
//     ~1.0620 bits for the product family.  Joint solvers are provided for
//     the 2x2 case as a documented cross-check.
//
// Solvers are exhaustive grid searches with local refinement, following the
// brute-force approach the curves were originally computed with; instances
// beyond the supported sizes are rejected with capability_error rather than
// approximated silently.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "zms/errors.hpp"

namespace zms::exponents {

// --- elementary information measures (bits) ---------------------------------

// H2(q) = -q log2 q - (1-q) log2 (1-q), with H2(0) = H2(1) = 0.
double binary_entropy(double q);

// Shannon entropy of a distribution (validated: nonnegative, sums to 1).
double entropy(std::span<const double> p);

// D(p || q) = sum_x p(x) log2(p(x)/q(x)); +infinity when supp(p) is not
// contained in supp(q); throws std::invalid_argument on malformed inputs.
double kl_divergence(std::span<const double> p, std::span<const double> q);

// D(Bernoulli(q) || Bernoulli(r)) in bits; +infinity on support violation.
double binary_kl(double q, double r);

// --- problem statement -------------------------------------------------------

enum class Family { Product, Joint };

struct ExponentProblem {
  std::uint32_t sensors = 2;   // K
  std::uint32_t alphabet = 2;  // |X|
  double d0 = 0.0;
  double d1 = 0.5;             // requires d0 < d1 strictly
  Family family = Family::Product;
  double grid_step = 5e-4;     // parameter-space resolution of grid solvers
  std::uint64_t budget = 1ull << 26;  // max objective evaluations per solve

  void validate() const;
  double d_max() const;  // largest attainable diameter for (K, |X|)
};

// A distribution over X^K, stored flat with sensor 1 as the fastest digit:
// index(x_1..x_K) = sum_k x_k * |X|^(k-1).
struct JointDistribution {
  std::uint32_t sensors = 0;
  std::uint32_t alphabet = 0;
  std::vector<double> mass;

  static JointDistribution from_product(const std::vector<std::vector<double>>& marginals);
  void validate() const;
  std::vector<std::vector<double>> marginals() const;
  double diameter() const;  // Hellinger diameter of the marginals
};

// --- projections -------------------------------------------------------------

double delta0(const JointDistribution& p, const ExponentProblem& problem);
double delta1(const JointDistribution& p, const ExponentProblem& problem);

// Independent brute-force grid minimizer for delta0 (no closed forms), used
// to cross-check the analytic paths.  Honors problem.family and budget.
double delta0_grid(const JointDistribution& p, const ExponentProblem& problem);

// --- K=2 binary closed forms and parameterizations ---------------------------

// d(q1,q2) = 2 (1 - sqrt(q1 q2) - sqrt((1-q1)(1-q2))).
double binary_diameter(double q1, double q2);
// Product-family delta0 at d0 = 0: 2 H2((q1+q2)/2) - H2(q1) - H2(q2).
double delta0_binary_closed(double q1, double q2);
// alpha*(g) = 2 H2((g/2)(1-g/4)) - H2(g(1-g/4)) for 0 <= g <= 2.
double alpha_star_binary_closed(double gamma);

// --- curves -------------------------------------------------------------------

// Grid solver over the K=2 binary product ensemble (q1, q2) in [0,1]^2.
// Construction scans the full grid once; queries are then cheap.  Requires
// problem.sensors == 2, alphabet == 2, family == Product.
class BinaryCurveSolver {
 public:
  explicit BinaryCurveSolver(const ExponentProblem& problem);

  double alpha_star(double gamma) const;
  double gamma_star(double alpha) const;
  double beta_star_lower(double alpha) const;
  double beta_star_upper(double alpha) const;
  const ExponentProblem& problem() const { return problem_; }

 private:
  // inner delta1 for one ensemble point (boundary scan + golden refinement)
  double delta1_point(double q1, double q2) const;

  ExponentProblem problem_;
  // grid points sorted by diameter, descending, with prefix minima of delta0
  std::vector<double> diameters_;    // sorted descending
  std::vector<double> prefix_min_;   // prefix_min_[i] = min delta0 over [0..i]
};

// One-shot convenience wrappers (each constructs the solver it needs).
double alpha_star(double gamma, const ExponentProblem& problem);
double gamma_star(double alpha, const ExponentProblem& problem);
double beta_star_lower(double alpha, const ExponentProblem& problem);
double beta_star_upper(double alpha, const ExponentProblem& problem);

struct CurvePoint {
  double argument = 0.0;
  double value = 0.0;
};

struct ExponentCurve {
  std::string name;       // one of alpha_star, gamma_star, beta_star_lower, beta_star_upper
  double grid_step = 0.0;
  std::vector<CurvePoint> points;

  // CSV with header "argument,value,grid_step"
  std::string to_csv() const;
};

// Samples one named curve at n evenly spaced arguments in [lo, hi].
ExponentCurve sample_curve(const std::string& name, const ExponentProblem& problem, double lo,
                           double hi, int n);

// --- achievable-vs-optimal gap -------------------------------------------------

struct GapRow {
  double alpha = 0.0;
  double beta_lower = 0.0;  // beta_*(alpha), achieved by the diameter test
  double beta_upper = 0.0;  // beta*(alpha), the optimal exponent
  double margin = 0.0;      // beta_upper - beta_lower
  bool conclusive = false;  // margin exceeds the grid tolerance
};

struct GapTable {
  double d1 = 0.0;
  double tolerance = 0.0;  // margins at or below this are inconclusive
  std::vector<GapRow> rows;
  bool all_strict = false;  // every row conclusive with positive margin

  std::string to_csv() const;
};

// Computes beta_* and beta* at each alpha (each must satisfy
// 0 < alpha < alpha*(d1)) and flags rows whose margin clears the tolerance.
GapTable verify_gap(const ExponentProblem& problem, const std::vector<double>& alphas);

}  // namespace zms::exponents
