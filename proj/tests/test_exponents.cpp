// Tests for the error-exponent numerics: elementary information measures,
// the constrained projections delta0/delta1, the binary closed forms, the
// grid curve solver, and the achievable-vs-optimal gap table.
//
// Reference values were frozen from an independent prototype of the same
// grid searches (double precision, step 5e-4) and from hand-checked closed
// forms; they appear as literal constants below.

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <vector>

#include "zms/exponents.hpp"
#include "zms/typestat.hpp"

using namespace zms;
using namespace zms::exponents;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// 2 H2(1/2) - 2 H2(0.1): product-family delta0 at marginals (0.1, 0.9), d0 = 0.
constexpr double kDelta0Product = 1.0620088128214376;
// Joint-family counterpart at the same argument (symmetrized coupling).
constexpr double kDelta0Joint = 0.7420858585497175;
// alpha*(0.5) from the closed form.
constexpr double kAlphaStarHalf = 0.5270575167882934;

JointDistribution product_01_09() {
  return JointDistribution::from_product({{0.9, 0.1}, {0.1, 0.9}});
}

ExponentProblem binary_problem(double d0, double d1, double step = 5e-4) {
  ExponentProblem pr;
  pr.sensors = 2;
  pr.alphabet = 2;
  pr.d0 = d0;
  pr.d1 = d1;
  pr.grid_step = step;
  return pr;
}

// Shared default-resolution solver; building it scans the full 5e-4 grid, so
// construct it once for the whole binary.
const BinaryCurveSolver& fine_solver() {
  static const BinaryCurveSolver solver(binary_problem(0.0, 0.5));
  return solver;
}

}  // namespace

TEST_CASE("binary entropy and Shannon entropy") {
  CHECK(binary_entropy(0.0) == 0.0);
  CHECK(binary_entropy(1.0) == 0.0);
  CHECK(binary_entropy(0.5) == 1.0);
  CHECK(binary_entropy(0.1) == doctest::Approx(0.46899559358928117).epsilon(1e-13));
  CHECK(binary_entropy(0.1) == doctest::Approx(binary_entropy(0.9)).epsilon(1e-14));
  CHECK_THROWS_AS(binary_entropy(-0.01), std::invalid_argument);
  CHECK_THROWS_AS(binary_entropy(1.01), std::invalid_argument);

  const std::vector<double> half = {0.5, 0.5};
  const std::vector<double> point = {1.0, 0.0};
  const std::vector<double> uniform8(8, 0.125);
  CHECK(entropy(half) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(entropy(point) == 0.0);
  CHECK(entropy(uniform8) == doctest::Approx(3.0).epsilon(1e-14));
  const std::vector<double> bad = {0.6, 0.6};
  CHECK_THROWS_AS(entropy(bad), std::invalid_argument);
}

TEST_CASE("KL divergence basics") {
  const std::vector<double> p = {0.2, 0.5, 0.3};
  CHECK(kl_divergence(p, p) == doctest::Approx(0.0).epsilon(1e-14));

  const std::vector<double> point = {1.0, 0.0};
  const std::vector<double> half = {0.5, 0.5};
  const std::vector<double> other = {0.0, 1.0};
  CHECK(kl_divergence(point, half) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::isinf(kl_divergence(point, other)));
  CHECK(kl_divergence(point, other) > 0);

  const std::vector<double> shorter = {1.0};
  CHECK_THROWS_AS(kl_divergence(p, shorter), std::invalid_argument);
  const std::vector<double> notdist = {0.2, 0.2, 0.2};
  CHECK_THROWS_AS(kl_divergence(notdist, p), std::invalid_argument);
  const std::vector<double> negative = {1.2, -0.2, 0.0};
  CHECK_THROWS_AS(kl_divergence(negative, p), std::invalid_argument);

  CHECK(binary_kl(0.3, 0.3) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(binary_kl(0.0, 0.0) == 0.0);
  CHECK(binary_kl(1.0, 0.5) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::isinf(binary_kl(0.3, 0.0)));
  CHECK(std::isinf(binary_kl(0.3, 1.0)));
  CHECK(binary_kl(0.0, 0.3) == doctest::Approx(-std::log2(0.7)).epsilon(1e-13));
  // positivity off the diagonal
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> unif(0.05, 0.95);
  for (int i = 0; i < 50; ++i) {
    const double q = unif(gen), r = unif(gen);
    if (std::abs(q - r) < 1e-3) continue;
    CHECK(binary_kl(q, r) > 0.0);
  }
}

TEST_CASE("binary diameter and closed forms") {
  CHECK(binary_diameter(0.9, 0.1) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(binary_diameter(0.1, 0.9) == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(binary_diameter(0.0, 1.0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(binary_diameter(0.37, 0.37) == doctest::Approx(0.0).epsilon(1e-13));

  CHECK(delta0_binary_closed(0.1, 0.9) == doctest::Approx(kDelta0Product).epsilon(1e-13));
  CHECK(delta0_binary_closed(0.42, 0.42) == doctest::Approx(0.0).epsilon(1e-13));

  CHECK(alpha_star_binary_closed(0.0) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(alpha_star_binary_closed(2.0) == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(alpha_star_binary_closed(0.5) == doctest::Approx(kAlphaStarHalf).epsilon(1e-13));
  // strictly increasing on (0, 2]
  double prev = 0.0;
  for (int i = 1; i <= 20; ++i) {
    const double g = 2.0 * i / 20.0;
    const double a = alpha_star_binary_closed(g);
    CHECK(a > prev);
    prev = a;
  }
}

TEST_CASE("joint distributions: construction, marginals, diameter") {
  const auto p = product_01_09();
  REQUIRE(p.sensors == 2);
  REQUIRE(p.alphabet == 2);
  REQUIRE(p.mass.size() == 4);
  // index = x1 + 2 * x2
  CHECK(p.mass[0] == doctest::Approx(0.9 * 0.1).epsilon(1e-14));
  CHECK(p.mass[1] == doctest::Approx(0.1 * 0.1).epsilon(1e-14));
  CHECK(p.mass[2] == doctest::Approx(0.9 * 0.9).epsilon(1e-14));
  CHECK(p.mass[3] == doctest::Approx(0.1 * 0.9).epsilon(1e-14));

  const auto marg = p.marginals();
  REQUIRE(marg.size() == 2);
  CHECK(marg[0][1] == doctest::Approx(0.1).epsilon(1e-13));
  CHECK(marg[1][1] == doctest::Approx(0.9).epsilon(1e-13));
  CHECK(p.diameter() == doctest::Approx(typestat::hellinger_diameter(marg)).epsilon(1e-15));
  CHECK(p.diameter() == doctest::Approx(0.8).epsilon(1e-12));

  // a correlated 2x2 joint round-trips through validate()
  JointDistribution corr;
  corr.sensors = 2;
  corr.alphabet = 2;
  corr.mass = {0.4, 0.1, 0.1, 0.4};
  CHECK_NOTHROW(corr.validate());
  CHECK(corr.diameter() == doctest::Approx(0.0).epsilon(1e-13));  // equal marginals

  JointDistribution bad = corr;
  bad.mass = {0.5, 0.5, 0.5};  // wrong cell count
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.mass = {0.7, 0.2, 0.2, 0.4};  // does not sum to one
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK_THROWS_AS(JointDistribution::from_product({{0.5, 0.5}, {0.3, 0.3, 0.4}}),
                  std::invalid_argument);
}

TEST_CASE("problem validation and capability limits") {
  ExponentProblem pr = binary_problem(0.0, 0.5);
  CHECK_NOTHROW(pr.validate());
  CHECK(pr.d_max() == doctest::Approx(2.0).epsilon(1e-15));

  ExponentProblem bad = pr;
  bad.d1 = 0.0;  // d0 < d1 violated
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = pr;
  bad.d0 = 0.7;
  bad.d1 = 0.7;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = pr;
  bad.alphabet = 1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = pr;
  bad.grid_step = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = pr;
  bad.sensors = 8;
  bad.alphabet = 6;  // 6^8 joint cells exceed the supported table size
  CHECK_THROWS_AS(bad.validate(), capability_error);

  // exhausted evaluation budget
  ExponentProblem tiny = binary_problem(0.0, 0.5);
  tiny.budget = 1000;
  CHECK_THROWS_AS(BinaryCurveSolver{tiny}, capability_error);
  CHECK_THROWS_AS(delta0_grid(product_01_09(), tiny), capability_error);

  // curve solver is a K=2 binary tool
  ExponentProblem k3 = binary_problem(0.0, 0.5);
  k3.sensors = 3;
  CHECK_THROWS_AS(BinaryCurveSolver{k3}, capability_error);
}

TEST_CASE("delta0, product family") {
  const auto p = product_01_09();
  const auto pr = binary_problem(0.0, 0.5);

  SUBCASE("closed form at d0 = 0 matches the frozen constant") {
    CHECK(delta0(p, pr) == doctest::Approx(kDelta0Product).epsilon(1e-12));
  }

  SUBCASE("identical marginals cost nothing") {
    const auto q = JointDistribution::from_product({{0.7, 0.3}, {0.7, 0.3}});
    CHECK(delta0(q, pr) == doctest::Approx(0.0).epsilon(1e-13));
  }

  SUBCASE("independent grid search agrees with the analytic path") {
    auto coarse = binary_problem(0.0, 0.5, 2e-3);
    // the optimal common factor (1/2, 1/2) lies on the grid, so the match is tight
    CHECK(delta0_grid(p, coarse) == doctest::Approx(delta0(p, coarse)).epsilon(1e-12));
  }

  SUBCASE("correlated joint argument: only the dependence is paid for") {
    JointDistribution corr;
    corr.sensors = 2;
    corr.alphabet = 2;
    corr.mass = {0.45, 0.05, 0.05, 0.45};  // strongly dependent, equal marginals
    const double v = delta0(corr, pr);
    const double expected =
        kl_divergence(corr.mass, std::vector<double>{0.25, 0.25, 0.25, 0.25});
    CHECK(v == doctest::Approx(expected).epsilon(1e-12));
    CHECK(v > 0.0);
    auto coarse = binary_problem(0.0, 0.5, 2e-3);
    CHECK(delta0_grid(corr, coarse) >= v - 1e-12);
    CHECK(delta0_grid(corr, coarse) <= v + 2e-3);
  }

  SUBCASE("relaxing d0 weakly lowers the projection") {
    double prev = kInf;
    for (double d0 : {0.0, 0.1, 0.3, 0.6, 0.79}) {
      const double v = delta0(p, binary_problem(d0, 1.9));
      CHECK(v <= prev + 1e-9);
      CHECK(v >= 0.0);
      prev = v;
    }
    // once the argument's own diameter is allowed, the projection is free
    CHECK(delta0(p, binary_problem(0.81, 1.9)) == doctest::Approx(0.0).epsilon(1e-13));
  }

  SUBCASE("d0 > 0 boundary search agrees with the grid scan") {
    const auto mid = binary_problem(0.3, 1.9, 2e-3);
    const double analytic = delta0(p, mid);
    const double grid = delta0_grid(p, mid);
    CHECK(analytic > 0.0);
    CHECK(analytic < kDelta0Product);
    CHECK(grid >= analytic - 1e-9);  // both over-approximate the true minimum
    CHECK(grid <= analytic + 5e-3);
  }

  SUBCASE("wider ensembles use the mean-marginal closed form") {
    const std::vector<std::vector<double>> marg = {
        {0.1, 0.2, 0.3, 0.4}, {0.4, 0.3, 0.2, 0.1}, {0.25, 0.25, 0.25, 0.25}};
    const auto q = JointDistribution::from_product(marg);
    ExponentProblem pk;
    pk.sensors = 3;
    pk.alphabet = 4;
    pk.d0 = 0.0;
    pk.d1 = 1.0;
    pk.grid_step = 1e-2;
    const double closed = delta0(q, pk);
    CHECK(closed > 0.0);
    const double grid = delta0_grid(q, pk);
    CHECK(grid >= closed - 1e-12);
    CHECK(grid <= closed + 5e-3);
  }

  SUBCASE("shape mismatches are rejected") {
    ExponentProblem pk = binary_problem(0.0, 0.5);
    pk.alphabet = 3;
    CHECK_THROWS_AS(delta0(p, pk), std::invalid_argument);
  }
}

TEST_CASE("delta0, joint family") {
  auto pr = binary_problem(0.0, 0.5, 5e-3);
  pr.family = Family::Joint;
  const auto p = product_01_09();

  SUBCASE("closed form matches the frozen constant") {
    CHECK(delta0(p, pr) == doctest::Approx(kDelta0Joint).epsilon(1e-12));
  }

  SUBCASE("grid search lands on the symmetrized coupling exactly") {
    // at step 5e-3 the minimizer (0.09, 0.41, 0.41, 0.09) lies on the grid
    CHECK(delta0_grid(p, pr) == doctest::Approx(kDelta0Joint).epsilon(1e-12));
  }

  SUBCASE("the joint family never costs more than the product family") {
    const auto prod = binary_problem(0.0, 0.5);
    CHECK(delta0(p, pr) < delta0(p, prod));
    // and relaxing d0 can only help further
    auto relaxed = pr;
    relaxed.d0 = 0.3;
    relaxed.d1 = 1.9;
    const double v = delta0(p, relaxed);
    CHECK(v <= kDelta0Joint + 1e-9);
    CHECK(v >= 0.0);
  }

  SUBCASE("joint solvers are limited to 2x2 instances") {
    auto pk = pr;
    pk.sensors = 3;
    const auto q =
        JointDistribution::from_product({{0.5, 0.5}, {0.1, 0.9}, {0.9, 0.1}});
    CHECK_THROWS_AS(delta0(q, pk), capability_error);
  }
}

TEST_CASE("delta1") {
  const auto pr_mid = binary_problem(0.0, 0.5);
  const auto near = JointDistribution::from_product({{0.6, 0.4}, {0.55, 0.45}});

  SUBCASE("arguments already past the alternative diameter are free") {
    const auto p = product_01_09();  // diameter 0.8 >= d1 = 0.5
    CHECK(delta1(p, pr_mid) == doctest::Approx(0.0).epsilon(1e-13));
  }

  SUBCASE("interior arguments pay a positive cost") {
    CHECK(near.diameter() < 0.1);
    CHECK(delta1(near, pr_mid) > 0.0);
  }

  SUBCASE("a fully spread alternative is unreachable from interior support") {
    CHECK(std::isinf(delta1(near, binary_problem(0.0, 2.0))));
    auto joint = binary_problem(0.0, 2.0, 5e-3);
    joint.family = Family::Joint;
    CHECK(std::isinf(delta1(near, joint)));
  }

  SUBCASE("monotone in the alternative diameter") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> unif(0.05, 0.95);
    for (int i = 0; i < 100; ++i) {
      const double a = unif(gen), b = unif(gen);
      const auto q = JointDistribution::from_product({{1.0 - a, a}, {1.0 - b, b}});
      double prev = -1.0;
      for (double d1 : {0.3, 0.7, 1.2, 1.7}) {
        const double v = delta1(q, binary_problem(0.0, d1));
        CHECK(v >= prev - 1e-9);
        prev = v;
      }
    }
  }

  SUBCASE("boundary search never exceeds direct feasible evaluations") {
    const auto p = JointDistribution::from_product({{0.8, 0.2}, {0.65, 0.35}});
    const double d1 = 0.9;
    const double v = delta1(p, binary_problem(0.0, d1));
    std::mt19937_64 gen(13);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    int accepted = 0;
    while (accepted < 50) {
      const double r1 = unif(gen), r2 = unif(gen);
      if (binary_diameter(r1, r2) < d1) continue;
      ++accepted;
      const double direct = binary_kl(0.2, r1) + binary_kl(0.35, r2);
      CHECK(v <= direct + 1e-9);
    }
  }
}

TEST_CASE("alpha* on the grid vs the closed form") {
  const BinaryCurveSolver& solver = fine_solver();

  SUBCASE("20 thresholds stay within 1e-3, one-sided") {
    for (int i = 0; i < 20; ++i) {
      const double g = 0.1 + (2.0 - 0.1) * i / 19.0;
      const double grid = solver.alpha_star(g);
      const double closed = alpha_star_binary_closed(g);
      CHECK(grid >= closed - 1e-12);  // the lattice is a subset of the ensemble
      CHECK(grid - closed <= 1e-3);
    }
  }

  SUBCASE("frozen spot values") {
    CHECK(solver.alpha_star(0.5) >= kAlphaStarHalf - 1e-12);
    CHECK(solver.alpha_star(0.5) <= kAlphaStarHalf + 1e-3);
    CHECK(solver.alpha_star(2.0) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(solver.alpha_star(0.0) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(std::isinf(solver.alpha_star(2.5)));  // empty constraint set
  }

  SUBCASE("monotone in the threshold") {
    double prev = -1.0;
    for (int i = 0; i <= 40; ++i) {
      const double g = 2.0 * i / 40.0;
      const double v = solver.alpha_star(g);
      CHECK(v >= prev - 1e-15);
      prev = v;
    }
  }

  SUBCASE("free function agrees with the solver") {
    const auto coarse = binary_problem(0.0, 0.5, 2e-3);
    BinaryCurveSolver cs(coarse);
    for (double g : {0.25, 0.8, 1.5}) {
      CHECK(alpha_star(g, coarse) == doctest::Approx(cs.alpha_star(g)).epsilon(1e-12));
    }
  }

  SUBCASE("a positive null diameter zeroes alpha* below it") {
    auto relaxed = binary_problem(0.4, 1.9, 5e-3);
    CHECK(alpha_star(0.2, relaxed) == doctest::Approx(0.0).epsilon(1e-13));
    CHECK(alpha_star(0.9, relaxed) > 0.0);
  }

  SUBCASE("halving the step moves the curve by less than the coarse step") {
    BinaryCurveSolver coarse(binary_problem(0.0, 0.5, 2e-3));
    BinaryCurveSolver fine(binary_problem(0.0, 0.5, 1e-3));
    for (int i = 0; i < 10; ++i) {
      const double g = 0.15 + i * 0.18;
      CHECK(std::abs(coarse.alpha_star(g) - fine.alpha_star(g)) <= 4 * 2e-3);
    }
  }
}

TEST_CASE("gamma* inverts alpha*") {
  const BinaryCurveSolver& solver = fine_solver();

  SUBCASE("monotone and consistent with alpha*") {
    double prev = -1.0;
    for (int i = 1; i <= 15; ++i) {
      const double a = 0.01 + (1.99 - 0.01) * (i - 1) / 14.0;
      const double g = solver.gamma_star(a);
      CHECK(g >= prev - 1e-15);
      prev = g;
      if (g + 2e-3 <= 2.0) {
        // just past gamma*, every grid point meets the exponent demand
        CHECK(solver.alpha_star(g + 2e-3) >= a - 1e-9);
      }
    }
  }

  SUBCASE("edge conventions") {
    CHECK(solver.gamma_star(0.0) == 0.0);
    CHECK(solver.gamma_star(-1.0) == 0.0);
    // demands above the whole curve push the threshold to the full spread
    CHECK(solver.gamma_star(2.5) == doctest::Approx(2.0).epsilon(1e-12));
    // a vanishing demand is met from just off the diagonal onward, so the
    // threshold collapses with it (delta0 ~ c d^2 near d = 0)
    const double tiny = solver.gamma_star(1e-9);
    CHECK(tiny >= 0.0);
    CHECK(tiny <= 1e-3);
    CHECK(solver.gamma_star(1e-13) <= tiny + 1e-12);
  }
}

TEST_CASE("achievable and optimal rate curves, frozen gap table at d1 = 0.5") {
  const auto pr = binary_problem(0.0, 0.5);
  const std::vector<double> fractions = {0.1, 0.25, 0.5, 0.75, 0.9};
  std::vector<double> alphas;
  for (double f : fractions) alphas.push_back(f * kAlphaStarHalf);

  const GapTable table = verify_gap(pr, alphas);
  REQUIRE(table.rows.size() == alphas.size());
  CHECK(table.d1 == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(table.tolerance == doctest::Approx(2 * pr.grid_step).epsilon(1e-12));

  // frozen from the independent prototype (step 5e-4)
  const std::vector<double> beta_lower_ref = {0.384221, 0.202120, 0.067799, 0.013791, 0.001995};
  const std::vector<double> beta_upper_ref = {0.445477, 0.273613, 0.121765, 0.026473, 0.003928};

  for (std::size_t i = 0; i < alphas.size(); ++i) {
    const auto& row = table.rows[i];
    CHECK(row.alpha == doctest::Approx(alphas[i]).epsilon(1e-12));
    CHECK(std::abs(row.beta_lower - beta_lower_ref[i]) <= 2e-3);
    CHECK(std::abs(row.beta_upper - beta_upper_ref[i]) <= 2e-3);
    CHECK(row.beta_lower <= row.beta_upper + 1e-9);  // the test cannot beat the optimum
    CHECK(row.margin == doctest::Approx(row.beta_upper - row.beta_lower).epsilon(1e-12));
    CHECK(row.margin > 0.0);
    CHECK(row.conclusive);
  }
  CHECK(table.all_strict);

  // interior-alpha validation
  CHECK_THROWS_AS(verify_gap(pr, {0.0}), std::invalid_argument);
  CHECK_THROWS_AS(verify_gap(pr, {-0.1}), std::invalid_argument);
  CHECK_THROWS_AS(verify_gap(pr, {2.5}), std::invalid_argument);

  // CSV shape
  const std::string csv = table.to_csv();
  std::istringstream in(csv);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "alpha,beta_lower,beta_upper,margin,conclusive");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty()) ++rows;
  }
  CHECK(rows == alphas.size());
}

TEST_CASE("beta curve edges") {
  const BinaryCurveSolver& solver = fine_solver();

  // demands beyond alpha*(d1): the induced threshold passes d1, nothing to prove
  const double ceiling = solver.alpha_star(0.5);
  CHECK(solver.beta_star_lower(ceiling * 1.05) == 0.0);
  CHECK(solver.beta_star_upper(ceiling * 1.05) == 0.0);

  // vanishing or negative demands
  CHECK(std::isinf(solver.beta_star_upper(-0.5)));
  CHECK(std::isinf(solver.beta_star_upper(0.0)));
}

TEST_CASE("curve sampling and CSV output") {
  const auto pr = binary_problem(0.0, 0.5, 2e-3);
  BinaryCurveSolver solver(pr);

  const auto curve = sample_curve("alpha_star", pr, 0.1, 2.0, 20);
  CHECK(curve.name == "alpha_star");
  CHECK(curve.grid_step == doctest::Approx(2e-3).epsilon(1e-15));
  REQUIRE(curve.points.size() == 20);
  CHECK(curve.points.front().argument == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(curve.points.back().argument == doctest::Approx(2.0).epsilon(1e-15));
  for (const auto& pt : curve.points) {
    CHECK(pt.value == doctest::Approx(solver.alpha_star(pt.argument)).epsilon(1e-12));
  }

  const auto gcurve = sample_curve("gamma_star", pr, 0.05, 1.5, 5);
  for (const auto& pt : gcurve.points) {
    CHECK(pt.value == doctest::Approx(solver.gamma_star(pt.argument)).epsilon(1e-12));
  }

  const std::string csv = curve.to_csv();
  std::istringstream in(csv);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "argument,value,grid_step");
  std::size_t rows = 0;
  double arg = 0, val = 0, step = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &arg, &val, &step) == 3);
    ++rows;
  }
  CHECK(rows == 20);
  CHECK(step == doctest::Approx(2e-3).epsilon(1e-12));

  CHECK_THROWS_AS(sample_curve("nonsense", pr, 0.1, 1.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(sample_curve("alpha_star", pr, 1.0, 0.1, 4), std::invalid_argument);
  CHECK_THROWS_AS(sample_curve("alpha_star", pr, 0.1, 1.0, 1), std::invalid_argument);
}
