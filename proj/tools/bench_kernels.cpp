// bench_kernels — timing harness for the per-trial statistic kernel.  Runs
// the serial reference implementation and the OpenMP-parallel variant on the
// same seeded workload, checks that every statistic matches bit-for-bit, and
// reports wall times plus the speedup.  The serial path is the correctness
// reference; the parallel path must never drift from it.

#include <chrono>
#include <cstdio>
#include <vector>

#include <CLI11.hpp>

#include "zms/rng.hpp"
#include "zms/scenario.hpp"

namespace {

double now_s() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::vector<std::vector<double>> synthetic_pmfs(std::uint32_t sensors, std::uint32_t alphabet,
                                                std::uint64_t seed) {
  zms::rng::Engine eng(seed);
  std::vector<std::vector<double>> pmfs(sensors, std::vector<double>(alphabet));
  for (auto& pmf : pmfs) {
    double total = 0.0;
    for (double& w : pmf) {
      w = eng.uniform01() + 0.01;
      total += w;
    }
    for (double& w : pmf) w /= total;
  }
  return pmfs;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"statistic kernel benchmark: serial reference vs OpenMP"};
  std::uint32_t sensors = 8, alphabet = 128, t = 500, trials = 2000, precision = 13, workers = 0;
  std::uint32_t reps = 3;
  std::uint64_t seed = 1;
  app.add_option("--sensors", sensors, "number of sensors")->capture_default_str();
  app.add_option("--alphabet", alphabet, "observation alphabet size")->capture_default_str();
  app.add_option("--t", t, "samples per sensor per trial")->capture_default_str();
  app.add_option("--trials", trials, "Monte Carlo trials per block")->capture_default_str();
  app.add_option("--precision", precision, "fixed-point bits")->capture_default_str();
  app.add_option("--workers", workers, "threads for the parallel variant (0 = all cores)")
      ->capture_default_str();
  app.add_option("--reps", reps, "repetitions (best time wins)")->capture_default_str();
  app.add_option("--seed", seed, "workload seed")->capture_default_str();
  CLI11_PARSE(app, argc, argv);

  const auto pmfs = synthetic_pmfs(sensors, alphabet, seed);
  const std::uint64_t block_seed = zms::rng::derive_seed(seed, {0x42454e4348});  // "BENCH"

  std::vector<double> serial_out, parallel_out;
  double best_serial = 0.0, best_parallel = 0.0;
  for (std::uint32_t r = 0; r < reps; ++r) {
    const double t0 = now_s();
    serial_out = zms::scenario::statistic_block_serial(pmfs, t, trials, block_seed, precision);
    const double t1 = now_s();
    parallel_out = zms::scenario::statistic_block_parallel(pmfs, t, trials, block_seed, precision,
                                                           workers);
    const double t2 = now_s();
    if (r == 0 || t1 - t0 < best_serial) best_serial = t1 - t0;
    if (r == 0 || t2 - t1 < best_parallel) best_parallel = t2 - t1;
  }

  if (serial_out.size() != parallel_out.size()) {
    std::fprintf(stderr, "MISMATCH: output sizes differ (%zu vs %zu)\n", serial_out.size(),
                 parallel_out.size());
    return 1;
  }
  for (std::size_t i = 0; i < serial_out.size(); ++i) {
    if (serial_out[i] != parallel_out[i]) {
      std::fprintf(stderr, "MISMATCH at trial %zu: serial=%.17g parallel=%.17g\n", i,
                   serial_out[i], parallel_out[i]);
      return 1;
    }
  }

  std::printf("bench: sensors=%u alphabet=%u t=%u trials=%u precision=%u reps=%u\n", sensors,
              alphabet, t, trials, precision, reps);
  std::printf("bench: serial   %.3f s  (%.1f trials/s)\n", best_serial,
              trials / best_serial);
  std::printf("bench: parallel %.3f s  (%.1f trials/s, workers=%u)\n", best_parallel,
              trials / best_parallel, workers);
  std::printf("bench: speedup %.2fx, outputs bit-identical over %zu trials\n",
              best_serial / best_parallel, serial_out.size());
  return 0;
}
