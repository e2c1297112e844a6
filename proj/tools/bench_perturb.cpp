// Benchmark: serial reference vs OpenMP path of the perturbation pipeline and
// the Monte Carlo replicate loop.
#include <chrono>
#include <cstdio>

#include "drosc/infer.hpp"
#include "drosc/parallel.hpp"
#include "drosc/simlab.hpp"

using namespace drosc;

namespace {

double time_inference(const PanelData& panel, int threads, int draws) {
  InferConfig cfg;
  cfg.m_draws = draws;
  cfg.lambda = 0.02;
  cfg.seed = 42;
  cfg.threads = threads;
  const auto t0 = std::chrono::steady_clock::now();
  const CiResult ci = run_inference(panel, cfg);
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("  threads=%d  draws=%d  kept=%d  measure=%.4f  %.3fs\n", threads, draws,
              ci.kept_count, ci.total_measure, dt);
  return dt;
}

double time_mc(int threads, int reps) {
  McOptions opts;
  opts.replicates = reps;
  opts.threads = threads;
  opts.seed = 7;
  InferConfig icfg;
  icfg.m_draws = 100;
  const auto t0 = std::chrono::steady_clock::now();
  const McReport rep = run_monte_carlo("S2", {-1.0}, opts, icfg);
  const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("  threads=%d  replicates=%d  coverage=%.3f  %.3fs\n", threads, reps,
              rep.rows.front().coverage, dt);
  return dt;
}

}  // namespace

int main() {
  std::printf("hardware threads: %d\n", hardware_threads());
  DgpConfig dgp = setting("S2", 10, -1.0);
  PanelData panel = gen_panel(dgp, RngStream(3, 0));

  std::printf("perturbation inference (M=500):\n");
  const double s1 = time_inference(panel, 1, 500);
  const double sp = time_inference(panel, 0, 500);
  std::printf("  speedup: %.2fx\n", s1 / sp);

  std::printf("monte carlo (R=40, M=100):\n");
  const double m1 = time_mc(1, 40);
  const double mp = time_mc(0, 40);
  std::printf("  speedup: %.2fx\n", m1 / mp);
  return 0;
}
