#include <benchmark/benchmark.h>

#include <random>

#include "pnss/cluster.hpp"
#include "pnss/markov.hpp"
#include "pnss/pns.hpp"
#include "pnss/procrustes.hpp"
#include "pnss/synth.hpp"

using namespace pnss;

namespace {

std::vector<Configuration> shapes(std::size_t n, Eigen::Index k, Eigen::Index m) {
  Rng rng(3);
  Matrix base(k, m);
  for (Eigen::Index i = 0; i < base.size(); ++i) base.data()[i] = rng.normal();
  std::vector<Configuration> out;
  for (std::size_t s = 0; s < n; ++s) {
    Matrix x = base;
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] += 0.2 * rng.normal();
    out.emplace_back(x * random_rotation(rng, m));
  }
  return out;
}

Matrix cloud(Eigen::Index ambient, Eigen::Index n) {
  Rng rng(4);
  Matrix pts(ambient, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Vector v(ambient);
    for (Eigen::Index i = 0; i < ambient; ++i) v[i] = 0.4 * rng.normal();
    v[ambient - 1] += 1.0;
    pts.col(j) = v.normalized();
  }
  return pts;
}

}  // namespace

static void BM_OpaFit(benchmark::State& state) {
  const auto cs = shapes(2, state.range(0), 3);
  const PreShape a = to_preshape(cs[0]), b = to_preshape(cs[1]);
  for (auto _ : state) benchmark::DoNotOptimize(opa_fit(a, b));
}
BENCHMARK(BM_OpaFit)->Arg(8)->Arg(64);

static void BM_Gpa(benchmark::State& state) {
  const auto cs = shapes(static_cast<std::size_t>(state.range(0)), 8, 3);
  for (auto _ : state) benchmark::DoNotOptimize(gpa(cs));
}
BENCHMARK(BM_Gpa)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_FitSubsphere(benchmark::State& state) {
  const Matrix pts = cloud(state.range(0), 500);
  for (auto _ : state) benchmark::DoNotOptimize(fit_subsphere(pts));
}
BENCHMARK(BM_FitSubsphere)->Arg(3)->Arg(6)->Unit(benchmark::kMicrosecond);

static void BM_PnsDecompose(benchmark::State& state) {
  const Matrix pts = cloud(state.range(0), 500);
  for (auto _ : state) benchmark::DoNotOptimize(pns_decompose(pts));
}
BENCHMARK(BM_PnsDecompose)->Arg(4)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_WardLinkage(benchmark::State& state) {
  const Matrix pts = cloud(4, state.range(0));
  const DistanceMatrix d = great_circle_distance_matrix(pts);
  for (auto _ : state) benchmark::DoNotOptimize(ward_linkage(d));
}
BENCHMARK(BM_WardLinkage)->Arg(500)->Arg(2000)->Unit(benchmark::kMillisecond);

static void BM_Equilibrium(benchmark::State& state) {
  Matrix p(4, 4);
  p << 0.8628, 0.0712, 0.0135, 0.0525, 0.0744, 0.7480, 0.1608, 0.0168, 0.0069, 0.0893, 0.8501, 0.0537, 0.0655,
      0.0178, 0.1588, 0.7578;
  for (Eigen::Index i = 0; i < 4; ++i) p.row(i) /= p.row(i).sum();
  for (auto _ : state) benchmark::DoNotOptimize(equilibrium(p));
}
BENCHMARK(BM_Equilibrium);

BENCHMARK_MAIN();
