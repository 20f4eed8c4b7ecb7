// Serial reference against OpenMP kernel for each parallel hot spot.

#include <vector>

#include <benchmark/benchmark.h>

#include "calderon/fem.hpp"
#include "calderon/geometry.hpp"
#include "calderon/schrodinger.hpp"
#include "calderon/trace.hpp"

namespace {

using namespace calderon;

const geometry::PlanarDomain& koch(int level) {
  static std::vector<geometry::PlanarDomain> cache;
  if (cache.empty())
    for (int l = 0; l <= 4; ++l) cache.push_back(geometry::generate_prefractal({geometry::Generator::koch_snowflake, l, 1.0}));
  return cache[level];
}

const Mesh& koch_mesh(double h) {
  static std::vector<std::pair<double, Mesh>> cache;
  for (const auto& [k, m] : cache)
    if (k == h) return m;
  cache.emplace_back(h, triangulate(koch(3), h));
  return cache.back().second;
}

double mesh_h(const benchmark::State& state) { return 1.0 / static_cast<double>(state.range(0)); }

template <bool Parallel>
void BM_Stiffness(benchmark::State& state) {
  const Mesh& m = koch_mesh(mesh_h(state));
  const auto c = fem::centroid_values(m, ConductivityField::parse("1 + 0.5*sin(3*x)*y"));
  for (auto _ : state) {
    auto a = Parallel ? fem::assemble_stiffness(m, c) : fem::assemble_stiffness_serial(m, c);
    benchmark::DoNotOptimize(a.nonZeros());
  }
  state.counters["triangles"] = static_cast<double>(m.num_triangles());
}

template <bool Parallel>
void BM_Schur(benchmark::State& state) {
  const Mesh& m = koch_mesh(mesh_h(state));
  const fem::InteriorSolver solver(m, fem::assemble_stiffness(m, ConductivityField::constant(1.0)));
  for (auto _ : state) {
    auto s = Parallel ? trace::schur_complement(solver) : trace::schur_complement_serial(solver);
    benchmark::DoNotOptimize(s.data());
  }
  state.counters["boundary"] = static_cast<double>(m.num_boundary());
}

template <bool Parallel>
void BM_NSet(benchmark::State& state) {
  const auto& d = koch(4);
  const std::vector<double> radii = {0.02, 0.05, 0.1, 0.2, 0.4};
  const int samples = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const double v = Parallel ? geometry::verify_n_set(d, samples, radii) : geometry::verify_n_set_serial(d, samples, radii);
    benchmark::DoNotOptimize(v);
  }
}

template <bool Parallel>
void BM_CGOSweep(benchmark::State& state) {
  const auto& d = koch(2);
  const auto g = ConductivityField::parse("1 + 0.3*bump(16*((x-0.5)^2 + (y-0.3)^2))");
  const std::vector<double> taus = {1, 2, 4, 8};
  const schrodinger::CGOOptions opt{mesh_h(state), 0.0};
  for (auto _ : state) {
    auto r = Parallel ? schrodinger::cgo_decay_experiment(d, g, taus, opt)
                      : schrodinger::cgo_decay_experiment_serial(d, g, taus, opt);
    benchmark::DoNotOptimize(r.slope);
  }
}

}  // namespace

BENCHMARK(BM_Stiffness<false>)->Name("stiffness/serial")->Arg(40)->Arg(80)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Stiffness<true>)->Name("stiffness/parallel")->Arg(40)->Arg(80)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Schur<false>)->Name("schur/serial")->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Schur<true>)->Name("schur/parallel")->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NSet<false>)->Name("n_set/serial")->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NSet<true>)->Name("n_set/parallel")->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CGOSweep<false>)->Name("cgo_sweep/serial")->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CGOSweep<true>)->Name("cgo_sweep/parallel")->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
