#include <benchmark/benchmark.h>

#include "msuq/msfem.hpp"
#include "msuq/pod.hpp"
#include "msuq/sampling.hpp"
#include "msuq/uq.hpp"

using namespace msuq;

namespace {

UqConfig rational_potential(int dim, Index fine, Index coarse, std::size_t s) {
  UqConfig cfg;
  cfg.potential.v0 = BasePotential::constant_value(1.0);
  cfg.potential.form = dim == 1 ? ModeForm::rational_1d : ModeForm::power_2d;
  cfg.potential.s = s;
  cfg.potential.q = 0.0;
  cfg.mesh.dim = dim;
  cfg.mesh.domain = dim == 1 ? Box{{-1.0, 0.0}, {1.0, 0.0}} : Box{{0.0, 0.0}, {1.0, 1.0}};
  cfg.mesh.fine = {fine, dim == 1 ? 1 : fine};
  cfg.mesh.coarse = {coarse, dim == 1 ? 1 : coarse};
  cfg.admissibility_cap = 1e9;
  return cfg;
}

std::vector<double> omega(std::size_t s) { return mc_points(5, 1, s).front(); }

}  // namespace

static void BM_Assemble2D(benchmark::State& state) {
  auto space = build_space(2, Box{{0.0, 0.0}, {1.0, 1.0}}, {state.range(0), state.range(0)});
  for (auto _ : state) {
    auto m = assemble_mass(space);
    auto k = assemble_stiffness(space);
    benchmark::DoNotOptimize(m.matrix.nonZeros() + k.matrix.nonZeros());
  }
  state.SetComplexityN(space.dof_count());
}
BENCHMARK(BM_Assemble2D)->Arg(50)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

static void BM_SparseEigDoubleWell(benchmark::State& state) {
  RandomPotentialSpec spec;
  spec.v0 = BasePotential::double_well_1d();
  auto space = build_space(1, Box{{-4.0, 0.0}, {4.0, 0.0}}, {state.range(0), 1});
  const auto m = assemble_mass(space).matrix;
  const SparseMatrix a = affine_operator(spec, space, 1.0).materialize({});
  for (auto _ : state) benchmark::DoNotOptimize(sparse_smallest_gevp(a, m, 5).values[0]);
}
BENCHMARK(BM_SparseEigDoubleWell)->Arg(512)->Arg(2048)->Arg(8192)->Unit(benchmark::kMillisecond);

static void BM_BuildBasis1D(benchmark::State& state) {
  const auto cfg = rational_potential(1, 2048, state.range(0), 64);
  const auto disc = Discretization::build(cfg, true);
  const auto w = omega(64);
  for (auto _ : state)
    benchmark::DoNotOptimize(build_basis(disc.op, w, disc.constraint, disc.alpha).coefficients.data());
}
BENCHMARK(BM_BuildBasis1D)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_BuildBasis2D(benchmark::State& state) {
  const auto cfg = rational_potential(2, state.range(0), state.range(0) / 10, 8);
  const auto disc = Discretization::build(cfg, true);
  const auto w = omega(8);
  for (auto _ : state)
    benchmark::DoNotOptimize(build_basis(disc.op, w, disc.constraint, disc.alpha).coefficients.data());
}
BENCHMARK(BM_BuildBasis2D)->Arg(50)->Arg(100)->Unit(benchmark::kMillisecond);

static void BM_SampleSolve(benchmark::State& state) {
  auto cfg = rational_potential(1, 2048, 32, 64);
  cfg.offline.q = 50;
  cfg.offline.m = 3;
  const auto solver = static_cast<SolverKind>(state.range(0));
  const auto disc = Discretization::build(cfg, true);
  const auto snapshots = mc_points(7, 50, 64);
  std::optional<PodModel> model;
  if (solver == SolverKind::msfem_pod) {
    PodOptions opts;
    opts.fixed_rank = 3;
    model = build_pod_model(disc.op, disc.constraint, disc.alpha, disc.mass, snapshots, opts);
  }
  const auto w = omega(64);
  for (auto _ : state)
    benchmark::DoNotOptimize(solve_sample(disc, solver, w, 1, model ? &*model : nullptr).lambda[0]);
  state.SetLabel(to_string(solver));
}
BENCHMARK(BM_SampleSolve)
    ->Arg(static_cast<int>(SolverKind::fem))
    ->Arg(static_cast<int>(SolverKind::msfem))
    ->Arg(static_cast<int>(SolverKind::msfem_pod))
    ->Unit(benchmark::kMillisecond);

static void BM_PodDecompose(benchmark::State& state) {
  const Index nh = state.range(0), q = 64;
  auto space = build_space(1, Box{{0.0, 0.0}, {1.0, 0.0}}, {nh, 1});
  const auto m = assemble_mass(space).matrix;
  const Matrix u = Matrix::Random(nh, q);
  const MassFactor factor(m);
  for (auto _ : state) benchmark::DoNotOptimize(pod_decompose(u, factor, std::nullopt).sigma[0]);
}
BENCHMARK(BM_PodDecompose)->Arg(1024)->Arg(8192)->Unit(benchmark::kMillisecond);

static void BM_Cbc(benchmark::State& state) {
  const auto n = static_cast<std::uint64_t>(state.range(0));
  const auto weights = product_weights(64);
  for (auto _ : state) benchmark::DoNotOptimize(cbc_generating_vector(n, 64, weights).back());
}
BENCHMARK(BM_Cbc)->Arg(127)->Arg(1009)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
