#include <benchmark/benchmark.h>

#include "kahler/iteration.hpp"
#include "kahler/reduce.hpp"

using namespace kahler;

namespace {

const NuModel& model() {
  static const NuModel m(Scheme::k3(6), build_k3_rule(20, 20, 14, 10));
  return m;
}

// Unreduced T_nu integrand: w s s^* / D accumulated into a dense matrix.
template <class Reduce>
CMat hilb(const InvariantParams& p, Reduce reduce) {
  const NuModel& m = model();
  const HermitianForm g = expand_params(p);
  const int n = m.dim();
  return reduce(m.size(), CMat(CMat::Zero(n, n)), [&](std::size_t i, CMat& acc) {
    CVec s(n);
    m.sections(i, s.data());
    acc.noalias() += (m.weight(i) / eval_D(g, s)) * s * s.adjoint();
  });
}

void BM_hilb_parallel(benchmark::State& st) {
  const InvariantParams p = InvariantParams::ones(Scheme::k3(6));
  set_threads(static_cast<int>(st.range(0)));
  for (auto _ : st)
    benchmark::DoNotOptimize(hilb(p, [](std::size_t n, const CMat& z, auto&& t) { return block_reduce(n, z, t); }));
  set_threads(0);
}

void BM_hilb_serial(benchmark::State& st) {
  const InvariantParams p = InvariantParams::ones(Scheme::k3(6));
  for (auto _ : st)
    benchmark::DoNotOptimize(hilb(p, [](std::size_t n, const CMat& z, auto&& t) { return serial_reduce(n, z, t); }));
}

void BM_t_nu_step(benchmark::State& st) {
  const InvariantParams p = InvariantParams::ones(Scheme::k3(6));
  set_threads(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(t_nu_step(p, model()));
  set_threads(0);
}

void BM_eta_report(benchmark::State& st) {
  const InvariantParams p = InvariantParams::ones(Scheme::k3(6));
  set_threads(static_cast<int>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(eta_report(p, model()));
  set_threads(0);
}

}  // namespace

BENCHMARK(BM_hilb_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_hilb_parallel)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_t_nu_step)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_eta_report)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
