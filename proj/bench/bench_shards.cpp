#include <benchmark/benchmark.h>

#include "tandem/acceptance.hpp"
#include "tandem/estimators.hpp"
#include "tandem/randomwalk.hpp"

using namespace tandem;

namespace {

Exec exec_of(const benchmark::State &state) { return state.range(0) ? Exec::Parallel : Exec::Serial; }

void BM_TailCurve(benchmark::State &state) {
    auto model = reference_tandem();
    TailOptions opt;
    opt.customers = 2'000'000;
    opt.mc.exec = exec_of(state);
    std::vector<double> xs{1, 2, 4, 8};
    for (auto _ : state) benchmark::DoNotOptimize(tail_curve(model, xs, opt, 1));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(opt.customers));
}

void BM_WalkTail(benchmark::State &state) {
    auto walk = reference_walk();
    WalkOptions opt;
    opt.cycles = 2'000'000;
    opt.mc.exec = exec_of(state);
    std::vector<double> xs{1, 2, 4, 8};
    for (auto _ : state) benchmark::DoNotOptimize(rw_tail_curve(walk, xs, opt, 2));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(opt.cycles));
}

void BM_ExpMomentW1(benchmark::State &state) {
    auto model = reference_tandem();
    auto prof = decay_profile(model);
    McOptions mc;
    mc.exec = exec_of(state);
    for (auto _ : state) benchmark::DoNotOptimize(exp_moment_W1(model, prof, 2'000'000, mc, 3));
}

}  // namespace

// arg 0 = serial reference, 1 = OpenMP shards
BENCHMARK(BM_TailCurve)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_WalkTail)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExpMomentW1)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
