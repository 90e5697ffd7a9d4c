#include <cmath>
#include <random>

#include <benchmark/benchmark.h>

#include "khg/ebe_solver.hpp"
#include "khg/kernels.hpp"

using namespace khg;

namespace {

ExecPolicy policy_of(const benchmark::State& s) { return s.range(1) ? ExecPolicy::Parallel : ExecPolicy::Serial; }

std::vector<double> random_values(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

StencilOperator homotopy_operator(std::size_t n) {
    return StencilOperator(homotopy_axes(8, n, n, true, 1.0), homotopy_roles());
}

void label(benchmark::State& s) { s.SetLabel(s.range(1) ? "openmp" : "serial"); }

} // namespace

static void BM_StencilApply(benchmark::State& s) {
    const auto op = homotopy_operator(static_cast<std::size_t>(s.range(0)));
    const auto psi = random_values(op.nodes(), 1);
    std::vector<double> out(op.nodes());
    for (auto _ : s) {
        op.apply(psi.data(), out.data(), policy_of(s));
        benchmark::DoNotOptimize(out.data());
    }
    s.SetItemsProcessed(static_cast<std::int64_t>(s.iterations() * op.unknowns()));
    label(s);
}

static void BM_EbeResidual(benchmark::State& s) {
    const auto op = homotopy_operator(static_cast<std::size_t>(s.range(0)));
    const auto psi = random_values(op.nodes(), 2);
    const GridField w = ebe_weight({1.0, 1.0}, op);
    std::vector<double> out(op.nodes());
    for (auto _ : s) {
        ebe_residual_kernel(op, psi.data(), w.values().data(), out.data(), policy_of(s));
        benchmark::DoNotOptimize(out.data());
    }
    s.SetItemsProcessed(static_cast<std::int64_t>(s.iterations() * op.unknowns()));
    label(s);
}

static void BM_Assemble(benchmark::State& s) {
    const auto op = homotopy_operator(static_cast<std::size_t>(s.range(0)));
    const auto pot = random_values(op.nodes(), 3);
    for (auto _ : s) {
        auto m = op.assemble(pot.data(), policy_of(s));
        benchmark::DoNotOptimize(m.nonZeros());
    }
    s.SetItemsProcessed(static_cast<std::int64_t>(s.iterations() * op.unknowns()));
    label(s);
}

static void BM_PartitionSum(benchmark::State& s) {
    const std::size_t count = static_cast<std::size_t>(s.range(0));
    const int n = 6;
    std::vector<std::vector<double>> lower;
    std::vector<const double*> ptr;
    for (int k = 0; k < n; ++k) lower.push_back(random_values(count, 10 + static_cast<unsigned>(k)));
    for (const auto& l : lower) ptr.push_back(l.data());
    std::vector<double> out(count);
    for (auto _ : s) {
        partition_sum_kernel(n, ptr, count, 2.0, out.data(), policy_of(s));
        benchmark::DoNotOptimize(out.data());
    }
    s.SetItemsProcessed(static_cast<std::int64_t>(s.iterations() * count));
    label(s);
}

BENCHMARK(BM_StencilApply)->ArgsProduct({{17, 33}, {0, 1}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_EbeResidual)->ArgsProduct({{17, 33}, {0, 1}})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Assemble)->ArgsProduct({{17, 33}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_PartitionSum)->ArgsProduct({{1 << 16, 1 << 20}, {0, 1}})->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
