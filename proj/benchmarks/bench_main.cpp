#include <benchmark/benchmark.h>

#include "ardcore/demo.hpp"
#include "ardcore/network.hpp"
#include "ardcore/surrogate.hpp"

using namespace ard;

namespace {

const RationalSurrogate& bench_surrogate() {
    static const RationalSurrogate f = [] {
        RunConfig cfg = demo_four_bus_config();
        cfg.assess.dataset.mode = DatasetMode::Direct;
        cfg.assess.dataset_size = 120;
        cfg.assess.fit.basis_degree = 2;
        const IbrUnit& unit = cfg.system.ibr_at("B3");
        const VsgPlant plant{unit.filter, cfg.system.omega0};
        const CoordinateBounds box = cfg.attack_set_for("B3").box;
        const auto params = lhs_sample(box, cfg.assess.dataset_size, cfg.assess.seed);
        const TrainingDataset d =
            generate_dataset(plant, params, cfg.grid, box, cfg.assess.dataset);
        return fit_surrogate(d, cfg.assess.fit);
    }();
    return f;
}

void BM_thevenin_sweep(benchmark::State& state) {
    const RunConfig cfg = demo_four_bus_config();
    for (auto _ : state) {
        benchmark::DoNotOptimize(thevenin_at(cfg.system, "B3", cfg.grid));
    }
}
BENCHMARK(BM_thevenin_sweep)->Unit(benchmark::kMillisecond);

void BM_vector_fit(benchmark::State& state) {
    const RunConfig cfg = demo_two_bus_config();
    const IbrUnit& unit = cfg.system.ibr_at("B2");
    const VsgPlant plant{unit.filter, cfg.system.omega0};
    const ImpedanceSpectrum z_inv = plant.spectrum(unit.params, cfg.grid);
    const TheveninEquivalent th = thevenin_at(cfg.system, "B2", cfg.grid);
    const ImpedanceSpectrum y_sys = assemble_admittance(z_inv, th.spectrum);
    for (auto _ : state) {
        benchmark::DoNotOptimize(vector_fit(y_sys, cfg.assess.n_poles));
    }
}
BENCHMARK(BM_vector_fit)->Unit(benchmark::kMillisecond);

void BM_surrogate_eval(benchmark::State& state) {
    const RationalSurrogate& f = bench_surrogate();
    const auto points = lhs_sample(f.bounds(), 16, 7);
    const Complex s(0.0, 2.0 * M_PI * 45.0);
    std::size_t k = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(f.evaluate(points[k % points.size()], s));
        ++k;
    }
}
BENCHMARK(BM_surrogate_eval);

void BM_surrogate_gradient(benchmark::State& state) {
    const RationalSurrogate& f = bench_surrogate();
    const auto points = lhs_sample(f.bounds(), 16, 9);
    const Complex s(-10.0, 2.0 * M_PI * 60.0);
    std::size_t k = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(f.gradient(points[k % points.size()], s));
        ++k;
    }
}
BENCHMARK(BM_surrogate_gradient);

}  // namespace

BENCHMARK_MAIN();
