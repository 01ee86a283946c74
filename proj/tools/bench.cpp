// Benchmark comparing the serial reference kernels against the OpenMP paths.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "swm/chain.hpp"
#include "swm/sampler.hpp"
#include "swm/sweep.hpp"

using namespace swm;

namespace {

using Clock = std::chrono::steady_clock;

template <typename F> double time_best_of(int reps, F&& f)
{
    double best = 1e300;
    for (int r = 0; r < reps; r++) {
        auto t0 = Clock::now();
        f();
        best = std::min(best, std::chrono::duration<double>(Clock::now() - t0).count());
    }
    return best;
}

void report(const char* name, double serial, double parallel)
{
    std::printf("%-28s serial %8.2f ms   parallel %8.2f ms   speedup %.2fx\n", name,
                serial * 1e3, parallel * 1e3, serial / parallel);
}

} // namespace

int main()
{
#ifdef _OPENMP
    std::printf("OpenMP threads: %d\n", omp_get_max_threads());
#else
    std::printf("built without OpenMP; parallel paths run serially\n");
#endif

    // 12-module chain evolution (8192 amplitudes, 12 two-qubit gates).
    Chain big{ket_plus(), {}, ket_H()};
    for (int k = 0; k < 12; k++) {
        big.modules.push_back({sigma_phi(0.1 * k), 0.3});
    }
    double ev_serial = time_best_of(5, [&] { (void)evolve(big, Exec::Serial); });
    double ev_parallel = time_best_of(5, [&] { (void)evolve(big, Exec::Parallel); });
    report("evolve N=12", ev_serial, ev_parallel);

    JointState s1 = evolve(big, Exec::Serial);
    JointState s2 = evolve(big, Exec::Parallel);
    double dev = 0.0;
    for (std::size_t i = 0; i < s1.amps.size(); i++) {
        dev = std::max(dev, std::abs(s1.amps[i] - s2.amps[i]));
    }
    std::printf("  serial/parallel state agreement: %.3g\n", dev);

    // Multinomial sampling, 2e7 shots of a 3-pointer plan.
    Chain triple{ket_plus(),
                 {{sigma_y(), 0.4}, {sigma_z(), 0.4}, {sigma_phi(M_PI / 3.0), 0.4}},
                 ket_H()};
    MeasurementPlan plan{triple, std::vector<PointerSetting>(3, PointerSetting::Plus), true};
    OutcomeDistribution dist = outcome_distribution(plan);
    const std::uint64_t shots = 20000000;
    double sc_serial =
        time_best_of(3, [&] { (void)sample_counts(dist, shots, 1, 0, Exec::Serial); });
    double sc_parallel =
        time_best_of(3, [&] { (void)sample_counts(dist, shots, 1, 0, Exec::Parallel); });
    report("sample_counts 2e7", sc_serial, sc_parallel);

    CountsTable c1 = sample_counts(dist, shots, 1, 0, Exec::Serial);
    CountsTable c2 = sample_counts(dist, shots, 1, 0, Exec::Parallel);
    bool same = c1.counts == c2.counts;
    std::printf("  serial/parallel counts identical: %s\n", same ? "yes" : "NO");

    // Exact sweep of the three-module experiment (rows parallelized inside).
    RunConfig cfg{ket_plus(), "plus", SweepSpec{0.0, 180.0, 1.0}, std::nullopt, std::nullopt, {}};
    double g = 25.0 * M_PI / 180.0;
    cfg.modules = {{sigma_y(), g, "sy", 25.0},
                   {sigma_z(), g, "sz", 25.0},
                   {sigma_phi(M_PI / 3.0), g, "sigma_phi:60", 25.0}};
    cfg.mode = RunMode::Exact;
    double sweep_time = time_best_of(3, [&] { (void)run_sweep(cfg); });
    std::printf("%-28s %8.2f ms (181 rows)\n", "exact sweep, 1 deg steps", sweep_time * 1e3);

    return same && dev == 0.0 ? 0 : 1;
}
