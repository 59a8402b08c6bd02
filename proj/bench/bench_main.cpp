// Timing comparison: OpenMP quadruple sum vs serial reference vs grouped
// route, plus the quadrature oracle at its default operating point.
#include "macrowig/macroscopicity.hpp"
#include "macrowig/quadrature.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <vector>

namespace {

using Clock = std::chrono::steady_clock;

double time_median_ms(const std::function<void()>& fn, int reps) {
    std::vector<double> t;
    for (int i = 0; i < reps; ++i) {
        Clock::time_point t0 = Clock::now();
        fn();
        t.push_back(std::chrono::duration<double, std::milli>(Clock::now() - t0)
                        .count());
    }
    std::sort(t.begin(), t.end());
    return t[t.size() / 2];
}

} // namespace

int main(int argc, char** argv) {
    int reps = argc > 1 ? std::atoi(argv[1]) : 5;
    if (reps < 1) reps = 1;

#ifdef _OPENMP
    std::printf("openmp: max %d thread(s)\n", omp_get_max_threads());
#else
    std::printf("openmp: disabled\n");
#endif
    std::printf("%d repetition(s), median reported\n\n", reps);

    std::printf("closed form, gamma=10, nbar=0, d=0\n");
    std::printf("%6s %12s %12s %12s %10s %12s\n", "N", "parallel ms", "serial ms",
                "grouped ms", "speedup", "max rel gap");
    for (int n : {15, 30, 60}) {
        macrowig::ModelParams p = macrowig::make_params(n, 10.0, 0.0, 0.0);
        macrowig::MacroResult mp, ms, mg;
        double tp = time_median_ms([&] { mp = macrowig::macroscopicity(p); }, reps);
        double ts =
            time_median_ms([&] { ms = macrowig::macroscopicity_serial(p); }, reps);
        double tg =
            time_median_ms([&] { mg = macrowig::macroscopicity_grouped(p); }, reps);
        double gap = std::max(std::abs(ms.value / mp.value - 1.0),
                              std::abs(mg.value / mp.value - 1.0));
        std::printf("%6d %12.2f %12.2f %12.2f %9.2fx %12.2e\n", n, tp, ts, tg,
                    ts / tp, gap);
    }

    std::printf("\nquadrature oracle, N=1, gamma=1, nbar=0, d=0\n");
    std::printf("%8s %12s\n", "points", "seconds");
    for (int pts : {61, 81}) {
        macrowig::QuadratureSpec spec;
        spec.points_per_axis = pts;
        macrowig::ModelParams p = macrowig::make_params(1, 1.0, 0.0, 0.0);
        double t = time_median_ms(
                       [&] { macrowig::measure_by_quadrature(p, spec); }, reps) /
                   1000.0;
        std::printf("%8d %12.3f\n", pts, t);
    }
    return 0;
}
