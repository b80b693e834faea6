// scratch probe (not part of the suite)
#include <cstdio>
#include <memory>

#include "lagrangia/optimizer.hpp"
#include "lagrangia/simulate.hpp"

using namespace lagrangia;

namespace {

struct Target {
    const char* term;
    double value;  // reference coefficient at sigma = 0
};

void run(const char* name, SystemKind kind, int case_id, const char* prior,
         std::vector<const char*> known, double alpha0, double lambda0, double sigma,
         const std::vector<Target>& targets) {
    const SystemSpec sys = SystemSpec::standard(kind);
    auto libv = build_library(sys.space(), standard_library_spec(kind));
    for (const char* t : known) libv.penalty_mask[static_cast<std::size_t>(libv.require(t))] = false;
    if (prior) libv.penalty_mask[static_cast<std::size_t>(libv.require(prior))] = false;
    auto lib = std::make_shared<const CandidateLibrary>(std::move(libv));

    ForcingSpec fs;
    fs.active = case_id == 1;
    auto ds = generate_dataset(sys, fs, 100, 5.0, 0.01, 10, 8888);
    if (sigma > 0) {
        NoiseSpec noise;
        noise.sigma = sigma;
        noise.seed = 4242;
        ds = add_noise(ds, noise);
    }

    StageSchedule sched;
    sched.alpha0 = alpha0;
    sched.lambda0 = lambda0;
    sched.seed = 1234;

    const double t0 = static_cast<double>(clock()) / CLOCKS_PER_SEC;
    const int r = prior ? lib->require(prior) : -1;
    const auto result = train(lib, ds, case_id, r, sched);
    const double t1 = static_cast<double>(clock()) / CLOCKS_PER_SEC;

    std::printf("=== %s (case %d, sigma %g): %s in %d stages, J=%.2e, %.1fs\n", name, case_id,
                sigma, result.report.status.c_str(), result.report.stages_run,
                result.report.final_cost, t1 - t0);
    const auto support = result.model.support();
    std::printf("  support size %zu (targets %zu)\n", support.size(), targets.size());
    for (int k : support) {
        const std::string ts = lib->terms[static_cast<std::size_t>(k)].to_string(lib->space);
        double target = 0.0;
        for (const auto& t : targets)
            if (lib->require(t.term) == k) target = t.value;
        const double c = result.model.coefficients[k];
        const double err = target != 0.0 ? (c / target - 1.0) * 100.0 : 0.0;
        std::printf("  %-28s %+10.4f  target %+10.4f  err %+6.2f%%\n", ts.c_str(), c, target, err);
    }
}

}  // namespace

int main(int argc, char** argv) {
    const double sigma = argc > 1 ? std::atof(argv[1]) : 0.0;
    run("single", SystemKind::single_pendulum, 1, nullptr, {}, 1e-5, 0.1, sigma,
        {{"thd^2", 0.5}, {"cos(th)", 9.78}});
    run("cart", SystemKind::cart_pendulum, 3, "thd^2", {"cos(th)"}, 1e-5, 1.0, sigma,
        {{"thd^2", 1.0}, {"xd^2", 2.975}, {"thd*xd*cos(th)", 1.984}, {"cos(th)", 19.755}});
    run("double", SystemKind::double_pendulum, 3, "th1d^2", {"th2d^2", "cos(th1)", "cos(th2)"}, 5e-6,
        1.0, sigma,
        {{"cos(th1)", 19.620},
         {"cos(th2)", 9.750},
         {"th1d*th2d*cos(th1)*cos(th2)", 1.000},
         {"th1d*th2d*sin(th1)*sin(th2)", 0.999},
         {"th1d^2", 1.000},
         {"th2d^2", 0.499}});
    run("spherical", SystemKind::spherical_pendulum, 3, "thd^2", {"cos(th)"}, 1e-5, 1.0, sigma,
        {{"phid^2*sin(th)^2", 1.000}, {"thd^2", 1.000}, {"cos(th)", 19.630}});
    return 0;
}
