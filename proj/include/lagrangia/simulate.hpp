#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lagrangia/dataset.hpp"
#include "lagrangia/dynamics.hpp"
#include "lagrangia/parallel.hpp"
#include "lagrangia/rng.hpp"

namespace lagrangia {

// Sinusoidal excitation τ_i(t) = A_i sin(ω_i t) with per-trajectory random
// amplitude and frequency.
struct ForcingSpec {
    bool active = false;
    double amp_min = 0.5;
    double amp_max = 2.0;
    double freq_min = 0.5 * 3.14159265358979323846;
    double freq_max = 2.0 * 3.14159265358979323846;
};

struct TrajectoryForcing {
    bool active = false;
    Eigen::VectorXd amp;
    Eigen::VectorXd omega;

    Eigen::VectorXd tau(double t, int n) const {
        if (!active) return Eigen::VectorXd::Zero(n);
        Eigen::VectorXd out(n);
        for (int i = 0; i < n; ++i) out[i] = amp[i] * std::sin(omega[i] * t);
        return out;
    }
};

inline TrajectoryForcing draw_forcing(const ForcingSpec& spec, int n, Rng& rng) {
    TrajectoryForcing f;
    f.active = spec.active;
    if (!spec.active) return f;
    f.amp.resize(n);
    f.omega.resize(n);
    for (int i = 0; i < n; ++i) {
        f.amp[i] = rng.uniform(spec.amp_min, spec.amp_max);
        f.omega[i] = rng.uniform(spec.freq_min, spec.freq_max);
    }
    return f;
}

// Acceleration field for integration: qdd = f(t, q, qd).
using AccelFn = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&, const Eigen::VectorXd&)>;

struct Rollout {
    std::vector<double> t;
    Eigen::MatrixXd q, qd;
    bool diverged = false;
    long divergence_step = -1;
};

// Classic fixed-step RK4 on the state (q, q̇). Stores duration/dt + 1 samples;
// each stored step is integrated with `substeps` internal RK4 steps. If the
// state leaves the finite range the rollout is truncated and flagged.
inline Rollout integrate_rk4(const AccelFn& accel, const State& init, double duration, double dt,
                             int substeps) {
    if (dt <= 0 || duration < dt) throw ConfigError("integration needs dt > 0 and duration >= dt");
    if (substeps < 1) throw ConfigError("substeps must be >= 1");
    const int n = static_cast<int>(init.q.size());
    const long steps = std::lround(duration / dt);

    Rollout out;
    out.t.resize(static_cast<std::size_t>(steps + 1));
    out.q.setZero(steps + 1, n);
    out.qd.setZero(steps + 1, n);

    Eigen::VectorXd q = init.q, qd = init.qd;
    Eigen::VectorXd k1q(n), k1v(n), k2q(n), k2v(n), k3q(n), k3v(n), k4q(n), k4v(n);
    const double h = dt / substeps;

    auto store = [&](long row, double time) {
        out.t[static_cast<std::size_t>(row)] = time;
        out.q.row(row) = q.transpose();
        out.qd.row(row) = qd.transpose();
    };
    store(0, 0.0);

    for (long s = 0; s < steps; ++s) {
        for (int sub = 0; sub < substeps; ++sub) {
            const double t0 = (static_cast<double>(s) + static_cast<double>(sub) / substeps) * dt;
            k1q = qd;
            k1v = accel(t0, q, qd);
            k2q = qd + 0.5 * h * k1v;
            k2v = accel(t0 + 0.5 * h, q + 0.5 * h * k1q, qd + 0.5 * h * k1v);
            k3q = qd + 0.5 * h * k2v;
            k3v = accel(t0 + 0.5 * h, q + 0.5 * h * k2q, qd + 0.5 * h * k2v);
            k4q = qd + h * k3v;
            k4v = accel(t0 + h, q + h * k3q, qd + h * k3v);
            q += (h / 6.0) * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
            qd += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        }
        if (!q.allFinite() || !qd.allFinite()) {
            out.diverged = true;
            out.divergence_step = s + 1;
            out.t.resize(static_cast<std::size_t>(s + 1));
            out.q.conservativeResize(s + 1, n);
            out.qd.conservativeResize(s + 1, n);
            return out;
        }
        store(s + 1, static_cast<double>(s + 1) * dt);
    }
    return out;
}

// One clean ground-truth trajectory: RK4 on the true dynamics, with q̈ and τ
// recorded from the closed forms at the stored sample times (q̈ is never
// finite-differenced).
inline TrajectoryDataset rk4_integrate(const SystemSpec& sys, const TrajectoryForcing& forcing,
                                       const State& init, double duration, double dt, int substeps) {
    const int n = sys.dof();
    AccelFn accel = [&](double t, const Eigen::VectorXd& q, const Eigen::VectorXd& qd) {
        return equations_of_motion(sys, q, qd, forcing.tau(t, n));
    };
    Rollout roll = integrate_rk4(accel, init, duration, dt, substeps);
    if (roll.diverged)
        throw NumericalError("trajectory diverged (non-finite state) at step " +
                             std::to_string(roll.divergence_step));

    TrajectoryDataset ds;
    ds.resize(n, static_cast<long>(roll.t.size()));
    for (long r = 0; r < ds.samples(); ++r) {
        const double t = roll.t[static_cast<std::size_t>(r)];
        const Eigen::VectorXd q = roll.q.row(r).transpose();
        const Eigen::VectorXd qd = roll.qd.row(r).transpose();
        const Eigen::VectorXd tau = forcing.tau(t, n);
        ds.t[static_cast<std::size_t>(r)] = t;
        ds.q.row(r) = q.transpose();
        ds.qd.row(r) = qd.transpose();
        ds.qdd.row(r) = equations_of_motion(sys, q, qd, tau).transpose();
        ds.tau.row(r) = tau.transpose();
    }
    ds.meta.system = sys;
    ds.meta.dt = dt;
    ds.meta.duration = duration;
    ds.meta.substeps = substeps;
    ds.meta.forced = forcing.active;
    return ds;
}

// Per-trajectory randomness: the initial condition is drawn first from the
// trajectory's stream, then the forcing parameters, so datasets are identical
// whether trajectories are generated serially or in parallel.
struct TrajectoryDraws {
    State init;
    TrajectoryForcing forcing;
};

inline TrajectoryDraws draw_trajectory(const SystemSpec& sys, const ForcingSpec& forcing,
                                       std::uint64_t seed, int traj_index, int attempt = 0) {
    Rng stream = Rng(seed).stream(static_cast<std::uint64_t>(traj_index));
    if (attempt > 0) stream = stream.stream(static_cast<std::uint64_t>(attempt));
    TrajectoryDraws d;
    d.init = draw_initial_condition(sys, stream);
    d.forcing = draw_forcing(forcing, sys.dof(), stream);
    return d;
}

// Clean training dataset across `count` initial conditions. A trajectory that
// reaches a singular configuration is retried with a fresh draw from its own
// stream; generation is parallel across trajectories.
inline TrajectoryDataset generate_dataset(const SystemSpec& sys, const ForcingSpec& forcing,
                                          int count, double duration, double dt, int substeps,
                                          std::uint64_t seed, int threads = 0) {
    if (count < 1) throw ConfigError("trajectory count must be positive");
    const int n = sys.dof();
    const long per_traj = std::lround(duration / dt) + 1;

    TrajectoryDataset ds;
    ds.resize(n, per_traj * count);
    ds.meta.system = sys;
    ds.meta.sigma = 0.0;
    ds.meta.seed = seed;
    ds.meta.dt = dt;
    ds.meta.duration = duration;
    ds.meta.substeps = substeps;
    ds.meta.forced = forcing.active;

    parallel_chunks(count, 1, threads, [&](long begin, long end) {
        for (long j = begin; j < end; ++j) {
            TrajectoryDataset traj;
            bool done = false;
            for (int attempt = 0; attempt < 32 && !done; ++attempt) {
                TrajectoryDraws draws = draw_trajectory(sys, forcing, seed, static_cast<int>(j), attempt);
                try {
                    traj = rk4_integrate(sys, draws.forcing, draws.init, duration, dt, substeps);
                    done = true;
                } catch (const SingularConfigError&) {
                    continue;  // resample this trajectory's initial condition
                }
            }
            if (!done)
                throw NumericalError("trajectory " + std::to_string(j) +
                                     " kept hitting a singular configuration after 32 attempts");
            const long base = j * per_traj;
            for (long r = 0; r < per_traj; ++r) {
                ds.t[static_cast<std::size_t>(base + r)] = traj.t[static_cast<std::size_t>(r)];
                ds.q.row(base + r) = traj.q.row(r);
                ds.qd.row(base + r) = traj.qd.row(r);
                ds.qdd.row(base + r) = traj.qdd.row(r);
                ds.tau.row(base + r) = traj.tau.row(r);
                ds.traj_id[static_cast<std::size_t>(base + r)] = static_cast<int>(j);
            }
        }
    });
    return ds;
}

}  // namespace lagrangia
