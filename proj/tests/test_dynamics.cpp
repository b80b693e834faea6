#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "lagrangia/dataset.hpp"
#include "lagrangia/dynamics.hpp"
#include "lagrangia/simulate.hpp"

using namespace lagrangia;

namespace {

const double kPi = 3.14159265358979323846;

std::string temp_file(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("single pendulum accelerations") {
    const SystemSpec sys = SystemSpec::standard(SystemKind::single_pendulum);
    Eigen::VectorXd q(1), qd(1), tau(1);
    q << 0.0; qd << 0.0; tau << 0.0;
    CHECK(equations_of_motion(sys, q, qd, tau)[0] == Catch::Approx(0.0).margin(1e-15));
    q << kPi / 2.0;
    CHECK(equations_of_motion(sys, q, qd, tau)[0] == Catch::Approx(-9.81));
    tau << 2.5;
    CHECK(equations_of_motion(sys, q, qd, tau)[0] == Catch::Approx(2.5 - 9.81));
}

TEST_CASE("spherical pendulum singular configuration") {
    const SystemSpec sys = SystemSpec::standard(SystemKind::spherical_pendulum);
    Eigen::VectorXd q(2), qd(2), tau(2);
    q << 1e-8, 0.0; qd << 0.0, 1.0; tau << 0.0, 0.0;
    CHECK_THROWS_AS(equations_of_motion(sys, q, qd, tau), SingularConfigError);
}

TEST_CASE("initial condition ranges") {
    SECTION("spherical") {
        const SystemSpec sys = SystemSpec::standard(SystemKind::spherical_pendulum);
        for (const auto& s : sample_initial_conditions(sys, 50, 7)) {
            CHECK(s.q[0] > kPi / 3.0);
            CHECK(s.q[0] < kPi / 2.0);
            CHECK(s.q[1] == 0.0);
            CHECK(s.qd[0] == 0.0);
            CHECK(s.qd[1] == kPi);
        }
    }
    SECTION("double pendulum starts at rest") {
        const SystemSpec sys = SystemSpec::standard(SystemKind::double_pendulum);
        for (const auto& s : sample_initial_conditions(sys, 50, 7)) {
            CHECK(s.qd.isZero(0.0));
            CHECK(std::abs(s.q[0]) < kPi);
            CHECK(std::abs(s.q[1]) < kPi);
        }
    }
    SECTION("same seed twice gives identical draws") {
        const SystemSpec sys = SystemSpec::standard(SystemKind::cart_pendulum);
        const auto a = sample_initial_conditions(sys, 20, 99);
        const auto b = sample_initial_conditions(sys, 20, 99);
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].q == b[i].q);
            CHECK(a[i].qd == b[i].qd);
        }
    }
}

TEST_CASE("rk4 sample count and forcing record") {
    const SystemSpec sys = SystemSpec::standard(SystemKind::single_pendulum);
    ForcingSpec fs;
    fs.active = true;
    Rng rng(5);
    const auto forcing = draw_forcing(fs, 1, rng);
    State init;
    init.q = Eigen::VectorXd::Constant(1, 0.3);
    init.qd = Eigen::VectorXd::Zero(1);
    const auto traj = rk4_integrate(sys, forcing, init, 5.0, 0.01, 10);
    REQUIRE(traj.samples() == 501);
    // recorded τ matches the closed form exactly at sample times
    for (long r = 0; r < traj.samples(); ++r) {
        const double t = traj.t[static_cast<std::size_t>(r)];
        CHECK(traj.tau(r, 0) == forcing.amp[0] * std::sin(forcing.omega[0] * t));
    }
}

TEST_CASE("passive energy conservation over five seconds") {
    for (const SystemKind kind : {SystemKind::single_pendulum, SystemKind::cart_pendulum,
                                  SystemKind::double_pendulum, SystemKind::spherical_pendulum}) {
        const SystemSpec sys = SystemSpec::standard(kind);
        Rng rng(11);
        Rng stream = rng.stream(0);
        State init = draw_initial_condition(sys, stream);
        const auto traj = rk4_integrate(sys, {}, init, 5.0, 0.01, 10);
        const double e0 = energy(sys, traj.q.row(0).transpose(), traj.qd.row(0).transpose());
        const double scale = std::max(1.0, std::abs(e0));
        double max_drift = 0.0;
        for (long r = 0; r < traj.samples(); ++r) {
            const double e = energy(sys, traj.q.row(r).transpose(), traj.qd.row(r).transpose());
            max_drift = std::max(max_drift, std::abs(e - e0) / scale);
        }
        INFO(to_string(kind));
        CHECK(max_drift <= 1e-6);

        if (kind == SystemKind::spherical_pendulum) {
            const double p0 = phi_momentum(sys, traj.q.row(0).transpose(), traj.qd.row(0).transpose());
            double max_p_drift = 0.0;
            for (long r = 0; r < traj.samples(); ++r) {
                const double p = phi_momentum(sys, traj.q.row(r).transpose(), traj.qd.row(r).transpose());
                max_p_drift = std::max(max_p_drift, std::abs(p - p0) / std::max(1.0, std::abs(p0)));
            }
            CHECK(max_p_drift <= 1e-5);
        }
    }
}

TEST_CASE("dataset generation is deterministic and parallelism invariant") {
    const SystemSpec sys = SystemSpec::standard(SystemKind::double_pendulum);
    const auto a = generate_dataset(sys, {}, 6, 1.0, 0.01, 5, 42, /*threads=*/1);
    const auto b = generate_dataset(sys, {}, 6, 1.0, 0.01, 5, 42, /*threads=*/2);
    REQUIRE(a.samples() == b.samples());
    CHECK(a.q == b.q);
    CHECK(a.qd == b.qd);
    CHECK(a.qdd == b.qdd);
    CHECK(a.tau == b.tau);
}

TEST_CASE("noise injection") {
    const SystemSpec sys = SystemSpec::standard(SystemKind::single_pendulum);
    const auto clean = generate_dataset(sys, {}, 100, 5.0, 0.01, 1, 2023);
    REQUIRE(clean.samples() == 50100);

    SECTION("sigma zero is the identity") {
        NoiseSpec noise;
        noise.sigma = 0.0;
        const auto same = add_noise(clean, noise);
        CHECK(same.q == clean.q);
        CHECK(same.qd == clean.qd);
        CHECK(same.qdd == clean.qdd);
        CHECK(same.tau == clean.tau);
    }

    SECTION("channel selection leaves other columns untouched") {
        NoiseSpec noise;
        noise.sigma = 1e-2;
        noise.on_q = true;
        noise.on_qd = noise.on_qdd = noise.on_tau = false;
        noise.seed = 9;
        const auto noisy = add_noise(clean, noise);
        CHECK(noisy.q != clean.q);
        CHECK(noisy.qd == clean.qd);
        CHECK(noisy.qdd == clean.qdd);
        CHECK(noisy.tau == clean.tau);
        CHECK(noisy.t == clean.t);
    }

    SECTION("empirical standard deviation matches sigma") {
        NoiseSpec noise;
        noise.sigma = 1e-3;
        noise.seed = 31;
        const auto noisy = add_noise(clean, noise);
        const Eigen::MatrixXd delta = noisy.q - clean.q;
        const double std = std::sqrt(delta.array().square().mean());
        CHECK(std == Catch::Approx(noise.sigma).epsilon(0.02));
    }
}

TEST_CASE("dataset save and load round trip") {
    const SystemSpec sys = SystemSpec::standard(SystemKind::cart_pendulum);
    ForcingSpec fs;
    fs.active = true;
    auto ds = generate_dataset(sys, fs, 3, 0.5, 0.01, 10, 77);
    NoiseSpec noise;
    noise.sigma = 1e-3;
    noise.seed = 5;
    ds = add_noise(ds, noise);

    const std::string path = temp_file("lagrangia_ds_test.csv");
    save_dataset(ds, path);
    const auto back = load_dataset(path);

    CHECK(back.n == ds.n);
    CHECK(back.t == ds.t);
    CHECK(back.q == ds.q);
    CHECK(back.qd == ds.qd);
    CHECK(back.qdd == ds.qdd);
    CHECK(back.tau == ds.tau);
    CHECK(back.traj_id == ds.traj_id);
    CHECK(back.meta.sigma == ds.meta.sigma);
    CHECK(back.meta.seed == ds.meta.seed);
    CHECK(to_string(back.meta.system.kind) == to_string(ds.meta.system.kind));
    CHECK(back.meta.forced == ds.meta.forced);
}

TEST_CASE("dataset load reports malformed input") {
    const std::string path = temp_file("lagrangia_bad_ds.csv");
    {
        std::ofstream f(path);
        f << "t,q_1,qd_1,qdd_1,tau_1,traj_id\n";
        f << "0.0,1.0,2.0,3.0\n";  // five columns missing
    }
    try {
        load_dataset(path);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        const std::string msg = e.what();
        CHECK(msg.find(":2:") != std::string::npos);  // line number
        CHECK(msg.find("n=1") != std::string::npos);  // expected coordinate count
    }
}
