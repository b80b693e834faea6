#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>

#include "lagrangia/eltensors.hpp"
#include "lagrangia/model.hpp"
#include "lagrangia/simulate.hpp"

using namespace lagrangia;

namespace {

std::shared_ptr<const CandidateLibrary> benchmark_library(const SystemSpec& sys) {
    return std::make_shared<CandidateLibrary>(
        build_library(sys.space(), standard_library_spec(sys.kind)));
}

TrajectoryDataset small_dataset(const SystemSpec& sys, bool forced, int count = 6,
                                double duration = 1.5, std::uint64_t seed = 404) {
    ForcingSpec fs;
    fs.active = forced;
    return generate_dataset(sys, fs, count, duration, 0.01, 10, seed);
}

// Five-point-free central difference of a scalar function of one coefficient.
template <class F>
double central_fd(F&& f, Eigen::VectorXd c, int k, double h) {
    c[k] += h;
    const double plus = f(c);
    c[k] -= 2 * h;
    const double minus = f(c);
    return (plus - minus) / (2 * h);
}

}  // namespace

TEST_CASE("term partials for simple candidates") {
    const SystemSpec sys = SystemSpec::standard(SystemKind::cart_pendulum);
    auto lib = benchmark_library(sys);
    TermPartials partials(*lib);

    Eigen::VectorXd q(2), qd(2);
    q << 0.6, -0.3;
    qd << 1.2, 0.8;
    Eigen::MatrixXd m, n;
    Eigen::VectorXd o;

    SECTION("velocity square has constant Hessian") {
        partials.eval(lib->require("thd^2"), q, qd, m, n, o);
        CHECK(m(0, 0) == 2.0);
        CHECK(m(0, 1) == 0.0);
        CHECK(m(1, 1) == 0.0);
        CHECK(n.isZero(0.0));
        CHECK(o.isZero(0.0));
    }

    SECTION("cosine has a gradient only") {
        partials.eval(lib->require("cos(th)"), q, qd, m, n, o);
        CHECK(m.isZero(0.0));
        CHECK(n.isZero(0.0));
        CHECK(o[0] == Catch::Approx(-std::sin(q[0])));
        CHECK(o[1] == 0.0);
    }

    SECTION("velocity cross term with cosine") {
        partials.eval(lib->require("xd*thd*cos(th)"), q, qd, m, n, o);
        CHECK(m(0, 0) == 0.0);
        CHECK(m(0, 1) == Catch::Approx(std::cos(q[0])));
        CHECK(m(1, 0) == Catch::Approx(std::cos(q[0])));
        CHECK(m(1, 1) == 0.0);
        // row of N for θ̇ differentiates ẋcosθ by θ
        CHECK(n(0, 0) == Catch::Approx(-qd[1] * std::sin(q[0])));
        CHECK(o[0] == Catch::Approx(-qd[1] * qd[0] * std::sin(q[0])));
    }
}

TEST_CASE("term partials match finite differences of the candidates") {
    const SystemSpec sys = SystemSpec::standard(SystemKind::cart_pendulum);
    auto lib = benchmark_library(sys);
    TermPartials partials(*lib);
    const int n = sys.dof();
    const int k = lib->require("xd*thd*cos(th)");
    const CandidateExpr& phi = lib->terms[static_cast<std::size_t>(k)];

    Rng rng(17);
    Eigen::MatrixXd m, nn;
    Eigen::VectorXd o;
    const double h = 1e-5;
    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd q(n), qd(n);
        for (int i = 0; i < n; ++i) {
            q[i] = rng.uniform(-2, 2);
            qd[i] = rng.uniform(-2, 2);
        }
        partials.eval(k, q, qd, m, nn, o);
        for (int i = 0; i < n; ++i) {
            // O_i = ∂φ/∂q_i
            Eigen::VectorXd qp = q, qm = q;
            qp[i] += h;
            qm[i] -= h;
            const double fd_o = (phi.evaluate(qp, qd) - phi.evaluate(qm, qd)) / (2 * h);
            CHECK(std::abs(o[i] - fd_o) <= 1e-5 * (1 + std::abs(fd_o)));
            const CandidateExpr dphi = phi.diff(Var{i, true});
            for (int j = 0; j < n; ++j) {
                // M_ij = ∂²φ/∂q̇_i∂q̇_j via fd of the symbolic first partial
                Eigen::VectorXd vp = qd, vm = qd;
                vp[j] += h;
                vm[j] -= h;
                const double fd_m = (dphi.evaluate(q, vp) - dphi.evaluate(q, vm)) / (2 * h);
                CHECK(std::abs(m(i, j) - fd_m) <= 1e-5 * (1 + std::abs(fd_m)));
                // N_ij = ∂²φ/∂q̇_i∂q_j
                Eigen::VectorXd up = q, um = q;
                up[j] += h;
                um[j] -= h;
                const double fd_n = (dphi.evaluate(up, qd) - dphi.evaluate(um, qd)) / (2 * h);
                CHECK(std::abs(nn(i, j) - fd_n) <= 1e-5 * (1 + std::abs(fd_n)));
            }
        }
    }
}

TEST_CASE("assembled Hessians are symmetric at every sample") {
    for (const SystemKind kind :
         {SystemKind::cart_pendulum, SystemKind::double_pendulum, SystemKind::spherical_pendulum}) {
        const SystemSpec sys = SystemSpec::standard(kind);
        auto lib = benchmark_library(sys);
        TermPartials partials(*lib);
        const auto ds = small_dataset(sys, false, 3, 1.0);
        const auto tensors = assemble_tensors(partials, ds, TensorSet::accel);
        double worst = 0.0;
        for (long s = 0; s < tensors.count; ++s)
            for (int k = 0; k < tensors.p; ++k) {
                const Eigen::MatrixXd m = tensors.m_at(s, k);
                worst = std::max(worst, (m - m.transpose()).cwiseAbs().maxCoeff());
            }
        INFO(to_string(kind));
        CHECK(worst <= 1e-12);
    }
}

TEST_CASE("tau_pred on clean passive data with true coefficients") {
    for (const SystemKind kind : {SystemKind::single_pendulum, SystemKind::cart_pendulum,
                                  SystemKind::double_pendulum, SystemKind::spherical_pendulum}) {
        const SystemSpec sys = SystemSpec::standard(kind);
        auto lib = benchmark_library(sys);
        TermPartials partials(*lib);
        const auto ds = small_dataset(sys, false, 4, 1.0);
        const auto tensors = assemble_tensors(partials, ds);
        const auto model = true_model(sys, lib);
        double worst = 0.0;
        for (long s = 0; s < tensors.count; ++s)
            worst = std::max(worst, tau_pred(tensors, model.coefficients, s).cwiseAbs().maxCoeff());
        INFO(to_string(kind));
        CHECK(worst <= 1e-6);
    }
}

TEST_CASE("tau_pred is linear in the coefficients") {
    const SystemSpec sys = SystemSpec::standard(SystemKind::double_pendulum);
    auto lib = benchmark_library(sys);
    TermPartials partials(*lib);
    const auto ds = small_dataset(sys, false, 2, 0.5);
    const auto tensors = assemble_tensors(partials, ds);

    Rng rng(3);
    Eigen::VectorXd c1(lib->size()), c2(lib->size());
    for (int k = 0; k < lib->size(); ++k) {
        c1[k] = rng.uniform(-1, 1);
        c2[k] = rng.uniform(-1, 1);
    }
    CHECK(tau_pred(tensors, Eigen::VectorXd::Zero(lib->size()), 5).isZero(0.0));
    const Eigen::VectorXd lhs = tau_pred(tensors, c1 + c2, 11);
    const Eigen::VectorXd rhs = tau_pred(tensors, c1, 11) + tau_pred(tensors, c2, 11);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("case I cost and gradient") {
    const SystemSpec sys = SystemSpec::standard(SystemKind::single_pendulum);
    auto lib = benchmark_library(sys);
    TermPartials partials(*lib);
    const auto ds = small_dataset(sys, true, 6, 1.5);
    const auto tensors = assemble_tensors(partials, ds);
    const auto model = true_model(sys, lib);

    SECTION("vanishes at the true coefficients on clean forced data") {
        CHECK(cost_case1(tensors, ds, model.coefficients).value <= 1e-10);
    }

    SECTION("at zero equals the mean squared input norm") {
        double mean = 0.0;
        for (long s = 0; s < tensors.count; ++s) mean += ds.tau.row(s).squaredNorm();
        mean /= static_cast<double>(tensors.count);
        CHECK(cost_case1(tensors, ds, Eigen::VectorXd::Zero(lib->size())).value ==
              Catch::Approx(mean).epsilon(1e-12));
    }

    SECTION("gradient matches central finite differences") {
        Rng rng(8);
        Eigen::VectorXd c(lib->size());
        for (int k = 0; k < lib->size(); ++k) c[k] = rng.uniform(-1, 1);
        const auto cg = cost_case1(tensors, ds, c);
        auto f = [&](const Eigen::VectorXd& x) { return cost_case1(tensors, ds, x).value; };
        for (int k = 0; k < lib->size(); ++k) {
            const double fd = central_fd(f, c, k, 1e-3);  // the cost is exactly quadratic: no truncation error, less roundoff
            CHECK(std::abs(cg.grad[k] - fd) <= 1e-6 * (1 + std::abs(fd)));
        }
    }
}

TEST_CASE("acceleration prediction with true coefficients") {
    for (const SystemKind kind : {SystemKind::single_pendulum, SystemKind::cart_pendulum,
                                  SystemKind::double_pendulum, SystemKind::spherical_pendulum}) {
        const SystemSpec sys = SystemSpec::standard(kind);
        auto lib = benchmark_library(sys);
        TermPartials partials(*lib);
        const auto ds = small_dataset(sys, false, 4, 1.0);
        const auto tensors = assemble_tensors(partials, ds, TensorSet::accel);
        const auto model = true_model(sys, lib);
        double worst = 0.0;
        for (long s = 0; s < tensors.count; ++s) {
            const Eigen::VectorXd pred = predict_qddot(tensors, model.coefficients, s);
            worst = std::max(worst, (pred - ds.qdd.row(s).transpose()).cwiseAbs().maxCoeff());
        }
        INFO(to_string(kind));
        CHECK(worst <= 1e-8);
    }
}

TEST_CASE("acceleration prediction against the closed-form dynamics at states") {
    const SystemSpec sys = SystemSpec::standard(SystemKind::spherical_pendulum);
    auto lib = benchmark_library(sys);
    TermPartials partials(*lib);
    const auto model = true_model(sys, lib);

    Eigen::VectorXd q(2), qd(2), tau(2);
    q << 3.14159265358979323846 / 3.0, 0.4;
    qd << 0.7, 2.0;
    tau.setZero();
    const Eigen::VectorXd truth = equations_of_motion(sys, q, qd, tau);
    const Eigen::VectorXd pred = predict_qddot_state(partials, model.coefficients, q, qd);
    CHECK((pred - truth).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("acceleration prediction is scale invariant") {
    const SystemSpec sys = SystemSpec::standard(SystemKind::cart_pendulum);
    auto lib = benchmark_library(sys);
    TermPartials partials(*lib);
    const auto ds = small_dataset(sys, false, 2, 0.5);
    const auto tensors = assemble_tensors(partials, ds, TensorSet::accel);
    const auto model = true_model(sys, lib);
    const Eigen::VectorXd base = predict_qddot(tensors, model.coefficients, 7);
    for (const double k : {-2.0, 0.5, 10.0}) {
        const Eigen::VectorXd scaled = predict_qddot(tensors, (k * model.coefficients).eval(), 7);
        CHECK((scaled - base).cwiseAbs().maxCoeff() <= 1e-9 * (1 + base.cwiseAbs().maxCoeff()));
    }
}

TEST_CASE("degenerate model is rejected") {
    const SystemSpec sys = SystemSpec::standard(SystemKind::single_pendulum);
    auto lib = benchmark_library(sys);
    TermPartials partials(*lib);
    const auto ds = small_dataset(sys, false, 1, 0.2);
    const auto tensors = assemble_tensors(partials, ds, TensorSet::accel);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(lib->size());
    CHECK_THROWS_AS(predict_qddot(tensors, zero, 0), DegenerateModelError);
    CHECK_THROWS_AS(cost_case2(tensors, ds, zero), DegenerateModelError);
}

TEST_CASE("case II cost and gradient") {
    const SystemSpec sys = SystemSpec::standard(SystemKind::single_pendulum);
    auto lib = benchmark_library(sys);
    TermPartials partials(*lib);
    const auto ds = small_dataset(sys, false, 6, 1.5);
    const auto tensors = assemble_tensors(partials, ds, TensorSet::accel);
    const auto model = true_model(sys, lib);

    SECTION("vanishes at the true coefficients") {
        CHECK(cost_case2(tensors, ds, model.coefficients).value <= 1e-10);
    }

    SECTION("scale invariance of the cost") {
        Eigen::VectorXd c = model.coefficients;
        c[lib->require("sin(th)")] = 0.4;  // move off the exact solution
        const double j1 = cost_case2(tensors, ds, c).value;
        for (const double k : {-2.0, 0.5, 10.0})
            CHECK(cost_case2(tensors, ds, (k * c).eval()).value == Catch::Approx(j1).epsilon(1e-9));
    }

    SECTION("gradient matches central finite differences") {
        Rng rng(12);
        Eigen::VectorXd c = model.coefficients;
        for (int k = 0; k < lib->size(); ++k) c[k] += rng.uniform(-0.2, 0.2);
        const auto cg = cost_case2(tensors, ds, c);
        auto f = [&](const Eigen::VectorXd& x) { return cost_case2(tensors, ds, x).value; };
        for (int k = 0; k < lib->size(); ++k) {
            const double fd = central_fd(f, c, k, 1e-6);
            CHECK(std::abs(cg.grad[k] - fd) <= 1e-4 * (1 + std::abs(fd)));
        }
    }
}

TEST_CASE("case III residual and gradient") {
    const SystemSpec sys = SystemSpec::standard(SystemKind::cart_pendulum);
    auto lib = benchmark_library(sys);
    TermPartials partials(*lib);
    const auto ds = small_dataset(sys, false, 6, 1.5);
    const auto tensors = assemble_tensors(partials, ds);
    const int r = lib->require("thd^2");
    const auto model = true_model(sys, lib);

    SECTION("vanishes at the normalized true coefficients") {
        Eigen::VectorXd c = model.coefficients / model.coefficients[r];
        CHECK(upsilon_residual(tensors, ds, c, r).value <= 1e-10);
    }

    SECTION("at zero equals the mean squared prior-term residual") {
        double mean = 0.0;
        Eigen::VectorXd unit = Eigen::VectorXd::Zero(lib->size());
        unit[r] = 1.0;
        for (long s = 0; s < tensors.count; ++s)
            mean += tau_pred(tensors, unit, s).squaredNorm();
        mean /= static_cast<double>(tensors.count);
        CHECK(upsilon_residual(tensors, ds, Eigen::VectorXd::Zero(lib->size()), r).value ==
              Catch::Approx(mean).epsilon(1e-12));
    }

    SECTION("gradient matches central finite differences") {
        Rng rng(21);
        Eigen::VectorXd c(lib->size());
        for (int k = 0; k < lib->size(); ++k) c[k] = rng.uniform(-1, 1);
        const auto cg = upsilon_residual(tensors, ds, c, r);
        CHECK(cg.grad[r] == 0.0);
        auto f = [&](const Eigen::VectorXd& x) { return upsilon_residual(tensors, ds, x, r).value; };
        for (int k = 0; k < lib->size(); ++k) {
            if (k == r) continue;
            const double fd = central_fd(f, c, k, 1e-3);  // exactly quadratic
            CHECK(std::abs(cg.grad[k] - fd) <= 1e-6 * (1 + std::abs(fd)));
        }
    }

    SECTION("out of range prior index") {
        CHECK_THROWS_AS(upsilon_residual(tensors, ds, model.coefficients, lib->size()), ConfigError);
    }
}
