#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lagrangia/errors.hpp"
#include "lagrangia/expr.hpp"
#include "lagrangia/library.hpp"
#include "lagrangia/rng.hpp"

namespace lagrangia {

enum class SystemKind { single_pendulum, cart_pendulum, double_pendulum, spherical_pendulum };

inline std::string to_string(SystemKind k) {
    switch (k) {
        case SystemKind::single_pendulum: return "single_pendulum";
        case SystemKind::cart_pendulum: return "cart_pendulum";
        case SystemKind::double_pendulum: return "double_pendulum";
        case SystemKind::spherical_pendulum: return "spherical_pendulum";
    }
    return "unknown";
}

inline SystemKind system_kind_from_string(const std::string& s) {
    if (s == "single_pendulum") return SystemKind::single_pendulum;
    if (s == "cart_pendulum") return SystemKind::cart_pendulum;
    if (s == "double_pendulum") return SystemKind::double_pendulum;
    if (s == "spherical_pendulum") return SystemKind::spherical_pendulum;
    throw ConfigError("unknown system kind: " + s);
}

// Physical parameters of a benchmark system. mass is the (first) pendulum
// bob, mass2 the second bob of the double pendulum, cart_mass the cart.
// standard() defaults: 1.0 m rod, g = 9.81, unit masses, except the cart
// system which carries a 0.5 kg bob on a 1.0 kg cart.
struct SystemSpec {
    SystemKind kind = SystemKind::single_pendulum;
    double rod_length = 1.0;
    double gravity = 9.81;
    double mass = 1.0;
    double mass2 = 1.0;
    double cart_mass = 1.0;

    static SystemSpec standard(SystemKind k) {
        SystemSpec s;
        s.kind = k;
        if (k == SystemKind::cart_pendulum) {
            s.mass = 0.5;
            s.cart_mass = 1.0;
        }
        return s;
    }

    int dof() const {
        switch (kind) {
            case SystemKind::single_pendulum: return 1;
            default: return 2;
        }
    }

    CoordinateSpace space() const {
        switch (kind) {
            case SystemKind::single_pendulum: return CoordinateSpace({"th"}, {"θ"});
            case SystemKind::cart_pendulum: return CoordinateSpace({"th", "x"}, {"θ", "x"});
            case SystemKind::double_pendulum: return CoordinateSpace({"th1", "th2"}, {"θ1", "θ2"});
            case SystemKind::spherical_pendulum: return CoordinateSpace({"th", "phi"}, {"θ", "φ"});
        }
        throw ConfigError("bad system kind");
    }
};

// Closed-form accelerations of the true dynamics, hand-derived from the true
// Lagrangian of each system. tau is the external generalized force.
inline Eigen::VectorXd equations_of_motion(const SystemSpec& sys, const Eigen::VectorXd& q,
                                           const Eigen::VectorXd& qd, const Eigen::VectorXd& tau) {
    const int n = sys.dof();
    if (q.size() != n || qd.size() != n || tau.size() != n)
        throw ConfigError("state dimension does not match system");
    const double L = sys.rod_length, g = sys.gravity;
    Eigen::VectorXd qdd(n);
    switch (sys.kind) {
        case SystemKind::single_pendulum: {
            const double m = sys.mass;
            qdd[0] = (tau[0] - m * g * L * std::sin(q[0])) / (m * L * L);
            return qdd;
        }
        case SystemKind::cart_pendulum: {
            // coordinates (θ, x); L_true = a θ̇² + b ẋ² + c ẋθ̇cosθ + d cosθ
            const double a = 0.5 * sys.mass * L * L;
            const double b = 0.5 * (sys.cart_mass + sys.mass);
            const double c = sys.mass * L;
            const double d = sys.mass * g * L;
            Eigen::Matrix2d M;
            M << 2.0 * a, c * std::cos(q[0]), c * std::cos(q[0]), 2.0 * b;
            Eigen::Vector2d rhs;
            rhs << tau[0] - d * std::sin(q[0]), tau[1] + c * qd[0] * qd[0] * std::sin(q[0]);
            return M.ldlt().solve(rhs);
        }
        case SystemKind::double_pendulum: {
            // coordinates (θ1, θ2)
            const double a = 0.5 * (sys.mass + sys.mass2) * L * L;
            const double b = 0.5 * sys.mass2 * L * L;
            const double c = sys.mass2 * L * L;
            const double d1 = (sys.mass + sys.mass2) * g * L;
            const double d2 = sys.mass2 * g * L;
            const double delta = q[0] - q[1];
            const double cd = std::cos(delta), sd = std::sin(delta);
            Eigen::Matrix2d M;
            M << 2.0 * a, c * cd, c * cd, 2.0 * b;
            Eigen::Vector2d rhs;
            rhs << tau[0] - c * qd[1] * qd[1] * sd - d1 * std::sin(q[0]),
                tau[1] + c * qd[0] * qd[0] * sd - d2 * std::sin(q[1]);
            return M.ldlt().solve(rhs);
        }
        case SystemKind::spherical_pendulum: {
            // coordinates (θ, φ); the φ equation carries a 1/sin θ factor
            const double a = 0.5 * sys.mass * L * L;
            const double d = sys.mass * g * L;
            const double st = std::sin(q[0]), ct = std::cos(q[0]);
            if (std::abs(st) < 1e-6)
                throw SingularConfigError("spherical pendulum at singular configuration (sin θ ≈ 0)");
            qdd[0] = tau[0] / (2.0 * a) + qd[1] * qd[1] * st * ct - d / (2.0 * a) * std::sin(q[0]);
            qdd[1] = tau[1] / (2.0 * a * st * st) - 2.0 * qd[0] * qd[1] * ct / st;
            return qdd;
        }
    }
    throw ConfigError("bad system kind");
}

// Total mechanical energy of the true dynamics.
inline double energy(const SystemSpec& sys, const Eigen::VectorXd& q, const Eigen::VectorXd& qd) {
    const double L = sys.rod_length, g = sys.gravity;
    switch (sys.kind) {
        case SystemKind::single_pendulum:
            return 0.5 * sys.mass * L * L * qd[0] * qd[0] - sys.mass * g * L * std::cos(q[0]);
        case SystemKind::cart_pendulum: {
            const double a = 0.5 * sys.mass * L * L;
            const double b = 0.5 * (sys.cart_mass + sys.mass);
            const double c = sys.mass * L;
            const double d = sys.mass * g * L;
            return a * qd[0] * qd[0] + b * qd[1] * qd[1] + c * qd[0] * qd[1] * std::cos(q[0]) -
                   d * std::cos(q[0]);
        }
        case SystemKind::double_pendulum: {
            const double a = 0.5 * (sys.mass + sys.mass2) * L * L;
            const double b = 0.5 * sys.mass2 * L * L;
            const double c = sys.mass2 * L * L;
            return a * qd[0] * qd[0] + b * qd[1] * qd[1] + c * qd[0] * qd[1] * std::cos(q[0] - q[1]) -
                   (sys.mass + sys.mass2) * g * L * std::cos(q[0]) - sys.mass2 * g * L * std::cos(q[1]);
        }
        case SystemKind::spherical_pendulum: {
            const double a = 0.5 * sys.mass * L * L;
            const double st = std::sin(q[0]);
            return a * (qd[0] * qd[0] + qd[1] * qd[1] * st * st) - sys.mass * g * L * std::cos(q[0]);
        }
    }
    throw ConfigError("bad system kind");
}

// Conjugate momentum of φ for the spherical pendulum (conserved when passive).
inline double phi_momentum(const SystemSpec& sys, const Eigen::VectorXd& q, const Eigen::VectorXd& qd) {
    if (sys.kind != SystemKind::spherical_pendulum)
        throw ConfigError("phi momentum is defined for the spherical pendulum only");
    const double a = 0.5 * sys.mass * sys.rod_length * sys.rod_length;
    const double st = std::sin(q[0]);
    return 2.0 * a * qd[1] * st * st;
}

// True Lagrangian coefficients keyed by canonical term text.
inline std::vector<std::pair<std::string, double>> true_coefficients(const SystemSpec& sys) {
    const double L = sys.rod_length, g = sys.gravity;
    switch (sys.kind) {
        case SystemKind::single_pendulum:
            return {{"thd^2", 0.5 * sys.mass * L * L}, {"cos(th)", sys.mass * g * L}};
        case SystemKind::cart_pendulum:
            return {{"thd^2", 0.5 * sys.mass * L * L},
                    {"xd^2", 0.5 * (sys.cart_mass + sys.mass)},
                    {"thd*xd*cos(th)", sys.mass * L},
                    {"cos(th)", sys.mass * g * L}};
        case SystemKind::double_pendulum:
            return {{"cos(th1)", (sys.mass + sys.mass2) * g * L},
                    {"cos(th2)", sys.mass2 * g * L},
                    {"th1d*th2d*cos(th1)*cos(th2)", sys.mass2 * L * L},
                    {"th1d*th2d*sin(th1)*sin(th2)", sys.mass2 * L * L},
                    {"th1d^2", 0.5 * (sys.mass + sys.mass2) * L * L},
                    {"th2d^2", 0.5 * sys.mass2 * L * L}};
        case SystemKind::spherical_pendulum:
            return {{"phid^2*sin(th)^2", 0.5 * sys.mass * L * L},
                    {"thd^2", 0.5 * sys.mass * L * L},
                    {"cos(th)", sys.mass * g * L}};
    }
    throw ConfigError("bad system kind");
}

// The candidate-library recipe used for each benchmark system: polynomial
// combinations per atom group, cross products between the trigonometric and
// velocity groups for the 2-DOF spherical/double systems, and the explicit
// exclusions applied to the single-pendulum library.
inline LibrarySpec standard_library_spec(SystemKind kind) {
    LibrarySpec spec;
    switch (kind) {
        case SystemKind::single_pendulum:
            spec.groups = {{{"th", "thd", "cos(th)", "sin(th)"}, 2}};
            spec.exclude = {"thd", "th*thd"};
            break;
        case SystemKind::cart_pendulum:
            spec.groups = {{{"thd", "cos(th)", "sin(th)", "x", "xd"}, 3}};
            break;
        case SystemKind::double_pendulum:
            spec.groups = {{{"cos(th1)", "sin(th1)", "cos(th2)", "sin(th2)"}, 2}, {{"th1d", "th2d"}, 2}};
            spec.cross_products = true;
            break;
        case SystemKind::spherical_pendulum:
            spec.groups = {{{"cos(th)", "sin(th)"}, 2}, {{"thd", "phi", "phid"}, 2}};
            spec.cross_products = true;
            break;
    }
    return spec;
}

struct State {
    Eigen::VectorXd q;
    Eigen::VectorXd qd;
};

// Draws per-trajectory initial conditions from the benchmark ranges. Every
// trajectory gets its own child stream of the master seed, so the i-th draw
// is the same no matter how many trajectories are generated or in what order.
inline State draw_initial_condition(const SystemSpec& sys, Rng& rng) {
    const int n = sys.dof();
    State s;
    s.q = Eigen::VectorXd::Zero(n);
    s.qd = Eigen::VectorXd::Zero(n);
    const double pi = 3.14159265358979323846;
    switch (sys.kind) {
        case SystemKind::single_pendulum:
            s.q[0] = rng.uniform(-pi, pi);
            break;
        case SystemKind::cart_pendulum:
            s.q[0] = rng.uniform(-pi, pi);
            break;
        case SystemKind::double_pendulum:
            s.q[0] = rng.uniform(-pi, pi);
            s.q[1] = rng.uniform(-pi, pi);
            break;
        case SystemKind::spherical_pendulum:
            s.q[0] = rng.uniform(pi / 3.0, pi / 2.0);
            s.q[1] = 0.0;
            s.qd[0] = 0.0;
            s.qd[1] = pi;
            break;
    }
    return s;
}

inline std::vector<State> sample_initial_conditions(const SystemSpec& sys, int count,
                                                    std::uint64_t seed) {
    if (count < 1) throw ConfigError("initial condition count must be positive");
    Rng master(seed);
    std::vector<State> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        Rng stream = master.stream(static_cast<std::uint64_t>(i));
        out.push_back(draw_initial_condition(sys, stream));
    }
    return out;
}

}  // namespace lagrangia
