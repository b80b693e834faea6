#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "lagrangia/dynamics.hpp"
#include "lagrangia/errors.hpp"
#include "lagrangia/rng.hpp"

namespace lagrangia {

// Which measurement channels noise is applied to.
struct NoiseSpec {
    double sigma = 0.0;
    bool on_q = true;
    bool on_qd = true;
    bool on_qdd = true;
    bool on_tau = false;
    std::uint64_t seed = 0;
};

struct DatasetMeta {
    SystemSpec system;
    double sigma = 0.0;
    std::uint64_t seed = 0;
    double dt = 0.01;
    double duration = 5.0;
    int substeps = 10;
    bool forced = false;
};

// Time series of (t, q, q̇, q̈, τ) rows across several trajectories. Rows are
// grouped by trajectory in increasing traj_id order; matrices have one row
// per sample and one column per coordinate.
struct TrajectoryDataset {
    int n = 0;
    std::vector<double> t;
    Eigen::MatrixXd q, qd, qdd, tau;
    std::vector<int> traj_id;
    DatasetMeta meta;

    long samples() const { return static_cast<long>(t.size()); }

    int trajectories() const { return traj_id.empty() ? 0 : traj_id.back() + 1; }

    void resize(int ncoords, long rows) {
        n = ncoords;
        t.assign(static_cast<std::size_t>(rows), 0.0);
        q.setZero(rows, ncoords);
        qd.setZero(rows, ncoords);
        qdd.setZero(rows, ncoords);
        tau.setZero(rows, ncoords);
        traj_id.assign(static_cast<std::size_t>(rows), 0);
    }

    // Row range [begin, end) of one trajectory.
    std::pair<long, long> trajectory_rows(int id) const {
        long begin = -1, end = -1;
        for (long r = 0; r < samples(); ++r) {
            if (traj_id[static_cast<std::size_t>(r)] == id) {
                if (begin < 0) begin = r;
                end = r + 1;
            }
        }
        if (begin < 0) throw ConfigError("trajectory id not present in dataset");
        return {begin, end};
    }
};

// Adds zero-mean Gaussian noise to the selected channels. Sample times are
// never touched; sigma = 0 returns the input unchanged.
inline TrajectoryDataset add_noise(const TrajectoryDataset& ds, const NoiseSpec& noise) {
    if (noise.sigma < 0) throw ConfigError("noise sigma must be nonnegative");
    TrajectoryDataset out = ds;
    out.meta.sigma = noise.sigma;
    if (noise.sigma == 0.0) return out;
    Rng rng(noise.seed);
    const long rows = ds.samples();
    for (long r = 0; r < rows; ++r)
        for (int j = 0; j < ds.n; ++j) {
            if (noise.on_q) out.q(r, j) += noise.sigma * rng.gaussian();
            if (noise.on_qd) out.qd(r, j) += noise.sigma * rng.gaussian();
            if (noise.on_qdd) out.qdd(r, j) += noise.sigma * rng.gaussian();
            if (noise.on_tau) out.tau(r, j) += noise.sigma * rng.gaussian();
        }
    return out;
}

namespace detail {

inline std::string meta_path(const std::string& csv_path) {
    const auto dot = csv_path.rfind(".csv");
    const std::string stem = (dot != std::string::npos && dot == csv_path.size() - 4)
                                 ? csv_path.substr(0, dot)
                                 : csv_path;
    return stem + ".meta.json";
}

inline void write_double(std::string& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

}  // namespace detail

inline nlohmann::json system_to_json(const SystemSpec& s) {
    return {{"kind", to_string(s.kind)},   {"rod_length", s.rod_length}, {"gravity", s.gravity},
            {"mass", s.mass},              {"mass2", s.mass2},           {"cart_mass", s.cart_mass}};
}

inline SystemSpec system_from_json(const nlohmann::json& j) {
    SystemSpec s = SystemSpec::standard(system_kind_from_string(j.at("kind").get<std::string>()));
    s.rod_length = j.value("rod_length", s.rod_length);
    s.gravity = j.value("gravity", s.gravity);
    s.mass = j.value("mass", s.mass);
    s.mass2 = j.value("mass2", s.mass2);
    s.cart_mass = j.value("cart_mass", s.cart_mass);
    return s;
}

// Writes the sample table as CSV (17 significant digits, enough for an exact
// binary round trip) plus a JSON metadata sidecar next to it.
inline void save_dataset(const TrajectoryDataset& ds, const std::string& path) {
    std::string body;
    body.reserve(static_cast<std::size_t>(ds.samples()) * 32u * static_cast<std::size_t>(4 * ds.n + 2));
    body += "t";
    for (int j = 0; j < ds.n; ++j) body += ",q_" + std::to_string(j + 1);
    for (int j = 0; j < ds.n; ++j) body += ",qd_" + std::to_string(j + 1);
    for (int j = 0; j < ds.n; ++j) body += ",qdd_" + std::to_string(j + 1);
    for (int j = 0; j < ds.n; ++j) body += ",tau_" + std::to_string(j + 1);
    body += ",traj_id\n";
    for (long r = 0; r < ds.samples(); ++r) {
        detail::write_double(body, ds.t[static_cast<std::size_t>(r)]);
        for (int j = 0; j < ds.n; ++j) { body += ','; detail::write_double(body, ds.q(r, j)); }
        for (int j = 0; j < ds.n; ++j) { body += ','; detail::write_double(body, ds.qd(r, j)); }
        for (int j = 0; j < ds.n; ++j) { body += ','; detail::write_double(body, ds.qdd(r, j)); }
        for (int j = 0; j < ds.n; ++j) { body += ','; detail::write_double(body, ds.tau(r, j)); }
        body += ',' + std::to_string(ds.traj_id[static_cast<std::size_t>(r)]) + '\n';
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f << body;
    if (!f) throw IoError("failed writing '" + path + "'");

    nlohmann::json meta = {{"system", system_to_json(ds.meta.system)},
                           {"sigma", ds.meta.sigma},
                           {"seed", ds.meta.seed},
                           {"dt", ds.meta.dt},
                           {"duration", ds.meta.duration},
                           {"substeps", ds.meta.substeps},
                           {"forced", ds.meta.forced}};
    std::ofstream mf(detail::meta_path(path), std::ios::binary);
    if (!mf) throw IoError("cannot open '" + detail::meta_path(path) + "' for writing");
    mf << meta.dump(2) << "\n";
}

inline TrajectoryDataset load_dataset(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for reading");
    std::string header;
    if (!std::getline(f, header)) throw ParseError(path + ":1: empty dataset file");

    std::vector<std::string> cols;
    {
        std::stringstream ss(header);
        std::string c;
        while (std::getline(ss, c, ',')) cols.push_back(c);
    }
    // layout: t, n×q, n×qd, n×qdd, n×tau, traj_id
    if (cols.size() < 6 || (cols.size() - 2) % 4 != 0)
        throw ParseError(path + ":1: malformed header (expected t,q_*,qd_*,qdd_*,tau_*,traj_id)");
    const int n = static_cast<int>((cols.size() - 2) / 4);

    std::vector<double> values;
    std::vector<std::vector<double>> rows;
    std::string line;
    long lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        values.clear();
        const char* p = line.c_str();
        char* endp = nullptr;
        for (;;) {
            const double v = std::strtod(p, &endp);
            if (endp == p)
                throw ParseError(path + ":" + std::to_string(lineno) + ": expected a number");
            values.push_back(v);
            p = endp;
            if (*p == ',') { ++p; continue; }
            if (*p == '\0' || *p == '\r') break;
            throw ParseError(path + ":" + std::to_string(lineno) + ": unexpected character '" +
                             std::string(1, *p) + "'");
        }
        if (values.size() != cols.size())
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected " +
                             std::to_string(cols.size()) + " columns for n=" + std::to_string(n) +
                             ", got " + std::to_string(values.size()));
        rows.push_back(values);
    }

    TrajectoryDataset ds;
    ds.resize(n, static_cast<long>(rows.size()));
    for (long r = 0; r < ds.samples(); ++r) {
        const auto& v = rows[static_cast<std::size_t>(r)];
        ds.t[static_cast<std::size_t>(r)] = v[0];
        for (int j = 0; j < n; ++j) {
            ds.q(r, j) = v[static_cast<std::size_t>(1 + j)];
            ds.qd(r, j) = v[static_cast<std::size_t>(1 + n + j)];
            ds.qdd(r, j) = v[static_cast<std::size_t>(1 + 2 * n + j)];
            ds.tau(r, j) = v[static_cast<std::size_t>(1 + 3 * n + j)];
        }
        ds.traj_id[static_cast<std::size_t>(r)] = static_cast<int>(v.back());
    }

    const std::string mpath = detail::meta_path(path);
    std::ifstream mf(mpath, std::ios::binary);
    if (!mf) throw IoError("missing metadata sidecar '" + mpath + "'");
    nlohmann::json meta;
    try {
        mf >> meta;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(mpath + ": invalid JSON: " + e.what());
    }
    ds.meta.system = system_from_json(meta.at("system"));
    ds.meta.sigma = meta.value("sigma", 0.0);
    ds.meta.seed = meta.value("seed", std::uint64_t{0});
    ds.meta.dt = meta.value("dt", 0.01);
    ds.meta.duration = meta.value("duration", 5.0);
    ds.meta.substeps = meta.value("substeps", 10);
    ds.meta.forced = meta.value("forced", false);
    if (ds.meta.system.dof() != n)
        throw ParseError(path + ": dataset has n=" + std::to_string(n) +
                         " coordinates but metadata says n=" + std::to_string(ds.meta.system.dof()));
    return ds;
}

}  // namespace lagrangia
