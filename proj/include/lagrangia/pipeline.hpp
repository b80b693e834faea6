#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "lagrangia/dataset.hpp"
#include "lagrangia/dynamics.hpp"
#include "lagrangia/eltensors.hpp"
#include "lagrangia/model.hpp"
#include "lagrangia/optimizer.hpp"
#include "lagrangia/parallel.hpp"
#include "lagrangia/simulate.hpp"

namespace lagrangia {

struct DatasetParams {
    int trajectories = 100;
    double duration = 5.0;
    double dt = 0.01;
    int substeps = 10;
    std::uint64_t seed = 12345;
};

struct NoiseConfig {
    std::vector<double> sigmas;  // one noisy dataset file per entry
    bool on_q = true, on_qd = true, on_qdd = true, on_tau = false;
    std::uint64_t seed = 777;
};

struct ValidationConfig {
    int trajectories = 20;
    double duration = 5.0;
    std::uint64_t seed = 31415;
};

// Everything needed to reproduce a run. A config plus its seeds fully
// determines every artifact the pipeline writes.
struct RunConfig {
    SystemSpec system;
    std::vector<std::string> labels;  // optional display labels
    LibrarySpec library;              // empty groups = standard recipe for the system
    int case_id = 1;
    std::vector<std::string> prior_terms;  // case III candidates for the anchor term
    std::vector<std::string> known_terms;  // case III terms exempt from the L1 penalty
    ForcingSpec forcing;
    DatasetParams dataset;
    NoiseConfig noise;
    StageSchedule schedule;
    ValidationConfig validation;
    double fit_sigma = 0.0;
    std::string output_dir = "out";
    int threads = 0;

    CoordinateSpace space() const {
        CoordinateSpace base = system.space();
        if (labels.empty()) return base;
        std::vector<std::string> names;
        for (int i = 0; i < base.size(); ++i) names.push_back(base.name(i));
        return CoordinateSpace(names, labels);
    }

    LibrarySpec library_spec() const {
        return library.groups.empty() ? standard_library_spec(system.kind) : library;
    }

    // Library with the penalty mask derived from known_terms and prior_terms.
    std::shared_ptr<const CandidateLibrary> build() const {
        CandidateLibrary lib = build_library(space(), library_spec());
        for (const auto& t : known_terms)
            lib.penalty_mask[static_cast<std::size_t>(lib.require(t))] = false;
        for (const auto& t : prior_terms)
            lib.penalty_mask[static_cast<std::size_t>(lib.require(t))] = false;
        return std::make_shared<const CandidateLibrary>(std::move(lib));
    }

    void validate_config() const {
        if (case_id < 1 || case_id > 3) throw ConfigError("case must be 1, 2 or 3");
        if (case_id == 1 && !forcing.active)
            throw ConfigError("case 1 fits the external input; enable forcing to record one");
        if (case_id == 3 && prior_terms.empty())
            throw ConfigError("case 3 needs at least one prior term candidate");
        if (dataset.trajectories < 1 || validation.trajectories < 1)
            throw ConfigError("trajectory counts must be positive");
        schedule.validate();
    }
};

inline nlohmann::json schedule_to_json(const StageSchedule& s) {
    return {{"alpha0", s.alpha0},
            {"lambda0", s.lambda0},
            {"alpha_growth", s.alpha_growth},
            {"lambda_decay", s.lambda_decay},
            {"epochs_per_stage", s.epochs_per_stage},
            {"batch_size", s.batch_size},
            {"threshold_stage1", s.threshold_stage1},
            {"threshold_later", s.threshold_later},
            {"tolerance", s.tolerance},
            {"max_stages", s.max_stages},
            {"relaxed_tolerance_factor", s.relaxed_tolerance_factor},
            {"seed", s.seed},
            {"prox_scaled_by_alpha", s.prox_scaled_by_alpha},
            {"restart_momentum_per_stage", s.restart_momentum_per_stage},
            {"hard_threshold_masked", s.hard_threshold_masked},
            {"use_term_scaling", s.use_term_scaling},
            {"init_range", s.init_range}};
}

inline StageSchedule schedule_from_json(const nlohmann::json& j) {
    StageSchedule s;
    s.alpha0 = j.value("alpha0", s.alpha0);
    s.lambda0 = j.value("lambda0", s.lambda0);
    s.alpha_growth = j.value("alpha_growth", s.alpha_growth);
    s.lambda_decay = j.value("lambda_decay", s.lambda_decay);
    s.epochs_per_stage = j.value("epochs_per_stage", s.epochs_per_stage);
    s.batch_size = j.value("batch_size", s.batch_size);
    s.threshold_stage1 = j.value("threshold_stage1", s.threshold_stage1);
    s.threshold_later = j.value("threshold_later", s.threshold_later);
    s.tolerance = j.value("tolerance", s.tolerance);
    s.max_stages = j.value("max_stages", s.max_stages);
    s.relaxed_tolerance_factor = j.value("relaxed_tolerance_factor", s.relaxed_tolerance_factor);
    s.seed = j.value("seed", s.seed);
    s.prox_scaled_by_alpha = j.value("prox_scaled_by_alpha", s.prox_scaled_by_alpha);
    s.restart_momentum_per_stage = j.value("restart_momentum_per_stage", s.restart_momentum_per_stage);
    s.hard_threshold_masked = j.value("hard_threshold_masked", s.hard_threshold_masked);
    s.use_term_scaling = j.value("use_term_scaling", s.use_term_scaling);
    s.init_range = j.value("init_range", s.init_range);
    return s;
}

inline nlohmann::json config_to_json(const RunConfig& c) {
    nlohmann::json groups = nlohmann::json::array();
    for (const auto& g : c.library.groups)
        groups.push_back({{"atoms", g.atoms}, {"max_order", g.max_order}});
    return {{"system", system_to_json(c.system)},
            {"labels", c.labels},
            {"library",
             {{"groups", groups}, {"cross_products", c.library.cross_products}, {"exclude", c.library.exclude}}},
            {"case", c.case_id},
            {"prior_terms", c.prior_terms},
            {"known_terms", c.known_terms},
            {"forcing",
             {{"active", c.forcing.active},
              {"amp_min", c.forcing.amp_min},
              {"amp_max", c.forcing.amp_max},
              {"freq_min", c.forcing.freq_min},
              {"freq_max", c.forcing.freq_max}}},
            {"dataset",
             {{"trajectories", c.dataset.trajectories},
              {"duration", c.dataset.duration},
              {"dt", c.dataset.dt},
              {"substeps", c.dataset.substeps},
              {"seed", c.dataset.seed}}},
            {"noise",
             {{"sigmas", c.noise.sigmas},
              {"on_q", c.noise.on_q},
              {"on_qd", c.noise.on_qd},
              {"on_qdd", c.noise.on_qdd},
              {"on_tau", c.noise.on_tau},
              {"seed", c.noise.seed}}},
            {"schedule", schedule_to_json(c.schedule)},
            {"validation",
             {{"trajectories", c.validation.trajectories},
              {"duration", c.validation.duration},
              {"seed", c.validation.seed}}},
            {"fit_sigma", c.fit_sigma},
            {"output_dir", c.output_dir},
            {"threads", c.threads}};
}

inline RunConfig config_from_json(const nlohmann::json& j) {
    RunConfig c;
    c.system = system_from_json(j.at("system"));
    c.labels = j.value("labels", std::vector<std::string>{});
    if (j.contains("library")) {
        const auto& jl = j.at("library");
        for (const auto& jg : jl.value("groups", nlohmann::json::array())) {
            LibraryGroup g;
            g.atoms = jg.at("atoms").get<std::vector<std::string>>();
            g.max_order = jg.value("max_order", 2);
            c.library.groups.push_back(std::move(g));
        }
        c.library.cross_products = jl.value("cross_products", false);
        c.library.exclude = jl.value("exclude", std::vector<std::string>{});
    }
    c.case_id = j.value("case", 1);
    c.prior_terms = j.value("prior_terms", std::vector<std::string>{});
    c.known_terms = j.value("known_terms", std::vector<std::string>{});
    if (j.contains("forcing")) {
        const auto& jf = j.at("forcing");
        c.forcing.active = jf.value("active", false);
        c.forcing.amp_min = jf.value("amp_min", c.forcing.amp_min);
        c.forcing.amp_max = jf.value("amp_max", c.forcing.amp_max);
        c.forcing.freq_min = jf.value("freq_min", c.forcing.freq_min);
        c.forcing.freq_max = jf.value("freq_max", c.forcing.freq_max);
    }
    if (j.contains("dataset")) {
        const auto& jd = j.at("dataset");
        c.dataset.trajectories = jd.value("trajectories", c.dataset.trajectories);
        c.dataset.duration = jd.value("duration", c.dataset.duration);
        c.dataset.dt = jd.value("dt", c.dataset.dt);
        c.dataset.substeps = jd.value("substeps", c.dataset.substeps);
        c.dataset.seed = jd.value("seed", c.dataset.seed);
    }
    if (j.contains("noise")) {
        const auto& jn = j.at("noise");
        c.noise.sigmas = jn.value("sigmas", std::vector<double>{});
        c.noise.on_q = jn.value("on_q", true);
        c.noise.on_qd = jn.value("on_qd", true);
        c.noise.on_qdd = jn.value("on_qdd", true);
        c.noise.on_tau = jn.value("on_tau", false);
        c.noise.seed = jn.value("seed", c.noise.seed);
    }
    if (j.contains("schedule")) c.schedule = schedule_from_json(j.at("schedule"));
    if (j.contains("validation")) {
        const auto& jv = j.at("validation");
        c.validation.trajectories = jv.value("trajectories", c.validation.trajectories);
        c.validation.duration = jv.value("duration", c.validation.duration);
        c.validation.seed = jv.value("seed", c.validation.seed);
    }
    c.fit_sigma = j.value("fit_sigma", 0.0);
    c.output_dir = j.value("output_dir", std::string("out"));
    c.threads = j.value("threads", 0);
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open config '" + path + "'");
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(path + ": invalid JSON: " + e.what());
    }
    try {
        return config_from_json(j);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

namespace detail {

inline std::string sigma_tag(double sigma) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%g", sigma);
    return buf;
}

inline void write_text(const std::string& path, const std::string& body) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f << body;
    if (!f) throw IoError("failed writing '" + path + "'");
}

}  // namespace detail

inline std::string dataset_variant_path(const RunConfig& c, double sigma) {
    return (std::filesystem::path(c.output_dir) / ("train_sigma_" + detail::sigma_tag(sigma) + ".csv"))
        .string();
}

// The file fit reads for a given noise level; σ = 0 uses the clean dataset.
inline std::string dataset_path(const RunConfig& c, double sigma) {
    if (sigma == 0.0) return (std::filesystem::path(c.output_dir) / "train_clean.csv").string();
    return dataset_variant_path(c, sigma);
}

inline std::string model_path(const RunConfig& c) {
    return (std::filesystem::path(c.output_dir) / "model.json").string();
}

// Writes the clean training dataset plus one noisy variant per configured
// sigma. Returns the file paths written.
inline std::vector<std::string> generate(const RunConfig& config) {
    config.validate_config();
    std::filesystem::create_directories(config.output_dir);
    const TrajectoryDataset clean = generate_dataset(
        config.system, config.forcing, config.dataset.trajectories, config.dataset.duration,
        config.dataset.dt, config.dataset.substeps, config.dataset.seed, config.threads);

    std::vector<std::string> written;
    const std::string clean_path = dataset_path(config, 0.0);
    save_dataset(clean, clean_path);
    written.push_back(clean_path);

    Rng noise_master(config.noise.seed);
    for (std::size_t i = 0; i < config.noise.sigmas.size(); ++i) {
        const double sigma = config.noise.sigmas[i];
        NoiseSpec spec;
        spec.sigma = sigma;
        spec.on_q = config.noise.on_q;
        spec.on_qd = config.noise.on_qd;
        spec.on_qdd = config.noise.on_qdd;
        spec.on_tau = config.noise.on_tau;
        spec.seed = noise_master.stream(i).next_u64();
        const TrajectoryDataset noisy = add_noise(clean, spec);
        const std::string path = dataset_variant_path(config, sigma);
        save_dataset(noisy, path);
        written.push_back(path);
    }
    return written;
}

// Per-trajectory validation rollout of a model against the true dynamics.
struct RolloutComparison {
    int traj = 0;
    bool diverged = false;
    double rmse = 0.0;
    std::vector<double> t;
    Eigen::MatrixXd q_true, q_pred;
};

struct ValidationReport {
    std::vector<RolloutComparison> rollouts;
    double mean_rmse = 0.0;
    int diverged_count = 0;
    std::string structure;  // exact | extra_terms | missing_terms | extra_and_missing_terms
    std::vector<std::string> extra_terms, missing_terms;
    std::vector<std::string> support;
    nlohmann::json coefficient_table;
};

// Integrates the learned model and the ground truth from held-out initial
// conditions and compares them.
inline ValidationReport validate(const LagrangianModel& model, const RunConfig& config) {
    if (model.coefficients.isZero(0.0)) throw DegenerateModelError("cannot validate an all-zero model");
    const SystemSpec& sys = config.system;
    const int n = sys.dof();
    TermPartials partials(*model.library);

    const int count = config.validation.trajectories;
    ValidationReport report;
    report.rollouts.resize(static_cast<std::size_t>(count));

    parallel_chunks(count, 1, config.threads, [&](long begin, long end) {
        for (long j = begin; j < end; ++j) {
            RolloutComparison& cmp = report.rollouts[static_cast<std::size_t>(j)];
            cmp.traj = static_cast<int>(j);
            TrajectoryDraws draws;
            TrajectoryDataset truth;
            bool have_truth = false;
            for (int attempt = 0; attempt < 32 && !have_truth; ++attempt) {
                draws = draw_trajectory(sys, config.forcing, config.validation.seed,
                                        static_cast<int>(j), attempt);
                try {
                    truth = rk4_integrate(sys, draws.forcing, draws.init, config.validation.duration,
                                          config.dataset.dt, config.dataset.substeps);
                    have_truth = true;
                } catch (const SingularConfigError&) {
                    continue;
                }
            }
            if (!have_truth)
                throw NumericalError("validation trajectory " + std::to_string(j) +
                                     " kept hitting a singular configuration");

            AccelFn accel = [&](double t, const Eigen::VectorXd& q, const Eigen::VectorXd& qd) {
                const Eigen::VectorXd tau = draws.forcing.tau(t, n);
                return predict_qddot_state(partials, model.coefficients, q, qd, &tau);
            };
            Rollout pred;
            try {
                pred = integrate_rk4(accel, draws.init, config.validation.duration, config.dataset.dt,
                                     config.dataset.substeps);
            } catch (const SingularConfigError&) {
                pred.diverged = true;
            }

            cmp.t = truth.t;
            cmp.q_true = truth.q;
            cmp.diverged = pred.diverged;
            if (pred.diverged) {
                cmp.q_pred = pred.q;
                cmp.rmse = std::numeric_limits<double>::infinity();
                continue;
            }
            cmp.q_pred = pred.q;
            cmp.rmse = std::sqrt((truth.q - pred.q).array().square().mean());
        }
    });

    double sum = 0.0;
    int finite = 0;
    for (const auto& cmp : report.rollouts) {
        if (cmp.diverged) {
            ++report.diverged_count;
        } else {
            sum += cmp.rmse;
            ++finite;
        }
    }
    report.mean_rmse = finite > 0 ? sum / finite : std::numeric_limits<double>::infinity();

    // structure verdict: compare the nonzero support with the true model
    const auto& lib = *model.library;
    const auto truth_model = true_model(sys, model.library);
    const auto learned = model.support();
    const auto expected = truth_model.support();
    for (const int k : learned) {
        report.support.push_back(lib.terms[static_cast<std::size_t>(k)].to_string(lib.space));
        if (std::find(expected.begin(), expected.end(), k) == expected.end())
            report.extra_terms.push_back(lib.terms[static_cast<std::size_t>(k)].to_string(lib.space));
    }
    for (const int k : expected)
        if (std::find(learned.begin(), learned.end(), k) == learned.end())
            report.missing_terms.push_back(lib.terms[static_cast<std::size_t>(k)].to_string(lib.space));
    if (report.extra_terms.empty() && report.missing_terms.empty())
        report.structure = "exact";
    else if (report.missing_terms.empty())
        report.structure = "extra_terms";
    else if (report.extra_terms.empty())
        report.structure = "missing_terms";
    else
        report.structure = "extra_and_missing_terms";

    // coefficient table with scale-normalized ratios for the passive cases
    int ref = -1;
    if (config.case_id != 1) {
        ref = model.prior_index;
        if (ref < 0) {
            double best = 0.0;
            for (const int k : expected)
                if (std::abs(truth_model.coefficients[k]) > best) {
                    best = std::abs(truth_model.coefficients[k]);
                    ref = k;
                }
        }
    }
    nlohmann::json table = nlohmann::json::array();
    std::vector<int> rows = expected;
    for (const int k : learned)
        if (std::find(rows.begin(), rows.end(), k) == rows.end()) rows.push_back(k);
    for (const int k : rows) {
        const double learned_c = model.coefficients[k];
        const double true_c = truth_model.coefficients[k];
        nlohmann::json row = {{"term", lib.terms[static_cast<std::size_t>(k)].to_string(lib.space)},
                              {"learned", learned_c},
                              {"true", true_c}};
        if (ref >= 0 && model.coefficients[ref] != 0.0 && truth_model.coefficients[ref] != 0.0 &&
            true_c != 0.0) {
            const double learned_ratio = learned_c / model.coefficients[ref];
            const double true_ratio = true_c / truth_model.coefficients[ref];
            row["normalized_ratio"] = learned_ratio / true_ratio;
        } else if (true_c != 0.0) {
            row["ratio_to_true"] = learned_c / true_c;
        }
        table.push_back(std::move(row));
    }
    report.coefficient_table = std::move(table);
    return report;
}

inline nlohmann::json validation_to_json(const ValidationReport& r) {
    nlohmann::json rollouts = nlohmann::json::array();
    for (const auto& cmp : r.rollouts)
        rollouts.push_back({{"traj", cmp.traj},
                            {"diverged", cmp.diverged},
                            {"rmse", cmp.diverged ? -1.0 : cmp.rmse}});
    return {{"mean_rmse", r.mean_rmse},
            {"diverged_count", r.diverged_count},
            {"structure", r.structure},
            {"support", r.support},
            {"extra_terms", r.extra_terms},
            {"missing_terms", r.missing_terms},
            {"coefficients", r.coefficient_table},
            {"rollouts", rollouts}};
}

struct FitOutcome {
    TrainResult result;
    nlohmann::json selection;  // per-candidate metrics when several priors were tried
};

namespace detail {

// Optimizer failures surface in the training report as a non-converged run
// with an empty model instead of aborting the pipeline.
inline FitOutcome failed_fit(const RunConfig& config, std::shared_ptr<const CandidateLibrary> lib,
                             const std::string& error) {
    FitOutcome out;
    const int p = lib->size();
    out.result.model = make_model(std::move(lib), Eigen::VectorXd::Zero(p));
    out.result.report.case_id = config.case_id;
    out.result.report.schedule = config.schedule;
    out.result.report.status = "non_converged";
    out.result.report.error = error;
    return out;
}

}  // namespace detail

// Trains on the given dataset: case I/II directly, case III with prior-term
// selection when several candidates are configured. Optimizer failures are
// folded into a non-converged report.
inline FitOutcome fit(const RunConfig& config, const TrajectoryDataset& ds) {
    config.validate_config();
    if (ds.meta.system.kind != config.system.kind)
        throw ConfigError("dataset was generated for " + to_string(ds.meta.system.kind) +
                          " but the config says " + to_string(config.system.kind));
    if (config.case_id == 1 && !ds.meta.forced)
        throw ConfigError("case 1 needs a dataset with recorded external inputs");

    auto lib = config.build();
    FitOutcome out;
    try {
        if (config.case_id == 3 && config.prior_terms.size() > 1) {
            std::vector<int> candidates;
            for (const auto& t : config.prior_terms) candidates.push_back(lib->require(t));
            auto metric = [&](const TrainResult& res) {
                ValidationReport v = validate(res.model, config);
                return v.mean_rmse;
            };
            PriorSelection sel =
                select_prior_term(lib, ds, candidates, config.schedule, metric, config.threads);
            out.result = std::move(sel.result);
            nlohmann::json metrics = nlohmann::json::array();
            for (const auto& [k, score] : sel.metrics)
                metrics.push_back(
                    {{"prior_term", lib->terms[static_cast<std::size_t>(k)].to_string(lib->space)},
                     {"rollout_rmse", std::isfinite(score) ? score : -1.0}});
            out.selection = std::move(metrics);
        } else {
            const int r = config.case_id == 3 ? lib->require(config.prior_terms.at(0)) : -1;
            out.result = train(lib, ds, config.case_id, r, config.schedule, config.threads);
        }
    } catch (const EmptyModelError& e) {
        out = detail::failed_fit(config, lib, e.what());
    } catch (const NumericalError& e) {
        out = detail::failed_fit(config, lib, e.what());
    } catch (const DegenerateModelError& e) {
        out = detail::failed_fit(config, lib, e.what());
    }
    return out;
}

inline FitOutcome fit_and_write(const RunConfig& config) {
    const TrajectoryDataset ds = load_dataset(dataset_path(config, config.fit_sigma));
    FitOutcome out = fit(config, ds);
    std::filesystem::create_directories(config.output_dir);

    nlohmann::json model_json = model_to_json(out.result.model);
    model_json["case"] = config.case_id;
    model_json["system"] = system_to_json(config.system);
    model_json["fit_sigma"] = config.fit_sigma;
    detail::write_text(model_path(config), model_json.dump(2) + "\n");

    nlohmann::json report_json = report_to_json(out.result.report);
    if (!out.selection.is_null()) report_json["prior_selection"] = out.selection;
    detail::write_text((std::filesystem::path(config.output_dir) / "train_report.json").string(),
                       report_json.dump(2) + "\n");
    return out;
}

inline LagrangianModel load_model(const RunConfig& config) {
    std::ifstream f(model_path(config));
    if (!f) throw IoError("cannot open '" + model_path(config) + "'; run fit first");
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(model_path(config) + ": invalid JSON: " + e.what());
    }
    return model_from_json(j, config.build());
}

// Writes the rendered Lagrangian, the coefficient table, the rollout
// comparison CSV and a JSON summary of the run.
inline void write_report(const RunConfig& config, const LagrangianModel& model,
                         const ValidationReport& validation) {
    std::filesystem::create_directories(config.output_dir);
    const auto dir = std::filesystem::path(config.output_dir);

    detail::write_text((dir / "lagrangian.txt").string(), render(model, 3) + "\n");

    std::string coeffs = "term,learned,true\n";
    for (const auto& row : validation.coefficient_table) {
        char buf[64];
        coeffs += row.at("term").get<std::string>();
        std::snprintf(buf, sizeof(buf), ",%.17g,%.17g\n", row.at("learned").get<double>(),
                      row.at("true").get<double>());
        coeffs += buf;
    }
    detail::write_text((dir / "coefficients.csv").string(), coeffs);

    const int n = config.system.dof();
    std::string roll = "traj_id,t";
    for (int i = 0; i < n; ++i) roll += ",q_true_" + std::to_string(i + 1);
    for (int i = 0; i < n; ++i) roll += ",q_pred_" + std::to_string(i + 1);
    roll += "\n";
    for (const auto& cmp : validation.rollouts) {
        for (long r = 0; r < static_cast<long>(cmp.t.size()); ++r) {
            roll += std::to_string(cmp.traj);
            char buf[40];
            std::snprintf(buf, sizeof(buf), ",%.17g", cmp.t[static_cast<std::size_t>(r)]);
            roll += buf;
            for (int i = 0; i < n; ++i) {
                std::snprintf(buf, sizeof(buf), ",%.17g", cmp.q_true(r, i));
                roll += buf;
            }
            for (int i = 0; i < n; ++i) {
                const bool have = r < cmp.q_pred.rows();
                std::snprintf(buf, sizeof(buf), ",%.17g", have ? cmp.q_pred(r, i) : std::nan(""));
                roll += buf;
            }
            roll += "\n";
        }
    }
    detail::write_text((dir / "rollout.csv").string(), roll);

    nlohmann::json summary = {{"config", config_to_json(config)},
                              {"model", model_to_json(model)},
                              {"validation", validation_to_json(validation)}};
    detail::write_text((dir / "summary.json").string(), summary.dump(2) + "\n");
}

}  // namespace lagrangia
