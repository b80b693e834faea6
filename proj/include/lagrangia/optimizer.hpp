#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "lagrangia/eltensors.hpp"
#include "lagrangia/errors.hpp"
#include "lagrangia/model.hpp"
#include "lagrangia/rng.hpp"

namespace lagrangia {

// Staged training hyperparameters. Between stages the learning rate grows by
// alpha_growth and the sparsity weight shrinks by lambda_decay; stage 1 uses
// the small cut-off threshold, later stages the large one.
struct StageSchedule {
    double alpha0 = 1e-5;
    double lambda0 = 1.0;
    double alpha_growth = 2.0;
    double lambda_decay = 10.0;
    int epochs_per_stage = 100;
    int batch_size = 128;
    double threshold_stage1 = 1e-2;
    double threshold_later = 1e-1;
    double tolerance = 1e-3;
    int max_stages = 4;
    double relaxed_tolerance_factor = 10.0;
    std::uint64_t seed = 0;
    // The prox shrinks by alpha*lambda when true (the proximal operator of
    // the scaled L1 penalty); when false it shrinks by lambda directly.
    bool prox_scaled_by_alpha = true;
    bool restart_momentum_per_stage = false;
    // Unpenalized (masked) terms are also exempt from hard-thresholding
    // unless this is set.
    bool hard_threshold_masked = false;
    bool use_term_scaling = false;
    double init_range = 0.1;  // case II coefficient init: uniform(-r, r)

    void validate() const {
        if (alpha0 <= 0 || alpha0 > 1e-5)
            throw ConfigError("initial learning rate must be in (0, 1e-5]");
        if (lambda0 < 0.1 || lambda0 > 5.0)
            throw ConfigError("initial sparsity weight must be in [0.1, 5]");
        if (epochs_per_stage < 1 || batch_size < 1 || max_stages < 1)
            throw ConfigError("epochs, batch size and stage count must be positive");
    }
};

// Component-wise soft threshold: sign(β_k)·max(|β_k|−λ, 0). Components with
// exempt[k] set pass through unchanged.
inline Eigen::VectorXd soft_threshold(const Eigen::VectorXd& beta, double lambda,
                                      const std::vector<bool>& exempt = {}) {
    if (lambda < 0) throw ConfigError("soft threshold needs lambda >= 0");
    Eigen::VectorXd out(beta.size());
    for (Eigen::Index k = 0; k < beta.size(); ++k) {
        if (!exempt.empty() && exempt[static_cast<std::size_t>(k)]) {
            out[k] = beta[k];
        } else {
            const double shrunk = std::abs(beta[k]) - lambda;
            out[k] = shrunk > 0 ? (beta[k] > 0 ? shrunk : -shrunk) : 0.0;
        }
    }
    return out;
}

using CostFn = std::function<CostGrad(const Eigen::VectorXd&)>;

// Mutable optimizer state. c holds all p coefficients; only indices in
// `active` are updated, indices removed by hard-thresholding stay zero for
// the rest of the run, and fixed_index (the case III prior term) stays at 1.
struct TrainState {
    Eigen::VectorXd c, c_prev;
    std::vector<int> active;
    std::vector<bool> exempt;  // exempt from the L1 prox
    long iter = 1;
    int stage = 0;
    int fixed_index = -1;
    std::vector<double> epoch_costs;
    std::vector<std::vector<int>> survivors_per_stage;
};

// One accelerated proximal step:
//   v = c + (i−2)/(i+1) (c − c_prev),  c⁺ = prox(v − α ∇J(v)).
// The momentum factor uses the global iteration counter; at i = 1 the state
// has c_prev = c and the step reduces to plain proximal gradient. Returns the
// cost at the extrapolated point v.
inline double fista_step(TrainState& st, const CostFn& cost, double alpha, double lambda,
                         bool prox_scaled_by_alpha = true) {
    const double mom = (static_cast<double>(st.iter) - 2.0) / (static_cast<double>(st.iter) + 1.0);
    Eigen::VectorXd v = st.c;
    for (const int k : st.active) v[k] = st.c[k] + mom * (st.c[k] - st.c_prev[k]);
    const CostGrad cg = cost(v);
    if (!cg.grad.allFinite())
        throw NumericalError("non-finite gradient at iteration " + std::to_string(st.iter));
    const double shrink = prox_scaled_by_alpha ? alpha * lambda : lambda;
    Eigen::VectorXd next = st.c;
    for (const int k : st.active) {
        const double step = v[k] - alpha * cg.grad[k];
        if (st.exempt[static_cast<std::size_t>(k)]) {
            next[k] = step;
        } else {
            const double mag = std::abs(step) - shrink;
            next[k] = mag > 0 ? (step > 0 ? mag : -mag) : 0.0;
        }
    }
    st.c_prev.swap(st.c);
    st.c = std::move(next);
    ++st.iter;
    return cg.value;
}

// Batch cost over sample indices; bound to a dataset and problem case.
using BatchCostFn = std::function<CostGrad(const Eigen::VectorXd&, const std::vector<long>&)>;

// One stage: epochs of mini-batch FISTA over seeded shuffles, then
// hard-thresholding of small active coefficients. Returns the mean batch cost
// of the last epoch.
inline double run_stage(TrainState& st, const BatchCostFn& batch_cost, const StageSchedule& sched,
                        int stage_index, long nsamples, Rng& shuffle_rng) {
    if (stage_index < 1) throw ConfigError("stage index starts at 1");
    const double alpha = sched.alpha0 * std::pow(sched.alpha_growth, stage_index - 1);
    const double lambda = sched.lambda0 / std::pow(sched.lambda_decay, stage_index - 1);
    const double threshold = stage_index == 1 ? sched.threshold_stage1 : sched.threshold_later;
    st.stage = stage_index;
    if (sched.restart_momentum_per_stage) st.iter = 1;

    std::vector<long> order(static_cast<std::size_t>(nsamples));
    for (long i = 0; i < nsamples; ++i) order[static_cast<std::size_t>(i)] = i;

    double epoch_mean = 0.0;
    for (int epoch = 0; epoch < sched.epochs_per_stage; ++epoch) {
        shuffle_rng.shuffle(order);
        double sum = 0.0;
        long nbatches = 0;
        for (long start = 0; start < nsamples; start += sched.batch_size) {
            const long stop = std::min(nsamples, start + sched.batch_size);
            const std::vector<long> batch(order.begin() + start, order.begin() + stop);
            CostFn bound = [&](const Eigen::VectorXd& c) { return batch_cost(c, batch); };
            sum += fista_step(st, bound, alpha, lambda, sched.prox_scaled_by_alpha);
            ++nbatches;
        }
        epoch_mean = sum / static_cast<double>(nbatches);
        st.epoch_costs.push_back(epoch_mean);
    }

    // hard threshold: drop small active coefficients for good
    std::vector<int> kept;
    for (const int k : st.active) {
        const bool protected_term = st.exempt[static_cast<std::size_t>(k)] && !sched.hard_threshold_masked;
        if (!protected_term && std::abs(st.c[k]) < threshold) {
            st.c[k] = 0.0;
            st.c_prev[k] = 0.0;
        } else {
            kept.push_back(k);
        }
    }
    st.active = std::move(kept);
    st.survivors_per_stage.push_back(st.active);
    if (st.active.empty() && st.fixed_index < 0) {
        std::string last;
        for (const auto& ks : st.survivors_per_stage)
            if (!ks.empty()) {
                last.clear();
                for (int k : ks) last += (last.empty() ? "" : ", ") + std::to_string(k);
            }
        throw EmptyModelError("hard-thresholding removed every term (last surviving set: {" + last +
                              "})");
    }
    return epoch_mean;
}

struct TrainReport {
    int case_id = 1;
    std::string prior_term;
    std::string status;  // converged | converged_relaxed | non_converged
    std::string error;   // set when the optimizer aborted
    int stages_run = 0;
    double final_cost = 0.0;
    double tolerance_used = 0.0;
    std::vector<double> epoch_costs;
    std::vector<std::vector<std::string>> survivors_per_stage;
    StageSchedule schedule;
    double wall_seconds = 0.0;

    bool converged() const { return status != "non_converged"; }
};

inline nlohmann::json report_to_json(const TrainReport& r) {
    return {{"case", r.case_id},
            {"prior_term", r.prior_term},
            {"status", r.status},
            {"error", r.error},
            {"stages_run", r.stages_run},
            {"final_cost", r.final_cost},
            {"tolerance_used", r.tolerance_used},
            {"epoch_costs", r.epoch_costs},
            {"survivors_per_stage", r.survivors_per_stage},
            {"wall_seconds", r.wall_seconds},
            {"hyperparameters",
             {{"alpha0", r.schedule.alpha0},
              {"lambda0", r.schedule.lambda0},
              {"alpha_growth", r.schedule.alpha_growth},
              {"lambda_decay", r.schedule.lambda_decay},
              {"epochs_per_stage", r.schedule.epochs_per_stage},
              {"batch_size", r.schedule.batch_size},
              {"threshold_stage1", r.schedule.threshold_stage1},
              {"threshold_later", r.schedule.threshold_later},
              {"tolerance", r.schedule.tolerance},
              {"max_stages", r.schedule.max_stages},
              {"relaxed_tolerance_factor", r.schedule.relaxed_tolerance_factor},
              {"prox_scaled_by_alpha", r.schedule.prox_scaled_by_alpha},
              {"restart_momentum_per_stage", r.schedule.restart_momentum_per_stage},
              {"hard_threshold_masked", r.schedule.hard_threshold_masked},
              {"use_term_scaling", r.schedule.use_term_scaling},
              {"seed", r.schedule.seed}}}};
}

struct TrainResult {
    LagrangianModel model;
    TrainReport report;
};

// Root-mean-square of every candidate's value over the dataset samples (used
// by the optional per-term scaling).
inline Eigen::VectorXd term_rms(const CandidateLibrary& lib, const TrajectoryDataset& ds) {
    const int p = lib.size();
    Eigen::VectorXd sumsq = Eigen::VectorXd::Zero(p);
    double vals[64];
    Eigen::VectorXd q(ds.n), qd(ds.n);
    for (long s = 0; s < ds.samples(); ++s) {
        q = ds.q.row(s).transpose();
        qd = ds.qd.row(s).transpose();
        CandidateExpr::atom_values(q, qd, vals);
        for (int k = 0; k < p; ++k) {
            const double v = lib.terms[static_cast<std::size_t>(k)].evaluate_atoms(vals);
            sumsq[k] += v * v;
        }
    }
    Eigen::VectorXd rms = (sumsq / static_cast<double>(ds.samples())).cwiseSqrt();
    for (int k = 0; k < p; ++k)
        if (rms[k] < 1e-12) rms[k] = 1.0;
    return rms;
}

// Staged sparse training over pre-assembled tensors. Runs stages until the
// full-dataset cost reaches the tolerance; if max_stages pass without that,
// the tolerance is relaxed once by relaxed_tolerance_factor, and a run that
// still misses the relaxed value returns its best iterate flagged
// non-converged.
inline TrainResult train_with_tensors(std::shared_ptr<const CandidateLibrary> lib,
                                      const TrajectoryDataset& ds, ELTensors& tensors, int case_id,
                                      int prior_index, const StageSchedule& sched) {
    sched.validate();
    const int p = lib->size();
    if (case_id < 1 || case_id > 3) throw ConfigError("case must be 1, 2 or 3");
    if (case_id == 3 && (prior_index < 0 || prior_index >= p))
        throw ConfigError("case 3 needs a prior term inside the library");
    if (case_id == 1 && !ds.meta.forced)
        throw ConfigError("case 1 needs a dataset with recorded external inputs");

    const auto t_start = std::chrono::steady_clock::now();

    Eigen::VectorXd scales = Eigen::VectorXd::Ones(p);
    if (sched.use_term_scaling) {
        scales = term_rms(*lib, ds);
        if (case_id == 3) scales[prior_index] = 1.0;
        tensors.apply_scales(scales);
    }

    TrainState st;
    st.c = Eigen::VectorXd::Zero(p);
    st.c_prev = st.c;
    st.exempt.assign(static_cast<std::size_t>(p), false);
    for (int k = 0; k < p; ++k)
        if (!lib->penalty_mask[static_cast<std::size_t>(k)]) st.exempt[static_cast<std::size_t>(k)] = true;
    Rng rng(sched.seed);
    Rng shuffle_rng = rng.stream(1);
    if (case_id == 2) {
        Rng init_rng = rng.stream(2);
        for (int k = 0; k < p; ++k) st.c[k] = init_rng.uniform(-sched.init_range, sched.init_range);
        st.c_prev = st.c;
    }
    if (case_id == 3) {
        st.fixed_index = prior_index;
        st.c[prior_index] = 1.0;
        st.c_prev[prior_index] = 1.0;
        st.exempt[static_cast<std::size_t>(prior_index)] = true;
    }
    for (int k = 0; k < p; ++k)
        if (k != prior_index || case_id != 3) st.active.push_back(k);

    BatchCostFn batch_cost = [&](const Eigen::VectorXd& c, const std::vector<long>& batch) {
        switch (case_id) {
            case 1: return cost_case1(tensors, ds, c, batch);
            case 2: return cost_case2(tensors, ds, c, batch);
            default: return upsilon_residual(tensors, ds, c, prior_index, batch);
        }
    };
    auto full_cost = [&](const Eigen::VectorXd& c) {
        return batch_cost(c, detail::all_samples(tensors.count)).value;
    };

    TrainReport report;
    report.case_id = case_id;
    if (case_id == 3)
        report.prior_term =
            lib->terms[static_cast<std::size_t>(prior_index)].to_string(lib->space);
    report.schedule = sched;

    double tol = sched.tolerance;
    bool relaxed = false;
    std::string status = "non_converged";
    double best_cost = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_c = st.c;
    double last_cost = std::numeric_limits<double>::infinity();

    for (int stage = 1; stage <= sched.max_stages; ++stage) {
        run_stage(st, batch_cost, sched, stage, tensors.count, shuffle_rng);
        ++report.stages_run;
        last_cost = full_cost(st.c);
        if (last_cost < best_cost) {
            best_cost = last_cost;
            best_c = st.c;
        }
        if (last_cost <= tol) {
            status = "converged";
            break;
        }
        if (stage == sched.max_stages && !relaxed) {
            tol *= sched.relaxed_tolerance_factor;
            relaxed = true;
            if (last_cost <= tol) status = "converged_relaxed";
        }
    }

    Eigen::VectorXd c_final = status == "non_converged" ? best_c : st.c;
    if (sched.use_term_scaling) c_final = c_final.cwiseQuotient(scales);

    report.status = status;
    report.final_cost = status == "non_converged" ? best_cost : last_cost;
    report.tolerance_used = tol;
    report.epoch_costs = st.epoch_costs;
    for (const auto& stage_set : st.survivors_per_stage) {
        std::vector<std::string> names;
        for (const int k : stage_set)
            names.push_back(lib->terms[static_cast<std::size_t>(k)].to_string(lib->space));
        report.survivors_per_stage.push_back(std::move(names));
    }
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    TrainResult result{make_model(lib, std::move(c_final), case_id == 3 ? prior_index : -1),
                       std::move(report)};
    return result;
}

// Assembles the tensors for the requested case and trains.
inline TrainResult train(std::shared_ptr<const CandidateLibrary> lib, const TrajectoryDataset& ds,
                         int case_id, int prior_index, const StageSchedule& sched, int threads = 0) {
    TermPartials partials(*lib);
    ELTensors tensors =
        assemble_tensors(partials, ds, case_id == 2 ? TensorSet::accel : TensorSet::residual, threads);
    return train_with_tensors(std::move(lib), ds, tensors, case_id, prior_index, sched);
}

struct PriorSelection {
    int prior_index = -1;
    TrainResult result;
    std::vector<std::pair<int, double>> metrics;  // (candidate, score); failures score inf
};

// Trains one case III model per candidate prior term and keeps the one with
// the best (lowest) validation metric.
inline PriorSelection select_prior_term(std::shared_ptr<const CandidateLibrary> lib,
                                        const TrajectoryDataset& ds, const std::vector<int>& candidates,
                                        const StageSchedule& sched,
                                        const std::function<double(const TrainResult&)>& metric,
                                        int threads = 0) {
    if (candidates.empty()) throw ConfigError("prior term selection needs at least one candidate");
    TermPartials partials(*lib);
    ELTensors tensors = assemble_tensors(partials, ds, TensorSet::residual, threads);

    PriorSelection best;
    double best_score = std::numeric_limits<double>::infinity();
    std::string failures;
    for (const int r : candidates) {
        try {
            TrainResult res = [&] {
                if (!sched.use_term_scaling) return train_with_tensors(lib, ds, tensors, 3, r, sched);
                ELTensors working = tensors;  // scaling mutates the cache
                return train_with_tensors(lib, ds, working, 3, r, sched);
            }();
            const double score = metric(res);
            best.metrics.emplace_back(r, score);
            if (score < best_score) {
                best_score = score;
                best.prior_index = r;
                best.result = std::move(res);
            }
        } catch (const std::exception& e) {
            best.metrics.emplace_back(r, std::numeric_limits<double>::infinity());
            failures += (failures.empty() ? "" : "; ") +
                        lib->terms[static_cast<std::size_t>(r)].to_string(lib->space) + ": " + e.what();
        }
    }
    if (best.prior_index < 0)
        throw ConfigError("every prior term candidate failed (" + failures + ")");
    return best;
}

}  // namespace lagrangia
