#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "lagrangia/dataset.hpp"
#include "lagrangia/errors.hpp"
#include "lagrangia/library.hpp"
#include "lagrangia/parallel.hpp"

namespace lagrangia {

// Moore-Penrose pseudo-inverse via SVD with singular values below
// max(rows, cols) * eps * σ_max treated as zero.
inline Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& a) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double cutoff = static_cast<double>(std::max(a.rows(), a.cols())) *
                          std::numeric_limits<double>::epsilon() * (sv.size() ? sv[0] : 0.0);
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] > cutoff) inv[i] = 1.0 / sv[i];
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

// Exact symbolic second partials of every library term:
//   M_k = ∇ᵀ_q̇ ∇_q̇ φ_k,  N_k = ∇ᵀ_q ∇_q̇ φ_k,  O_k = ∇_q φ_k,
// with (M_k)_ij = ∂²φ_k/∂q̇_i∂q̇_j and (N_k)_ij = ∂²φ_k/∂q̇_i∂q_j. All n²
// entries of M are differentiated independently; its symmetry is a property
// of exact differentiation, not something imposed here.
class TermPartials {
public:
    explicit TermPartials(const CandidateLibrary& lib)
        : n_(lib.space.size()), p_(lib.size()), space_(lib.space) {
        m_.reserve(static_cast<std::size_t>(p_ * n_ * n_));
        nn_.reserve(static_cast<std::size_t>(p_ * n_ * n_));
        o_.reserve(static_cast<std::size_t>(p_ * n_));
        for (int k = 0; k < p_; ++k) {
            const CandidateExpr& phi = lib.terms[static_cast<std::size_t>(k)];
            std::vector<CandidateExpr> grad_qd;
            for (int i = 0; i < n_; ++i) grad_qd.push_back(phi.diff(Var{i, true}));
            for (int i = 0; i < n_; ++i)
                for (int j = 0; j < n_; ++j) {
                    m_.push_back(grad_qd[static_cast<std::size_t>(i)].diff(Var{j, true}));
                    nn_.push_back(grad_qd[static_cast<std::size_t>(i)].diff(Var{j, false}));
                }
            for (int i = 0; i < n_; ++i) o_.push_back(phi.diff(Var{i, false}));
        }
    }

    int n() const { return n_; }
    int p() const { return p_; }
    const CoordinateSpace& space() const { return space_; }

    // Numeric M_k, N_k, O_k at a state.
    void eval(int k, const Eigen::VectorXd& q, const Eigen::VectorXd& qd, Eigen::MatrixXd& m,
              Eigen::MatrixXd& n, Eigen::VectorXd& o) const {
        double vals[64];
        CandidateExpr::atom_values(q, qd, vals);
        eval_atoms(k, vals, m, n, o);
    }

    void eval_atoms(int k, const double* vals, Eigen::MatrixXd& m, Eigen::MatrixXd& n,
                    Eigen::VectorXd& o) const {
        m.resize(n_, n_);
        n.resize(n_, n_);
        o.resize(n_);
        const std::size_t base2 = static_cast<std::size_t>(k * n_ * n_);
        const std::size_t base1 = static_cast<std::size_t>(k * n_);
        for (int i = 0; i < n_; ++i) {
            for (int j = 0; j < n_; ++j) {
                m(i, j) = m_[base2 + static_cast<std::size_t>(i * n_ + j)].evaluate_atoms(vals);
                n(i, j) = nn_[base2 + static_cast<std::size_t>(i * n_ + j)].evaluate_atoms(vals);
            }
            o[i] = o_[base1 + static_cast<std::size_t>(i)].evaluate_atoms(vals);
        }
    }

private:
    int n_, p_;
    CoordinateSpace space_;
    std::vector<CandidateExpr> m_, nn_, o_;
};

// Per-sample numeric tensors cached for a whole training run. For every
// sample s (rows [s*n, s*n+n)):
//   A   column k: M_k q̈ + N_k q̇ − O_k      (residual features, cases I/III)
//   B   column k: N_k q̇ − O_k              (acceleration prediction, case II)
//   Mc  block (s*n, k*n, n, n): M_k        (case II)
struct ELTensors {
    int n = 0, p = 0;
    long count = 0;
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    Eigen::MatrixXd Mc;
    bool has_residual = false;
    bool has_accel = false;

    Eigen::MatrixXd m_at(long s, int k) const { return Mc.block(s * n, k * n, n, n); }

    // Divides term k's features by scale s_k (used by the optional per-term
    // magnitude scaling; coefficients then live in scaled units).
    void apply_scales(const Eigen::VectorXd& scales) {
        for (int k = 0; k < p; ++k) {
            const double s = scales[k];
            if (s == 1.0) continue;
            if (s <= 0.0) throw ConfigError("term scales must be positive");
            if (has_residual) A.col(k) /= s;
            if (has_accel) {
                B.col(k) /= s;
                Mc.middleCols(static_cast<long>(k) * n, n) /= s;
            }
        }
    }
};

enum class TensorSet { residual, accel, both };

// Evaluates the symbolic partials of every term at every dataset sample.
// Parallel over fixed-size sample chunks; each chunk writes disjoint rows, so
// the result does not depend on the thread count.
inline ELTensors assemble_tensors(const TermPartials& partials, const TrajectoryDataset& ds,
                                  TensorSet what = TensorSet::residual, int threads = 0) {
    const int n = partials.n(), p = partials.p();
    if (ds.n != n) throw ConfigError("dataset and library use different coordinate spaces");
    ELTensors t;
    t.n = n;
    t.p = p;
    t.count = ds.samples();
    t.has_residual = what != TensorSet::accel;
    t.has_accel = what != TensorSet::residual;
    if (t.has_residual) t.A.setZero(t.count * n, p);
    if (t.has_accel) {
        t.B.setZero(t.count * n, p);
        t.Mc.setZero(t.count * n, static_cast<long>(p) * n);
    }

    parallel_chunks(t.count, 2048, threads, [&](long begin, long end) {
        double vals[64];
        Eigen::MatrixXd m(n, n), nn(n, n);
        Eigen::VectorXd o(n);
        Eigen::VectorXd q(n), qd(n), qdd(n);
        for (long s = begin; s < end; ++s) {
            q = ds.q.row(s).transpose();
            qd = ds.qd.row(s).transpose();
            qdd = ds.qdd.row(s).transpose();
            CandidateExpr::atom_values(q, qd, vals);
            for (int k = 0; k < p; ++k) {
                partials.eval_atoms(k, vals, m, nn, o);
                Eigen::VectorXd b = nn * qd - o;
                if (t.has_residual) t.A.block(s * n, k, n, 1) = m * qdd + b;
                if (t.has_accel) {
                    t.B.block(s * n, k, n, 1) = b;
                    t.Mc.block(s * n, k * n, n, n) = m;
                }
                for (int i = 0; i < n; ++i) {
                    const double a_val = t.has_residual ? t.A(s * n + i, k) : t.B(s * n + i, k);
                    if (!std::isfinite(a_val))
                        throw NumericalError("non-finite tensor value for term " + std::to_string(k) +
                                             " at sample " + std::to_string(s));
                }
            }
        }
    });
    return t;
}

// τ_pred = Σ_k c_k (M_k q̈ + N_k q̇ − O_k) at one cached sample.
inline Eigen::VectorXd tau_pred(const ELTensors& t, const Eigen::VectorXd& c, long sample) {
    return t.A.middleRows(sample * t.n, t.n) * c;
}

struct CostGrad {
    double value = 0.0;
    Eigen::VectorXd grad;
};

namespace detail {

inline std::vector<long> all_samples(long count) {
    std::vector<long> idx(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i) idx[static_cast<std::size_t>(i)] = i;
    return idx;
}

}  // namespace detail

// Case I cost: mean over the batch of ‖τ_ext − τ_pred(c)‖²; exact gradient of
// the quadratic.
inline CostGrad cost_case1(const ELTensors& t, const TrajectoryDataset& ds, const Eigen::VectorXd& c,
                           const std::vector<long>& batch) {
    CostGrad out;
    out.grad = Eigen::VectorXd::Zero(t.p);
    Eigen::VectorXd r(t.n);
    for (const long s : batch) {
        const auto seg = t.A.middleRows(s * t.n, t.n);
        r.noalias() = seg * c;
        r -= ds.tau.row(s).transpose();
        out.value += r.squaredNorm();
        out.grad.noalias() += 2.0 * (seg.transpose() * r);
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    out.value *= inv;
    out.grad *= inv;
    return out;
}

inline CostGrad cost_case1(const ELTensors& t, const TrajectoryDataset& ds, const Eigen::VectorXd& c) {
    return cost_case1(t, ds, c, detail::all_samples(t.count));
}

// Case III cost: mean ‖Υ_right − Υ_left(c)‖² where Υ_right is built from the
// known prior term r (unit coefficient) and Υ_left is linear in the remaining
// coefficients. Entry r of c is ignored (treated as 1) and entry r of the
// gradient is zero.
inline CostGrad upsilon_residual(const ELTensors& t, const TrajectoryDataset& ds,
                                 const Eigen::VectorXd& c, int r, const std::vector<long>& batch) {
    if (r < 0 || r >= t.p) throw ConfigError("prior term index out of range");
    Eigen::VectorXd c_eff = c;
    c_eff[r] = 1.0;
    CostGrad out;
    out.grad = Eigen::VectorXd::Zero(t.p);
    Eigen::VectorXd res(t.n);
    for (const long s : batch) {
        const auto seg = t.A.middleRows(s * t.n, t.n);
        res.noalias() = seg * c_eff;  // = Υ_left(c) − Υ_right
        out.value += res.squaredNorm();
        out.grad.noalias() += 2.0 * (seg.transpose() * res);
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    out.value *= inv;
    out.grad *= inv;
    out.grad[r] = 0.0;
    return out;
}

inline CostGrad upsilon_residual(const ELTensors& t, const TrajectoryDataset& ds,
                                 const Eigen::VectorXd& c, int r) {
    return upsilon_residual(t, ds, c, r, detail::all_samples(t.count));
}

// q̈_pred = pinv(−Σ c_k M_k) (Σ c_k (N_k q̇ − O_k) − τ) at one cached sample.
inline Eigen::VectorXd predict_qddot(const ELTensors& t, const Eigen::VectorXd& c, long s,
                                     const Eigen::VectorXd* tau = nullptr) {
    if (c.isZero(0.0)) throw DegenerateModelError("cannot predict accelerations with an all-zero model");
    const int n = t.n;
    Eigen::MatrixXd msum = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < t.p; ++k) {
        if (c[k] == 0.0) continue;
        msum.noalias() += c[k] * t.Mc.block(s * n, k * n, n, n);
        b.noalias() += c[k] * t.B.block(s * n, k, n, 1);
    }
    if (tau) b -= *tau;
    return pseudo_inverse(-msum) * b;
}

// Same prediction evaluated at an arbitrary state (used for rollouts).
inline Eigen::VectorXd predict_qddot_state(const TermPartials& partials, const Eigen::VectorXd& c,
                                           const Eigen::VectorXd& q, const Eigen::VectorXd& qd,
                                           const Eigen::VectorXd* tau = nullptr) {
    if (c.isZero(0.0)) throw DegenerateModelError("cannot predict accelerations with an all-zero model");
    const int n = partials.n();
    double vals[64];
    CandidateExpr::atom_values(q, qd, vals);
    Eigen::MatrixXd msum = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd m(n, n), nn(n, n);
    Eigen::VectorXd o(n);
    for (int k = 0; k < partials.p(); ++k) {
        if (c[k] == 0.0) continue;
        partials.eval_atoms(k, vals, m, nn, o);
        msum.noalias() += c[k] * m;
        b.noalias() += c[k] * (nn * qd - o);
    }
    if (tau) b -= *tau;
    return pseudo_inverse(-msum) * b;
}

// Case II cost: mean ‖q̈ − q̈_pred(c)‖². The gradient treats the pseudo-inverse
// as a smooth inverse on the full-rank subspace:
//   ∂q̈_pred/∂c_k = P (M_k q̈_pred + b_k),  P = pinv(−Σ c_k M_k).
inline CostGrad cost_case2(const ELTensors& t, const TrajectoryDataset& ds, const Eigen::VectorXd& c,
                           const std::vector<long>& batch) {
    if (c.isZero(0.0)) throw DegenerateModelError("cannot evaluate case II cost at an all-zero model");
    const int n = t.n;
    CostGrad out;
    out.grad = Eigen::VectorXd::Zero(t.p);
    Eigen::MatrixXd msum(n, n);
    Eigen::VectorXd b(n), qdd_pred(n), r(n), w(n);
    for (const long s : batch) {
        msum.setZero();
        b.setZero();
        for (int k = 0; k < t.p; ++k) {
            if (c[k] == 0.0) continue;
            msum.noalias() += c[k] * t.Mc.block(s * n, k * n, n, n);
            b.noalias() += c[k] * t.B.block(s * n, k, n, 1);
        }
        const Eigen::MatrixXd pinv = pseudo_inverse(-msum);
        qdd_pred.noalias() = pinv * b;
        r = ds.qdd.row(s).transpose() - qdd_pred;
        out.value += r.squaredNorm();
        w.noalias() = pinv.transpose() * r;
        for (int k = 0; k < t.p; ++k) {
            const Eigen::VectorXd dk =
                t.Mc.block(s * n, k * n, n, n) * qdd_pred + t.B.block(s * n, k, n, 1);
            out.grad[k] += -2.0 * w.dot(dk);
        }
    }
    const double inv = 1.0 / static_cast<double>(batch.size());
    out.value *= inv;
    out.grad *= inv;
    return out;
}

inline CostGrad cost_case2(const ELTensors& t, const TrajectoryDataset& ds, const Eigen::VectorXd& c) {
    return cost_case2(t, ds, c, detail::all_samples(t.count));
}

}  // namespace lagrangia
