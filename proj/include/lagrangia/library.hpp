#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lagrangia/expr.hpp"
#include "lagrangia/rng.hpp"

namespace lagrangia {

// Ordered set of candidate functions. Term order is stable for the lifetime
// of a run: coefficient index k always refers to the same term. penalty_mask
// is true for terms subject to the L1 prox; known prior terms are exempted by
// setting it false. scales hold the optional per-term magnitude scaling.
struct CandidateLibrary {
    CoordinateSpace space;
    std::vector<CandidateExpr> terms;
    std::vector<bool> penalty_mask;
    Eigen::VectorXd scales;

    int size() const { return static_cast<int>(terms.size()); }

    int index_of_key(const std::vector<std::int8_t>& key) const {
        for (std::size_t k = 0; k < terms.size(); ++k)
            if (terms[k].monomial_key() == key) return static_cast<int>(k);
        return -1;
    }

    int index_of(const std::string& term_text) const {
        return index_of_key(parse_term(space, term_text).monomial_key());
    }

    int require(const std::string& term_text) const {
        const int k = index_of(term_text);
        if (k < 0) throw ConfigError("term '" + term_text + "' is not in the candidate library");
        return k;
    }
};

inline CandidateLibrary make_library(CoordinateSpace space, std::vector<CandidateExpr> terms) {
    CandidateLibrary lib;
    lib.space = std::move(space);
    lib.terms = std::move(terms);
    lib.penalty_mask.assign(lib.terms.size(), true);
    lib.scales = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(lib.terms.size()));
    return lib;
}

// All distinct monomials of total degree 1..max_order over the atoms, in
// graded lexicographic order (degree first, then atom indices). Products that
// coincide after commutative reordering are emitted once.
inline std::vector<CandidateExpr> polynomial_combinations(const std::vector<CandidateExpr>& atoms,
                                                          int max_order) {
    if (atoms.empty()) throw ConfigError("polynomial combinations need at least one atom");
    if (max_order < 1) throw ConfigError("max_order must be at least 1");
    std::vector<CandidateExpr> out;
    std::set<std::vector<std::int8_t>> seen;
    const int m = static_cast<int>(atoms.size());
    std::vector<int> pick;
    auto emit = [&] {
        CandidateExpr prod = atoms[static_cast<std::size_t>(pick[0])];
        for (std::size_t i = 1; i < pick.size(); ++i) prod = prod * atoms[static_cast<std::size_t>(pick[i])];
        if (seen.insert(prod.monomial_key()).second) out.push_back(std::move(prod));
    };
    // combinations with repetition, lexicographic within each degree
    for (int degree = 1; degree <= max_order; ++degree) {
        pick.assign(static_cast<std::size_t>(degree), 0);
        for (;;) {
            emit();
            int i = degree - 1;
            while (i >= 0 && pick[static_cast<std::size_t>(i)] == m - 1) --i;
            if (i < 0) break;
            const int v = ++pick[static_cast<std::size_t>(i)];
            for (int j = i + 1; j < degree; ++j) pick[static_cast<std::size_t>(j)] = v;
        }
    }
    return out;
}

// Pairwise products a*b for every a in setA and b in setB, A-major order.
inline std::vector<CandidateExpr> cross_terms(const std::vector<CandidateExpr>& set_a,
                                              const std::vector<CandidateExpr>& set_b) {
    if (set_a.empty() || set_b.empty()) throw ConfigError("cross terms need two nonempty sets");
    std::vector<CandidateExpr> out;
    out.reserve(set_a.size() * set_b.size());
    for (const auto& a : set_a)
        for (const auto& b : set_b) out.push_back(a * b);
    return out;
}

// A term is trivial when applying the Euler-Lagrange operator to it (alone,
// unit coefficient) gives an identically vanishing residual: such terms carry
// no dynamical information for any trajectory. Checked numerically at 64
// randomized states with q, q̇, q̈ drawn uniformly from [-2, 2].
inline bool is_trivial_term(const CandidateExpr& expr, const CoordinateSpace& space) {
    const int n = space.size();
    std::vector<CandidateExpr> grad_qd, grad_q;
    for (int i = 0; i < n; ++i) {
        grad_qd.push_back(expr.diff(Var{i, true}));
        grad_q.push_back(expr.diff(Var{i, false}));
    }
    std::vector<CandidateExpr> m_row, n_row;  // row i: d/dq̇_j and d/dq_j of grad_qd[i]
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            m_row.push_back(grad_qd[static_cast<std::size_t>(i)].diff(Var{j, true}));
            n_row.push_back(grad_qd[static_cast<std::size_t>(i)].diff(Var{j, false}));
        }

    Rng rng(0x7C3A11B5u);
    Eigen::VectorXd q(n), qd(n), qdd(n);
    double vals[64];
    for (int s = 0; s < 64; ++s) {
        for (int i = 0; i < n; ++i) {
            q[i] = rng.uniform(-2.0, 2.0);
            qd[i] = rng.uniform(-2.0, 2.0);
            qdd[i] = rng.uniform(-2.0, 2.0);
        }
        CandidateExpr::atom_values(q, qd, vals);
        for (int i = 0; i < n; ++i) {
            double r = -grad_q[static_cast<std::size_t>(i)].evaluate_atoms(vals);
            for (int j = 0; j < n; ++j) {
                r += m_row[static_cast<std::size_t>(i * n + j)].evaluate_atoms(vals) * qdd[j];
                r += n_row[static_cast<std::size_t>(i * n + j)].evaluate_atoms(vals) * qd[j];
            }
            if (std::abs(r) >= 1e-9) return false;
        }
    }
    return true;
}

// Declarative library recipe: per-group atom lists with a polynomial order,
// an optional cross-product stage between consecutive groups, and an explicit
// exclusion list. The built library concatenates the per-group monomials in
// group order followed by the cross terms.
struct LibraryGroup {
    std::vector<std::string> atoms;
    int max_order = 2;
};

struct LibrarySpec {
    std::vector<LibraryGroup> groups;
    bool cross_products = false;
    std::vector<std::string> exclude;
};

inline CandidateLibrary build_library(const CoordinateSpace& space, const LibrarySpec& spec) {
    if (spec.groups.empty()) throw ConfigError("library spec has no atom groups");
    std::vector<std::vector<CandidateExpr>> group_terms;
    for (const auto& g : spec.groups) {
        std::vector<CandidateExpr> atoms;
        for (const auto& a : g.atoms) atoms.push_back(parse_term(space, a));
        group_terms.push_back(polynomial_combinations(atoms, g.max_order));
    }
    std::vector<CandidateExpr> terms;
    for (const auto& g : group_terms) terms.insert(terms.end(), g.begin(), g.end());
    if (spec.cross_products) {
        for (std::size_t i = 0; i + 1 < group_terms.size(); ++i)
            for (std::size_t j = i + 1; j < group_terms.size(); ++j) {
                auto cross = cross_terms(group_terms[i], group_terms[j]);
                terms.insert(terms.end(), cross.begin(), cross.end());
            }
    }
    for (const auto& ex : spec.exclude) {
        const auto key = parse_term(space, ex).monomial_key();
        const auto before = terms.size();
        terms.erase(std::remove_if(terms.begin(), terms.end(),
                                   [&](const CandidateExpr& t) { return t.monomial_key() == key; }),
                    terms.end());
        if (terms.size() == before)
            throw ConfigError("excluded term '" + ex + "' is not produced by the library spec");
    }
    return make_library(space, std::move(terms));
}

}  // namespace lagrangia
