#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lagrangia/errors.hpp"

namespace lagrangia {

// Generalized coordinates q_1..q_n. Each coordinate carries an identifier
// used in configuration files ("th", "x", ...) and a display label used when
// rendering models ("θ", "x", ...).
class CoordinateSpace {
public:
    CoordinateSpace() = default;

    explicit CoordinateSpace(std::vector<std::string> names, std::vector<std::string> labels = {})
        : names_(std::move(names)), labels_(std::move(labels)) {
        if (names_.empty()) throw ConfigError("coordinate space needs at least one coordinate");
        if (labels_.empty()) labels_ = names_;
        if (labels_.size() != names_.size())
            throw ConfigError("coordinate labels must match coordinate names in count");
        for (std::size_t i = 0; i < names_.size(); ++i)
            for (std::size_t j = i + 1; j < names_.size(); ++j)
                if (names_[i] == names_[j]) throw ConfigError("duplicate coordinate name: " + names_[i]);
        // A name that equals another name plus a trailing 'd' would make the
        // velocity token of the latter ambiguous.
        for (const auto& a : names_)
            for (const auto& b : names_)
                if (a == b + "d") throw ConfigError("coordinate name '" + a + "' collides with velocity of '" + b + "'");
    }

    int size() const { return static_cast<int>(names_.size()); }
    const std::string& name(int i) const { return names_[static_cast<std::size_t>(i)]; }
    const std::string& label(int i) const { return labels_[static_cast<std::size_t>(i)]; }

    int index_of(const std::string& name) const {
        for (std::size_t i = 0; i < names_.size(); ++i)
            if (names_[i] == name) return static_cast<int>(i);
        return -1;
    }

    bool operator==(const CoordinateSpace& o) const { return names_ == o.names_; }

private:
    std::vector<std::string> names_;
    std::vector<std::string> labels_;
};

// Primitive factors an expression may contain: a coordinate, its velocity,
// or sine/cosine of a coordinate. Each coordinate i owns four atom slots.
enum class AtomKind : int { Q = 0, Qdot = 1, Sin = 2, Cos = 3 };

constexpr int kAtomsPerCoord = 4;

inline int atom_id(int coord, AtomKind kind) { return coord * kAtomsPerCoord + static_cast<int>(kind); }

// Differentiation variable: q_i or q̇_i.
struct Var {
    int coord = 0;
    bool dot = false;
};

namespace detail {

inline double pow_int(double x, int e) {
    double r = 1.0;
    while (e-- > 0) r *= x;
    return r;
}

}  // namespace detail

// A sparse polynomial over the atom set, kept in a canonical form (monomials
// sorted by exponent vector, like monomials merged, zero coefficients
// dropped). Library candidates are single monomials; sums only appear as
// results of differentiation. Closed under +, *, integer powers and partial
// derivatives with respect to any q_i or q̇_i, and evaluation is finite for
// any finite sample.
class CandidateExpr {
public:
    struct Monomial {
        double coeff = 0.0;
        std::vector<std::int8_t> exps;  // one entry per atom id
    };

    CandidateExpr() = default;

    static CandidateExpr constant(int ncoords, double value) {
        CandidateExpr e(ncoords);
        if (value != 0.0) {
            Monomial m;
            m.coeff = value;
            m.exps.assign(static_cast<std::size_t>(ncoords * kAtomsPerCoord), 0);
            e.terms_.push_back(std::move(m));
        }
        return e;
    }

    static CandidateExpr atom(int ncoords, int coord, AtomKind kind) {
        CandidateExpr e = constant(ncoords, 1.0);
        e.terms_[0].exps[static_cast<std::size_t>(atom_id(coord, kind))] = 1;
        return e;
    }

    static CandidateExpr coordinate(int ncoords, int i) { return atom(ncoords, i, AtomKind::Q); }
    static CandidateExpr velocity(int ncoords, int i) { return atom(ncoords, i, AtomKind::Qdot); }
    static CandidateExpr sin_of(int ncoords, int i) { return atom(ncoords, i, AtomKind::Sin); }
    static CandidateExpr cos_of(int ncoords, int i) { return atom(ncoords, i, AtomKind::Cos); }

    int ncoords() const { return ncoords_; }
    bool is_zero() const { return terms_.empty(); }
    const std::vector<Monomial>& monomials() const { return terms_; }

    // Key identifying a single-monomial expression up to its coefficient.
    std::vector<std::int8_t> monomial_key() const {
        if (terms_.size() != 1) throw ConfigError("expression is not a single product term");
        return terms_[0].exps;
    }

    int degree() const {
        int d = 0;
        for (const auto& m : terms_) {
            int md = 0;
            for (auto e : m.exps) md += e;
            d = std::max(d, md);
        }
        return d;
    }

    CandidateExpr operator+(const CandidateExpr& o) const {
        check_same_space(o);
        CandidateExpr r(ncoords_);
        r.terms_ = terms_;
        r.terms_.insert(r.terms_.end(), o.terms_.begin(), o.terms_.end());
        r.normalize();
        return r;
    }

    CandidateExpr operator-(const CandidateExpr& o) const { return *this + (o * -1.0); }

    CandidateExpr operator*(const CandidateExpr& o) const {
        check_same_space(o);
        CandidateExpr r(ncoords_);
        r.terms_.reserve(terms_.size() * o.terms_.size());
        for (const auto& a : terms_)
            for (const auto& b : o.terms_) {
                Monomial m;
                m.coeff = a.coeff * b.coeff;
                m.exps.resize(a.exps.size());
                for (std::size_t k = 0; k < a.exps.size(); ++k)
                    m.exps[k] = static_cast<std::int8_t>(a.exps[k] + b.exps[k]);
                r.terms_.push_back(std::move(m));
            }
        r.normalize();
        return r;
    }

    CandidateExpr operator*(double s) const {
        CandidateExpr r = *this;
        for (auto& m : r.terms_) m.coeff *= s;
        r.normalize();
        return r;
    }

    CandidateExpr pow(int e) const {
        if (e < 1) throw ConfigError("power must be a positive integer");
        CandidateExpr r = *this;
        for (int i = 1; i < e; ++i) r = r * (*this);
        return r;
    }

    // Exact partial derivative with respect to q_i or q̇_i.
    CandidateExpr diff(Var v) const {
        if (v.coord < 0 || v.coord >= ncoords_) throw ConfigError("derivative variable outside coordinate space");
        CandidateExpr r(ncoords_);
        const int qa = atom_id(v.coord, AtomKind::Q);
        const int da = atom_id(v.coord, AtomKind::Qdot);
        const int sa = atom_id(v.coord, AtomKind::Sin);
        const int ca = atom_id(v.coord, AtomKind::Cos);
        for (const auto& m : terms_) {
            if (v.dot) {
                const int e = m.exps[static_cast<std::size_t>(da)];
                if (e > 0) r.terms_.push_back(step_down(m, da, e, 1.0));
            } else {
                const int eq = m.exps[static_cast<std::size_t>(qa)];
                const int es = m.exps[static_cast<std::size_t>(sa)];
                const int ec = m.exps[static_cast<std::size_t>(ca)];
                if (eq > 0) r.terms_.push_back(step_down(m, qa, eq, 1.0));
                if (es > 0) {  // d/dq sin^e = e sin^(e-1) cos
                    Monomial t = step_down(m, sa, es, 1.0);
                    t.exps[static_cast<std::size_t>(ca)] = static_cast<std::int8_t>(t.exps[static_cast<std::size_t>(ca)] + 1);
                    r.terms_.push_back(std::move(t));
                }
                if (ec > 0) {  // d/dq cos^e = -e cos^(e-1) sin
                    Monomial t = step_down(m, ca, ec, -1.0);
                    t.exps[static_cast<std::size_t>(sa)] = static_cast<std::int8_t>(t.exps[static_cast<std::size_t>(sa)] + 1);
                    r.terms_.push_back(std::move(t));
                }
            }
        }
        r.normalize();
        return r;
    }

    // Fills vals[] with the atom values for a sample; vals must hold
    // ncoords * kAtomsPerCoord entries.
    static void atom_values(const Eigen::VectorXd& q, const Eigen::VectorXd& qd, double* vals) {
        for (int i = 0; i < q.size(); ++i) {
            vals[atom_id(i, AtomKind::Q)] = q[i];
            vals[atom_id(i, AtomKind::Qdot)] = qd[i];
            vals[atom_id(i, AtomKind::Sin)] = std::sin(q[i]);
            vals[atom_id(i, AtomKind::Cos)] = std::cos(q[i]);
        }
    }

    double evaluate_atoms(const double* vals) const {
        double sum = 0.0;
        for (const auto& m : terms_) {
            double v = m.coeff;
            for (std::size_t a = 0; a < m.exps.size(); ++a)
                if (m.exps[a]) v *= detail::pow_int(vals[a], m.exps[a]);
            sum += v;
        }
        return sum;
    }

    double evaluate(const Eigen::VectorXd& q, const Eigen::VectorXd& qd) const {
        if (q.size() != ncoords_ || qd.size() != ncoords_)
            throw ConfigError("sample dimension does not match coordinate space");
        double vals[64];
        atom_values(q, qd, vals);
        return evaluate_atoms(vals);
    }

    // Canonical identifier, e.g. "thd^2" or "xd*thd*cos(th)" factors ordered
    // by atom id. Multi-monomial expressions list monomials joined by " + ".
    std::string to_string(const CoordinateSpace& space) const {
        if (terms_.empty()) return "0";
        std::string out;
        for (std::size_t t = 0; t < terms_.size(); ++t) {
            if (t > 0) out += " + ";
            out += monomial_string(terms_[t], space, /*pretty=*/false);
        }
        return out;
    }

    // Display form using coordinate labels, e.g. "θ̇²" or "ẋ·θ̇·cos(θ)".
    std::string render(const CoordinateSpace& space) const {
        if (terms_.empty()) return "0";
        std::string out;
        for (std::size_t t = 0; t < terms_.size(); ++t) {
            if (t > 0) out += " + ";
            out += monomial_string(terms_[t], space, /*pretty=*/true);
        }
        return out;
    }

    bool operator==(const CandidateExpr& o) const {
        if (ncoords_ != o.ncoords_ || terms_.size() != o.terms_.size()) return false;
        for (std::size_t i = 0; i < terms_.size(); ++i)
            if (terms_[i].coeff != o.terms_[i].coeff || terms_[i].exps != o.terms_[i].exps) return false;
        return true;
    }

private:
    explicit CandidateExpr(int ncoords) : ncoords_(ncoords) {
        if (ncoords < 1 || ncoords * kAtomsPerCoord > 64)
            throw ConfigError("unsupported coordinate count");
    }

    void check_same_space(const CandidateExpr& o) const {
        if (ncoords_ != o.ncoords_) throw ConfigError("expressions over different coordinate spaces");
    }

    static Monomial step_down(const Monomial& m, int a, int e, double sign) {
        Monomial t = m;
        t.coeff = m.coeff * sign * static_cast<double>(e);
        t.exps[static_cast<std::size_t>(a)] = static_cast<std::int8_t>(e - 1);
        return t;
    }

    void normalize() {
        std::sort(terms_.begin(), terms_.end(),
                  [](const Monomial& a, const Monomial& b) { return a.exps < b.exps; });
        std::vector<Monomial> merged;
        for (auto& m : terms_) {
            if (!merged.empty() && merged.back().exps == m.exps)
                merged.back().coeff += m.coeff;
            else
                merged.push_back(std::move(m));
        }
        merged.erase(std::remove_if(merged.begin(), merged.end(),
                                    [](const Monomial& m) { return m.coeff == 0.0; }),
                     merged.end());
        terms_ = std::move(merged);
    }

    static std::string superscript(int e) {
        static const char* digits[] = {"⁰", "¹", "²", "³", "⁴", "⁵", "⁶", "⁷", "⁸", "⁹"};
        if (e >= 2 && e <= 9) return digits[e];
        return "^" + std::to_string(e);
    }

    static std::string monomial_string(const Monomial& m, const CoordinateSpace& space, bool pretty) {
        std::vector<std::string> factors;
        // coordinates and velocities first, trig factors last
        static constexpr AtomKind order[] = {AtomKind::Q, AtomKind::Qdot, AtomKind::Sin, AtomKind::Cos};
        for (int pass = 0; pass < 2; ++pass) {
            for (int i = 0; i < space.size(); ++i) {
                for (int kk = 2 * pass; kk < 2 * pass + 2; ++kk) {
                    const int k = static_cast<int>(order[kk]);
                    const int e = m.exps[static_cast<std::size_t>(atom_id(i, static_cast<AtomKind>(k)))];
                    if (e == 0) continue;
                    std::string base;
                    const std::string& id = pretty ? space.label(i) : space.name(i);
                    switch (static_cast<AtomKind>(k)) {
                        case AtomKind::Q: base = id; break;
                        case AtomKind::Qdot: base = pretty ? id + "̇" : id + "d"; break;
                        case AtomKind::Sin: base = "sin(" + id + ")"; break;
                        case AtomKind::Cos: base = "cos(" + id + ")"; break;
                    }
                    if (e > 1) base += pretty ? superscript(e) : "^" + std::to_string(e);
                    factors.push_back(std::move(base));
                }
            }
        }
        std::string body;
        for (std::size_t f = 0; f < factors.size(); ++f) {
            if (f > 0) body += pretty ? "·" : "*";
            body += factors[f];
        }
        if (factors.empty()) return format_coeff(m.coeff);
        if (m.coeff == 1.0) return body;
        if (m.coeff == -1.0) return "-" + body;
        return format_coeff(m.coeff) + (pretty ? "·" : "*") + body;
    }

    static std::string format_coeff(double c) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%g", c);
        return buf;
    }

    int ncoords_ = 0;
    std::vector<Monomial> terms_;
};

inline CandidateExpr operator*(double s, const CandidateExpr& e) { return e * s; }

// Numeric value of an expression at a sample; throws on dimension mismatch.
inline double evaluate(const CandidateExpr& expr, const Eigen::VectorXd& q, const Eigen::VectorXd& qd) {
    return expr.evaluate(q, qd);
}

inline CandidateExpr diff(const CandidateExpr& expr, Var v) { return expr.diff(v); }

// Parses a product term like "thd^2", "cos(th)" or "xd*thd*cos(th)" against
// the coordinate space. Velocity tokens are the coordinate name with a 'd'
// suffix.
inline CandidateExpr parse_term(const CoordinateSpace& space, const std::string& text) {
    const int n = space.size();
    CandidateExpr result = CandidateExpr::constant(n, 1.0);
    std::size_t pos = 0;
    auto skip_ws = [&] { while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos; };
    bool first = true;
    while (true) {
        skip_ws();
        if (pos >= text.size()) {
            if (first) throw ParseError("empty term");
            break;
        }
        if (!first) {
            if (text[pos] != '*') throw ParseError("expected '*' in term '" + text + "'");
            ++pos;
            skip_ws();
        }
        first = false;
        std::size_t start = pos;
        while (pos < text.size() && (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_')) ++pos;
        std::string word = text.substr(start, pos - start);
        if (word.empty()) throw ParseError("unexpected character in term '" + text + "'");
        CandidateExpr factor = CandidateExpr::constant(n, 1.0);
        if ((word == "sin" || word == "cos") && pos < text.size() && text[pos] == '(') {
            ++pos;
            std::size_t arg_start = pos;
            while (pos < text.size() && text[pos] != ')') ++pos;
            if (pos >= text.size()) throw ParseError("missing ')' in term '" + text + "'");
            std::string arg = text.substr(arg_start, pos - arg_start);
            ++pos;
            const int ci = space.index_of(arg);
            if (ci < 0) throw ParseError("unknown coordinate '" + arg + "' in term '" + text + "'");
            factor = word == "sin" ? CandidateExpr::sin_of(n, ci) : CandidateExpr::cos_of(n, ci);
        } else {
            int ci = space.index_of(word);
            if (ci >= 0) {
                factor = CandidateExpr::coordinate(n, ci);
            } else if (word.size() > 1 && word.back() == 'd' &&
                       (ci = space.index_of(word.substr(0, word.size() - 1))) >= 0) {
                factor = CandidateExpr::velocity(n, ci);
            } else {
                throw ParseError("unknown symbol '" + word + "' in term '" + text + "'");
            }
        }
        skip_ws();
        int e = 1;
        if (pos < text.size() && text[pos] == '^') {
            ++pos;
            skip_ws();
            std::size_t d_start = pos;
            while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
            if (pos == d_start) throw ParseError("missing exponent in term '" + text + "'");
            e = std::stoi(text.substr(d_start, pos - d_start));
            if (e < 1) throw ParseError("exponent must be positive in term '" + text + "'");
        }
        result = result * factor.pow(e);
    }
    return result;
}

}  // namespace lagrangia
