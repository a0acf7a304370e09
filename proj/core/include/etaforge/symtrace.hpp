#pragma once

#include "etaforge/errors.hpp"

#include <array>
#include <map>
#include <string>

namespace etaforge::sym {

// Exact rational p/q, always normalized: q > 0, gcd(|p|, q) = 1.
struct Rational {
    long long num = 0;
    long long den = 1;

    Rational() = default;
    Rational(long long n) : num(n) {}
    Rational(long long n, long long d);

    bool is_zero() const { return num == 0; }
    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
    std::string str() const;

    Rational operator-() const;
    friend Rational operator+(const Rational&, const Rational&);
    friend Rational operator-(const Rational&, const Rational&);
    friend Rational operator*(const Rational&, const Rational&);
    friend Rational operator/(const Rational&, const Rational&);
    friend bool operator==(const Rational&, const Rational&) = default;
    friend bool operator<(const Rational&, const Rational&);
};

// Element of Q(i).
struct Coeff {
    Rational re;
    Rational im;

    Coeff() = default;
    Coeff(Rational r) : re(r) {}
    Coeff(Rational r, Rational i) : re(r), im(i) {}
    static Coeff unit_i() { return {Rational(0), Rational(1)}; }

    bool is_zero() const { return re.is_zero() && im.is_zero(); }
    Coeff inverse() const;

    Coeff operator-() const { return {-re, -im}; }
    friend Coeff operator+(const Coeff&, const Coeff&);
    friend Coeff operator-(const Coeff&, const Coeff&);
    friend Coeff operator*(const Coeff&, const Coeff&);
    friend bool operator==(const Coeff&, const Coeff&) = default;
};

// One word of the calculus:
//   t^t_pow * l^l_pow * [b^b_pow qi^(-q_pow) E(alpha)] * d? * [b^rb_pow qi^(-rq_pow) E(ralpha)]
// t and l are scalars; b, q and E(a) = e^{-a t^2 q} commute with each other but
// not with d, so the word splits into commuting halves around the optional d.
// Canonical form: q exponents are never positive (positive powers expand through
// q = l^2 + b^2), and any half holding a negative q power carries at most one b.
struct Monomial {
    int t_pow = 0;
    int l_pow = 0;
    int b_pow = 0;
    int q_pow = 0;
    Rational alpha;
    bool d_flag = false;
    int rb_pow = 0;
    int rq_pow = 0;
    Rational ralpha;

    friend bool operator==(const Monomial&, const Monomial&) = default;
    friend bool operator<(const Monomial&, const Monomial&);
};

class TraceExpr {
public:
    TraceExpr() = default;

    static TraceExpr zero() { return {}; }
    static TraceExpr one() { return constant(Coeff(Rational(1))); }
    static TraceExpr constant(const Coeff& c);
    static TraceExpr atom_t();
    static TraceExpr atom_l();
    static TraceExpr atom_b();
    static TraceExpr atom_q();
    static TraceExpr atom_qi();
    static TraceExpr atom_d();
    static TraceExpr heat(const Rational& alpha); // E(alpha)

    bool is_zero() const { return terms_.empty(); }
    std::size_t term_count() const { return terms_.size(); }
    const std::map<Monomial, Coeff>& terms() const { return terms_; }

    TraceExpr pow(int k) const;
    std::string print() const;

    friend TraceExpr operator+(const TraceExpr&, const TraceExpr&);
    friend TraceExpr operator-(const TraceExpr&, const TraceExpr&);
    friend TraceExpr operator*(const TraceExpr&, const TraceExpr&);
    TraceExpr operator-() const;
    friend bool operator==(const TraceExpr&, const TraceExpr&) = default;

private:
    std::map<Monomial, Coeff> terms_;

    static void add_canonical(std::map<Monomial, Coeff>& acc, Monomial m, Coeff c);
    friend TraceExpr parse_expr(const std::string&);
    friend TraceExpr trace_normalize(const TraceExpr&);
    friend TraceExpr differentiate(const TraceExpr&, char);
};

TraceExpr parse_expr(const std::string& text);

// Rotates the single d factor of every word to the rightmost position by
// cyclicity; the two commuting halves merge. Idempotent and linear.
TraceExpr trace_normalize(const TraceExpr& e);

// Formal derivative in 't' or 'l' of a d-free expression, with the l-derivative
// of b contributing a d factor in place. Throws AlreadyHasD otherwise.
TraceExpr differentiate(const TraceExpr& e, char var);

using RMatrix = std::array<std::array<TraceExpr, 2>, 2>;

// 2x2 idempotent family r(t, l) over the calculus; r*r = r canonically.
RMatrix build_r_symbolic();

// The closed form -2*i*t*E(1)*(b - l*d) that the commutator trace reduces to.
TraceExpr eqfe_reduced_form();

// Expands trace([d_t r, r] * d_l r) - eqfe_reduced_form() and returns the
// canonical residual (the zero expression). Throws NonzeroResidual otherwise,
// with the offending terms in the message.
TraceExpr verify_eqfe();
TraceExpr verify_eqfe(const TraceExpr& expected);

} // namespace etaforge::sym
