#include "doctest.h"
#include "test_util.hpp"

#include "etaforge/bcyl.hpp"
#include "etaforge/errors.hpp"
#include "etaforge/symtrace.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

using namespace etaforge;
using testutil::check_close;

namespace {

// Numeric substitution: b -> Hermitian B, d -> D, the trace twisted by a
// unitary U commuting with both.
struct Subst {
    double t = 0.7;
    double l = 0.8;
    Matrix b;
    Matrix d;
    Matrix u;
};

Subst block_subst(std::uint64_t seed, bool hermitian_d) {
    Rng rng(seed);
    Subst s;
    s.b = Matrix::Zero(4, 4);
    s.b.topLeftCorner(2, 2) = random_hermitian(rng, 2);
    s.b.bottomRightCorner(2, 2) = random_hermitian(rng, 2);
    s.d = Matrix::Zero(4, 4);
    s.d.topLeftCorner(2, 2) =
        hermitian_d ? random_hermitian(rng, 2) : random_matrix(rng, 2, 2);
    s.d.bottomRightCorner(2, 2) =
        hermitian_d ? random_hermitian(rng, 2) : random_matrix(rng, 2, 2);
    s.u = Matrix::Zero(4, 4);
    s.u.topLeftCorner(2, 2) = std::polar(1.0, 0.9) * Matrix::Identity(2, 2);
    s.u.bottomRightCorner(2, 2) = std::polar(1.0, -1.7) * Matrix::Identity(2, 2);
    s.t = 0.5 + 0.04 * static_cast<double>(seed % 7);
    s.l = 0.7 + 0.03 * static_cast<double>(seed % 5);
    return s;
}

Matrix side_matrix(const Subst& s, int b_pow, int q_pow, const sym::Rational& alpha) {
    const Eigen::Index n = s.b.rows();
    Matrix out = Matrix::Identity(n, n);
    for (int i = 0; i < b_pow; ++i)
        out = out * s.b;
    if (q_pow != 0 || !alpha.is_zero()) {
        const Matrix qmat = s.l * s.l * Matrix::Identity(n, n) + s.b * s.b;
        const HermEig eig = herm_eig(qmat);
        if (q_pow != 0)
            out = out * herm_apply(eig, [q_pow](double x) {
                      return std::pow(x, static_cast<double>(q_pow));
                  });
        if (!alpha.is_zero()) {
            const double a = alpha.to_double();
            const double tt = s.t * s.t;
            out = out * herm_apply(eig, [a, tt](double x) { return std::exp(-a * tt * x); });
        }
    }
    return out;
}

Matrix eval_matrix(const sym::TraceExpr& e, const Subst& s) {
    const Eigen::Index n = s.b.rows();
    Matrix acc = Matrix::Zero(n, n);
    for (const auto& [m, c] : e.terms()) {
        Complex coeff(c.re.to_double(), c.im.to_double());
        coeff *= std::pow(s.t, m.t_pow) * std::pow(s.l, m.l_pow);
        Matrix x = side_matrix(s, m.b_pow, m.q_pow, m.alpha);
        if (m.d_flag)
            x = x * s.d * side_matrix(s, m.rb_pow, m.rq_pow, m.ralpha);
        acc += coeff * x;
    }
    return acc;
}

Complex tau(const sym::TraceExpr& e, const Subst& s) {
    return (s.u * eval_matrix(e, s)).trace();
}

struct SignedWord {
    int sign = 1;
    std::vector<sym::TraceExpr> factors;
};

// Random well-formed expression: a sum of short words, at most one d per word.
sym::TraceExpr random_expr(std::mt19937& gen, bool allow_d,
                           std::vector<SignedWord>* words_out = nullptr) {
    using sym::Rational;
    using sym::TraceExpr;
    const std::vector<TraceExpr> pool = {
        TraceExpr::atom_t(),
        TraceExpr::atom_l(),
        TraceExpr::atom_b(),
        TraceExpr::atom_q(),
        TraceExpr::atom_qi(),
        TraceExpr::heat(Rational(1, 2)),
        TraceExpr::heat(Rational(1)),
        TraceExpr::atom_t().pow(-1),
        TraceExpr::constant({Rational(1, 2), Rational(0)}),
        TraceExpr::constant({Rational(-2), Rational(1)}),
    };
    std::uniform_int_distribution<int> n_terms(2, 4);
    std::uniform_int_distribution<int> n_factors(1, 3);
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    std::uniform_int_distribution<int> coin(0, 1);

    TraceExpr out;
    const int terms = n_terms(gen);
    for (int k = 0; k < terms; ++k) {
        std::vector<TraceExpr> factors;
        const int nf = n_factors(gen);
        for (int j = 0; j < nf; ++j)
            factors.push_back(pool[pick(gen)]);
        if (allow_d && coin(gen)) {
            std::uniform_int_distribution<std::size_t> at(0, factors.size());
            factors.insert(factors.begin() + static_cast<std::ptrdiff_t>(at(gen)),
                           sym::TraceExpr::atom_d());
        }
        TraceExpr term = TraceExpr::one();
        for (const auto& f : factors)
            term = term * f;
        const int sign = (coin(gen) != 0) ? 1 : -1;
        out = (sign > 0) ? out + term : out - term;
        if (words_out)
            words_out->push_back({sign, std::move(factors)});
    }
    return out;
}

// Multiply a factor sequence in a random association order (the sequence
// itself is fixed: d does not commute).
sym::TraceExpr random_association(const std::vector<sym::TraceExpr>& f, std::size_t lo,
                                  std::size_t hi, std::mt19937& gen) {
    if (lo + 1 == hi)
        return f[lo];
    std::uniform_int_distribution<std::size_t> cut(lo + 1, hi - 1);
    const std::size_t mid = cut(gen);
    return random_association(f, lo, mid, gen) * random_association(f, mid, hi, gen);
}

} // namespace

TEST_SUITE("symtrace") {

TEST_CASE("parser canonicalizes the localization fragment") {
    using sym::parse_expr;
    CHECK(parse_expr("E(1/2)*E(1/2)") == parse_expr("E(1)"));
    CHECK(parse_expr("q*qi") == sym::TraceExpr::one());
    CHECK(parse_expr("q") == parse_expr("l^2 + b^2"));
    CHECK(parse_expr("qi*(l^2+b^2)") == sym::TraceExpr::one());
    CHECK(parse_expr("qi*b^4") == parse_expr("b^2 - l^2 + l^4*qi"));
    CHECK(parse_expr("t^-2*q^2") ==
          parse_expr("t^-2*l^4 + 2*t^-2*l^2*b^2 + t^-2*b^4"));
    CHECK(parse_expr("qi^-1") == parse_expr("l^2+b^2"));
    CHECK(parse_expr("E(1/2)^-3") == sym::TraceExpr::heat({-3, 2}));
    CHECK(parse_expr("(2*i)^-1") == parse_expr("-1/2*i"));
    CHECK(parse_expr("E(1) - E(1)") == sym::TraceExpr::zero());
    CHECK(parse_expr("E(0)") == sym::TraceExpr::one());

    const sym::TraceExpr mixed = parse_expr("b*d + d*b");
    CHECK(mixed.term_count() == 2);
    const sym::TraceExpr normal = trace_normalize(mixed);
    CHECK(normal == parse_expr("2*b*d"));
    CHECK(normal.term_count() == 1);
}

TEST_CASE("parser rejects malformed input with positions") {
    using sym::parse_expr;
    CHECK_THROWS_AS(parse_expr("E(1/2"), SyntaxError);
    CHECK_THROWS_AS(parse_expr("b^-1"), SyntaxError);
    CHECK_THROWS_AS(parse_expr("l^-2"), SyntaxError);
    CHECK_THROWS_AS(parse_expr("(b+l)^-1"), SyntaxError);
    CHECK_THROWS_AS(parse_expr("x+1"), SyntaxError);
    CHECK_THROWS_AS(parse_expr(""), SyntaxError);
    CHECK_THROWS_AS(parse_expr("q*"), SyntaxError);
    CHECK_THROWS_AS(parse_expr("(b"), SyntaxError);
    CHECK_THROWS_AS(parse_expr("1)"), SyntaxError);
    CHECK_THROWS_AS(parse_expr("2/0"), SyntaxError);

    try {
        parse_expr("b + y");
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
        CHECK(e.pos == 4);
    }

    CHECK_THROWS_AS(parse_expr("d*d"), TwoDFactors);
    CHECK_THROWS_AS(parse_expr("d*b*d"), TwoDFactors);
    CHECK_THROWS_AS(parse_expr("d^2"), TwoDFactors);
    CHECK_THROWS_AS(parse_expr("(1+d)^2"), TwoDFactors);
}

TEST_CASE("print and parse are inverse on canonical forms") {
    using sym::parse_expr;
    CHECK(sym::TraceExpr::zero().print() == "0");
    CHECK(parse_expr("0") == sym::TraceExpr::zero());

    std::vector<sym::TraceExpr> corpus;
    const sym::RMatrix r = sym::build_r_symbolic();
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            corpus.push_back(r[i][j]);
            corpus.push_back(differentiate(r[i][j], 't'));
            corpus.push_back(differentiate(r[i][j], 'l'));
        }
    }
    corpus.push_back(sym::eqfe_reduced_form());
    std::mt19937 gen(2024);
    for (int k = 0; k < 30; ++k)
        corpus.push_back(random_expr(gen, true));

    for (const auto& e : corpus) {
        CAPTURE(e.print());
        CHECK(parse_expr(e.print()) == e);
    }
}

TEST_CASE("trace normalization is idempotent and trace-faithful") {
    std::mt19937 gen(7);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const sym::TraceExpr e = random_expr(gen, true);
        const sym::TraceExpr n1 = trace_normalize(e);
        CHECK(trace_normalize(n1) == n1);

        const Subst s = block_subst(100 + seed, false);
        const Complex before = tau(e, s);
        const Complex after = tau(n1, s);
        CHECK(std::abs(before - after) <= 1e-10 * (1.0 + std::abs(before)));
    }
}

TEST_CASE("differentiation follows the displayed rules") {
    using sym::parse_expr;
    CHECK(differentiate(parse_expr("E(1)"), 't') == parse_expr("-2*t*q*E(1)"));
    CHECK(differentiate(parse_expr("q"), 'l') == parse_expr("2*l + 2*b*d"));
    CHECK(differentiate(parse_expr("b*E(1)"), 'l') ==
          parse_expr("d*E(1) - t^2*b*E(1)*(2*l+2*b*d)"));
    CHECK(differentiate(parse_expr("t^3"), 't') == parse_expr("3*t^2"));
    CHECK(differentiate(parse_expr("t^-1"), 't') == parse_expr("-1*t^-2"));
    CHECK(differentiate(parse_expr("l^2"), 'l') == parse_expr("2*l"));
    CHECK(differentiate(parse_expr("5"), 't') == sym::TraceExpr::zero());
    CHECK_THROWS_AS(differentiate(parse_expr("b*d"), 'l'), AlreadyHasD);
}

TEST_CASE("derivatives match the substituted finite difference") {
    std::mt19937 gen(41);
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const sym::TraceExpr e = random_expr(gen, false);
        const Subst s0 = block_subst(300 + seed, true);

        const sym::TraceExpr dl = differentiate(e, 'l');
        const Complex exact_l = tau(dl, s0);
        const auto tau_at_l = [&](double lam) {
            Subst s = s0;
            s.b = s0.b + (lam - s0.l) * s0.d;
            s.l = lam;
            return tau(e, s);
        };
        const double h = 1e-3;
        const auto fd_l = [&](double step) {
            return (tau_at_l(s0.l + step) - tau_at_l(s0.l - step)) / (2.0 * step);
        };
        const Complex rich_l = (4.0 * fd_l(h / 2) - fd_l(h)) / 3.0;
        CHECK(std::abs(exact_l - rich_l) <= 1e-8 * (1.0 + std::abs(exact_l)));

        const sym::TraceExpr dt = differentiate(e, 't');
        const Complex exact_t = tau(dt, s0);
        const auto tau_at_t = [&](double tv) {
            Subst s = s0;
            s.t = tv;
            return tau(e, s);
        };
        const auto fd_t = [&](double step) {
            return (tau_at_t(s0.t + step) - tau_at_t(s0.t - step)) / (2.0 * step);
        };
        const Complex rich_t = (4.0 * fd_t(h / 2) - fd_t(h)) / 3.0;
        CHECK(std::abs(exact_t - rich_t) <= 1e-8 * (1.0 + std::abs(exact_t)));
    }
}

TEST_CASE("symbolic family is idempotent") {
    const sym::RMatrix r = sym::build_r_symbolic();
    CHECK(r[0][0] == sym::parse_expr("E(1)"));
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            const sym::TraceExpr rr =
                r[i][0] * r[0][j] + r[i][1] * r[1][j];
            CAPTURE(i);
            CAPTURE(j);
            CHECK(rr == r[i][j]);
        }
    }

    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Subst s = block_subst(500 + seed, false);
        const Eigen::Index n = s.b.rows();
        Matrix big = Matrix::Zero(2 * n, 2 * n);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                big.block(i * n, j * n, n, n) = eval_matrix(r[i][j], s);
        CHECK(op_norm(big * big - big) <= 1e-10);
        const Complex tr = tau(r[0][0], s) + tau(r[1][1], s);
        check_close(tr, Complex(s.u.trace()), 1e-12);
    }
}

TEST_CASE("eqfe verifies symbolically and fails under mutation") {
    const sym::TraceExpr residual = sym::verify_eqfe();
    CHECK(residual.is_zero());
    CHECK(residual.term_count() == 0);

    const sym::TraceExpr mutated = sym::parse_expr("-2*t*E(1)*b + 2*t*l*E(1)*d");
    CHECK_THROWS_AS(sym::verify_eqfe(mutated), NonzeroResidual);
    try {
        sym::verify_eqfe(mutated);
    } catch (const NonzeroResidual& e) {
        CHECK(std::string(e.what()).find("terms") != std::string::npos);
    }
}

TEST_CASE("reduced form agrees with the numeric boundary route") {
    Matrix dmat = Matrix::Zero(2, 2);
    dmat(0, 0) = 1.0;
    dmat(1, 1) = -1.0;
    dmat(0, 1) = 0.3;
    dmat(1, 0) = 0.3;
    Matrix cmat = Matrix::Zero(2, 2);
    cmat(0, 0) = 0.5;
    cmat(1, 1) = -0.1;
    cmat(0, 1) = 0.2;
    cmat(1, 0) = 0.2;
    const auto model = build_group_model({Matrix::Identity(2, 2)}, 0);
    const IndicialData ind = make_indicial(dmat, cmat, make_profile(1.0), model);

    const double t = 0.9;
    const double lambda = 0.6;
    Subst s;
    s.t = t;
    s.l = lambda;
    s.b = ind.b(lambda);
    s.d = ind.db(lambda);
    s.u = Matrix::Identity(2, 2);

    const Complex symbolic = tau(sym::eqfe_reduced_form(), s);
    const EqfeResult numeric = eqfe_check(ind, model, t, lambda);
    check_close(symbolic, numeric.rhs, 1e-12);
    check_close(symbolic, numeric.lhs, 1e-9);
}

TEST_CASE("canonicalization is independent of construction order") {
    std::mt19937 gen(11);
    for (int k = 0; k < 200; ++k) {
        std::vector<SignedWord> words;
        const sym::TraceExpr reference = random_expr(gen, true, &words);

        // Rebuild the same sum with the terms added in a shuffled order and
        // each word multiplied in a random association order (the factor
        // sequence is fixed: d does not commute).
        std::vector<std::size_t> order(words.size());
        for (std::size_t i = 0; i < order.size(); ++i)
            order[i] = i;
        std::shuffle(order.begin(), order.end(), gen);

        sym::TraceExpr reassembled;
        for (const std::size_t i : order) {
            const sym::TraceExpr term =
                random_association(words[i].factors, 0, words[i].factors.size(), gen);
            reassembled = (words[i].sign > 0) ? reassembled + term : reassembled - term;
        }
        CAPTURE(reference.print());
        CHECK(reassembled == reference);
        CHECK(reassembled.print() == reference.print());
    }
}

} // TEST_SUITE
