#include "etaforge/symtrace.hpp"

#include <cctype>
#include <numeric>
#include <tuple>
#include <utility>
#include <vector>

namespace etaforge::sym {

namespace {

long long checked_ll(__int128 v, const char* who) {
    if (v > static_cast<__int128>(9223372036854775807LL) ||
        v < -static_cast<__int128>(9223372036854775807LL))
        throw Error(std::string(who) + ": rational overflow");
    return static_cast<long long>(v);
}

long long binom(int n, int k) {
    long long r = 1;
    for (int i = 1; i <= k; ++i)
        r = r * (n - k + i) / i;
    return r;
}

} // namespace

Rational::Rational(long long n, long long d) {
    if (d == 0)
        throw Error("Rational: zero denominator");
    if (d < 0) {
        n = -n;
        d = -d;
    }
    const long long g = std::gcd(n < 0 ? -n : n, d);
    num = g ? n / g : n;
    den = g ? d / g : 1;
}

std::string Rational::str() const {
    std::string s = std::to_string(num);
    if (den != 1)
        s += "/" + std::to_string(den);
    return s;
}

Rational Rational::operator-() const {
    Rational r;
    r.num = -num;
    r.den = den;
    return r;
}

Rational operator+(const Rational& a, const Rational& b) {
    const __int128 n = static_cast<__int128>(a.num) * b.den + static_cast<__int128>(b.num) * a.den;
    const __int128 d = static_cast<__int128>(a.den) * b.den;
    return {checked_ll(n, "add"), checked_ll(d, "add")};
}

Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }

Rational operator*(const Rational& a, const Rational& b) {
    const __int128 n = static_cast<__int128>(a.num) * b.num;
    const __int128 d = static_cast<__int128>(a.den) * b.den;
    return {checked_ll(n, "mul"), checked_ll(d, "mul")};
}

Rational operator/(const Rational& a, const Rational& b) {
    if (b.is_zero())
        throw Error("Rational: division by zero");
    return a * Rational(b.den, b.num);
}

bool operator<(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
}

Coeff Coeff::inverse() const {
    if (is_zero())
        throw Error("Coeff: division by zero");
    const Rational n2 = re * re + im * im;
    return {re / n2, -im / n2};
}

Coeff operator+(const Coeff& a, const Coeff& b) { return {a.re + b.re, a.im + b.im}; }
Coeff operator-(const Coeff& a, const Coeff& b) { return {a.re - b.re, a.im - b.im}; }
Coeff operator*(const Coeff& a, const Coeff& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
}

bool operator<(const Monomial& a, const Monomial& b) {
    const auto key = [](const Monomial& m) {
        return std::tie(m.t_pow, m.l_pow, m.b_pow, m.q_pow, m.alpha, m.d_flag, m.rb_pow,
                        m.rq_pow, m.ralpha);
    };
    return key(a) < key(b);
}

void TraceExpr::add_canonical(std::map<Monomial, Coeff>& acc, Monomial m, Coeff c) {
    if (c.is_zero())
        return;
    if (m.q_pow > 0) {
        if (m.q_pow > 30)
            throw TermCapExceeded("add_canonical: q power too large to expand");
        const int k = m.q_pow;
        for (int j = 0; j <= k; ++j) {
            Monomial e = m;
            e.q_pow = 0;
            e.l_pow += 2 * j;
            e.b_pow += 2 * (k - j);
            add_canonical(acc, e, c * Coeff(Rational(binom(k, j))));
        }
        return;
    }
    if (m.rq_pow > 0) {
        if (m.rq_pow > 30)
            throw TermCapExceeded("add_canonical: q power too large to expand");
        const int k = m.rq_pow;
        for (int j = 0; j <= k; ++j) {
            Monomial e = m;
            e.rq_pow = 0;
            e.l_pow += 2 * j;
            e.rb_pow += 2 * (k - j);
            add_canonical(acc, e, c * Coeff(Rational(binom(k, j))));
        }
        return;
    }
    // b^2 * qi = 1 - l^2 * qi, applied until the q-carrying half holds at most one b.
    if (m.q_pow < 0 && m.b_pow >= 2) {
        Monomial e1 = m;
        e1.b_pow -= 2;
        e1.q_pow += 1;
        add_canonical(acc, e1, c);
        Monomial e2 = m;
        e2.b_pow -= 2;
        e2.l_pow += 2;
        add_canonical(acc, e2, -c);
        return;
    }
    if (m.rq_pow < 0 && m.rb_pow >= 2) {
        Monomial e1 = m;
        e1.rb_pow -= 2;
        e1.rq_pow += 1;
        add_canonical(acc, e1, c);
        Monomial e2 = m;
        e2.rb_pow -= 2;
        e2.l_pow += 2;
        add_canonical(acc, e2, -c);
        return;
    }
    auto it = acc.find(m);
    if (it == acc.end()) {
        acc.emplace(std::move(m), c);
    } else {
        it->second = it->second + c;
        if (it->second.is_zero())
            acc.erase(it);
    }
}

TraceExpr TraceExpr::constant(const Coeff& c) {
    TraceExpr e;
    add_canonical(e.terms_, Monomial{}, c);
    return e;
}

TraceExpr TraceExpr::atom_t() {
    TraceExpr e;
    Monomial m;
    m.t_pow = 1;
    add_canonical(e.terms_, m, Coeff(Rational(1)));
    return e;
}

TraceExpr TraceExpr::atom_l() {
    TraceExpr e;
    Monomial m;
    m.l_pow = 1;
    add_canonical(e.terms_, m, Coeff(Rational(1)));
    return e;
}

TraceExpr TraceExpr::atom_b() {
    TraceExpr e;
    Monomial m;
    m.b_pow = 1;
    add_canonical(e.terms_, m, Coeff(Rational(1)));
    return e;
}

TraceExpr TraceExpr::atom_q() {
    TraceExpr e;
    Monomial m;
    m.q_pow = 1;
    add_canonical(e.terms_, m, Coeff(Rational(1)));
    return e;
}

TraceExpr TraceExpr::atom_qi() {
    TraceExpr e;
    Monomial m;
    m.q_pow = -1;
    add_canonical(e.terms_, m, Coeff(Rational(1)));
    return e;
}

TraceExpr TraceExpr::atom_d() {
    TraceExpr e;
    Monomial m;
    m.d_flag = true;
    add_canonical(e.terms_, m, Coeff(Rational(1)));
    return e;
}

TraceExpr TraceExpr::heat(const Rational& alpha) {
    TraceExpr e;
    Monomial m;
    m.alpha = alpha;
    add_canonical(e.terms_, m, Coeff(Rational(1)));
    return e;
}

TraceExpr operator+(const TraceExpr& a, const TraceExpr& b) {
    TraceExpr out = a;
    for (const auto& [m, c] : b.terms_)
        TraceExpr::add_canonical(out.terms_, m, c);
    return out;
}

TraceExpr operator-(const TraceExpr& a, const TraceExpr& b) {
    TraceExpr out = a;
    for (const auto& [m, c] : b.terms_)
        TraceExpr::add_canonical(out.terms_, m, -c);
    return out;
}

TraceExpr TraceExpr::operator-() const { return zero() - *this; }

namespace {

Monomial mul_monomial(const Monomial& x, const Monomial& y) {
    if (x.d_flag && y.d_flag)
        throw TwoDFactors("product would carry two d factors");
    Monomial m;
    m.t_pow = x.t_pow + y.t_pow;
    m.l_pow = x.l_pow + y.l_pow;
    if (x.d_flag) {
        m.d_flag = true;
        m.b_pow = x.b_pow;
        m.q_pow = x.q_pow;
        m.alpha = x.alpha;
        m.rb_pow = x.rb_pow + y.b_pow + y.rb_pow;
        m.rq_pow = x.rq_pow + y.q_pow + y.rq_pow;
        m.ralpha = x.ralpha + y.alpha + y.ralpha;
    } else if (y.d_flag) {
        m.d_flag = true;
        m.b_pow = x.b_pow + y.b_pow;
        m.q_pow = x.q_pow + y.q_pow;
        m.alpha = x.alpha + y.alpha;
        m.rb_pow = y.rb_pow;
        m.rq_pow = y.rq_pow;
        m.ralpha = y.ralpha;
    } else {
        m.b_pow = x.b_pow + y.b_pow;
        m.q_pow = x.q_pow + y.q_pow;
        m.alpha = x.alpha + y.alpha;
    }
    return m;
}

} // namespace

TraceExpr operator*(const TraceExpr& a, const TraceExpr& b) {
    TraceExpr out;
    for (const auto& [ma, ca] : a.terms_)
        for (const auto& [mb, cb] : b.terms_)
            TraceExpr::add_canonical(out.terms_, mul_monomial(ma, mb), ca * cb);
    return out;
}

TraceExpr TraceExpr::pow(int k) const {
    if (k == 0)
        return one();
    if (k > 0) {
        TraceExpr out = *this;
        for (int i = 1; i < k; ++i)
            out = out * *this;
        return out;
    }
    if (terms_.size() != 1)
        throw Error("pow: negative power of a sum");
    const auto& [m, c] = *terms_.begin();
    if (m.d_flag || m.l_pow != 0 || m.b_pow != 0 || m.rb_pow != 0 || m.rq_pow != 0 ||
        !m.ralpha.is_zero())
        throw Error("pow: negative power of a non-invertible term");
    Monomial inv;
    inv.t_pow = m.t_pow * k;
    inv.q_pow = m.q_pow * k;
    inv.alpha = m.alpha * Rational(k);
    Coeff ci = Coeff(Rational(1));
    const Coeff cinv = c.inverse();
    for (int i = 0; i < -k; ++i)
        ci = ci * cinv;
    TraceExpr out;
    add_canonical(out.terms_, inv, ci);
    return out;
}

std::string TraceExpr::print() const {
    if (terms_.empty())
        return "0";
    std::string out;
    bool first = true;
    for (const auto& [m, c] : terms_) {
        std::vector<std::string> f;
        bool neg = false;
        if (c.im.is_zero()) {
            neg = c.re.num < 0;
            const Rational mag = neg ? -c.re : c.re;
            if (!(mag == Rational(1)))
                f.push_back(mag.str());
        } else if (c.re.is_zero()) {
            neg = c.im.num < 0;
            const Rational mag = neg ? -c.im : c.im;
            if (!(mag == Rational(1)))
                f.push_back(mag.str());
            f.push_back("i");
        } else {
            const bool im_neg = c.im.num < 0;
            const Rational mag = im_neg ? -c.im : c.im;
            std::string s = "(" + c.re.str() + (im_neg ? "-" : "+");
            if (!(mag == Rational(1)))
                s += mag.str() + "*";
            s += "i)";
            f.push_back(s);
        }
        const auto power = [&f](const char* sym, int p) {
            if (p == 0)
                return;
            if (p == 1)
                f.push_back(sym);
            else
                f.push_back(std::string(sym) + "^" + std::to_string(p));
        };
        const auto side = [&](int b, int q, const Rational& a) {
            power("b", b);
            if (q < 0)
                power("qi", -q);
            if (!a.is_zero())
                f.push_back("E(" + a.str() + ")");
        };
        power("t", m.t_pow);
        power("l", m.l_pow);
        side(m.b_pow, m.q_pow, m.alpha);
        if (m.d_flag) {
            f.push_back("d");
            side(m.rb_pow, m.rq_pow, m.ralpha);
        }
        if (f.empty())
            f.push_back("1");
        std::string body = f[0];
        for (std::size_t i = 1; i < f.size(); ++i)
            body += "*" + f[i];
        if (first) {
            out = (neg ? "-" : "") + body;
            first = false;
        } else {
            out += (neg ? " - " : " + ") + body;
        }
    }
    return out;
}

namespace {

struct Parser {
    const std::string& s;
    std::size_t pos = 0;

    [[noreturn]] void fail(std::size_t at, const std::string& msg) const {
        throw SyntaxError(at, "parse error at " + std::to_string(at) + ": " + msg);
    }

    void skip_ws() {
        while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t'))
            ++pos;
    }

    bool accept(char c) {
        skip_ws();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    void expect(char c) {
        skip_ws();
        if (pos >= s.size() || s[pos] != c)
            fail(pos, std::string("expected '") + c + "'");
        ++pos;
    }

    long long integer() {
        skip_ws();
        const std::size_t start = pos;
        if (pos >= s.size() || !std::isdigit(static_cast<unsigned char>(s[pos])))
            fail(pos, "expected a number");
        long long v = 0;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
            v = v * 10 + (s[pos] - '0');
            if (v < 0)
                fail(start, "number too large");
            ++pos;
        }
        return v;
    }

    Rational rational() {
        skip_ws();
        const bool neg = accept('-');
        const long long n = integer();
        long long d = 1;
        if (accept('/'))
            d = integer();
        if (d == 0)
            fail(pos, "zero denominator");
        return {neg ? -n : n, d};
    }

    int exponent() {
        skip_ws();
        if (accept('(')) {
            const bool neg = accept('-');
            const long long v = integer();
            expect(')');
            if (v > 1000)
                fail(pos, "exponent too large");
            return static_cast<int>(neg ? -v : v);
        }
        const bool neg = accept('-');
        const long long v = integer();
        if (v > 1000)
            fail(pos, "exponent too large");
        return static_cast<int>(neg ? -v : v);
    }

    TraceExpr expr() {
        skip_ws();
        bool neg = false;
        if (accept('-'))
            neg = true;
        else
            accept('+');
        TraceExpr out = term();
        if (neg)
            out = -out;
        for (;;) {
            skip_ws();
            if (accept('+'))
                out = out + term();
            else if (accept('-'))
                out = out - term();
            else
                return out;
        }
    }

    TraceExpr term() {
        TraceExpr out = factor();
        for (;;) {
            skip_ws();
            if (accept('*'))
                out = out * factor();
            else
                return out;
        }
    }

    TraceExpr factor() {
        TraceExpr b = base();
        skip_ws();
        if (accept('^')) {
            const std::size_t caret = pos - 1;
            const int k = exponent();
            try {
                return b.pow(k);
            } catch (const TwoDFactors&) {
                throw;
            } catch (const TermCapExceeded&) {
                throw;
            } catch (const Error& err) {
                fail(caret, err.what());
            }
        }
        return b;
    }

    TraceExpr base() {
        skip_ws();
        if (pos >= s.size())
            fail(pos, "unexpected end of input");
        const char c = s[pos];
        if (std::isdigit(static_cast<unsigned char>(c)))
            return TraceExpr::constant(Coeff(rational()));
        if (c == '(') {
            ++pos;
            TraceExpr e = expr();
            expect(')');
            return e;
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            const std::size_t start = pos;
            std::string ident;
            while (pos < s.size() && std::isalpha(static_cast<unsigned char>(s[pos])))
                ident += s[pos++];
            if (ident == "t")
                return TraceExpr::atom_t();
            if (ident == "l")
                return TraceExpr::atom_l();
            if (ident == "b")
                return TraceExpr::atom_b();
            if (ident == "q")
                return TraceExpr::atom_q();
            if (ident == "qi")
                return TraceExpr::atom_qi();
            if (ident == "d")
                return TraceExpr::atom_d();
            if (ident == "i")
                return TraceExpr::constant(Coeff::unit_i());
            if (ident == "E") {
                expect('(');
                const Rational a = rational();
                expect(')');
                return TraceExpr::heat(a);
            }
            fail(start, "unknown symbol '" + ident + "'");
        }
        fail(pos, std::string("unexpected character '") + c + "'");
    }
};

} // namespace

TraceExpr parse_expr(const std::string& text) {
    Parser p{text};
    TraceExpr e = p.expr();
    p.skip_ws();
    if (p.pos != text.size())
        p.fail(p.pos, "unexpected trailing input");
    return e;
}

TraceExpr trace_normalize(const TraceExpr& e) {
    TraceExpr out;
    for (const auto& [m, c] : e.terms_) {
        Monomial n;
        n.t_pow = m.t_pow;
        n.l_pow = m.l_pow;
        n.b_pow = m.b_pow + m.rb_pow;
        n.q_pow = m.q_pow + m.rq_pow;
        n.alpha = m.alpha + m.ralpha;
        n.d_flag = m.d_flag;
        TraceExpr::add_canonical(out.terms_, n, c);
    }
    return out;
}

TraceExpr differentiate(const TraceExpr& e, char var) {
    if (var != 't' && var != 'l')
        throw ConfigError("differentiate: var must be 't' or 'l'");
    TraceExpr result;
    std::map<Monomial, Coeff>& out = result.terms_;
    for (const auto& [m, c] : e.terms_) {
        if (m.d_flag)
            throw AlreadyHasD("differentiate: expression already carries a d factor");
        if (var == 't') {
            if (m.t_pow != 0) {
                Monomial n = m;
                n.t_pow -= 1;
                TraceExpr::add_canonical(out, n, c * Coeff(Rational(m.t_pow)));
            }
            if (!m.alpha.is_zero()) {
                Monomial n = m;
                n.t_pow += 1;
                n.q_pow += 1;
                TraceExpr::add_canonical(out, n, c * Coeff(Rational(-2) * m.alpha));
            }
            continue;
        }
        if (m.l_pow != 0) {
            Monomial n = m;
            n.l_pow -= 1;
            TraceExpr::add_canonical(out, n, c * Coeff(Rational(m.l_pow)));
        }
        if (m.b_pow != 0) {
            // The derivative of one b factor lands as d, with the rest of the
            // commuting half following it.
            Monomial n = m;
            n.b_pow -= 1;
            n.d_flag = true;
            n.rq_pow = m.q_pow;
            n.ralpha = m.alpha;
            n.q_pow = 0;
            n.alpha = Rational(0);
            TraceExpr::add_canonical(out, n, c * Coeff(Rational(m.b_pow)));
        }
        if (m.q_pow != 0) {
            Monomial n1 = m;
            n1.q_pow -= 1;
            n1.l_pow += 1;
            TraceExpr::add_canonical(out, n1, c * Coeff(Rational(2 * m.q_pow)));
            Monomial n2 = m;
            n2.q_pow -= 1;
            n2.b_pow += 1;
            n2.d_flag = true;
            TraceExpr::add_canonical(out, n2, c * Coeff(Rational(2 * m.q_pow)));
        }
        if (!m.alpha.is_zero()) {
            Monomial n1 = m;
            n1.t_pow += 2;
            n1.l_pow += 1;
            TraceExpr::add_canonical(out, n1, c * Coeff(Rational(-2) * m.alpha));
            Monomial n2 = m;
            n2.t_pow += 2;
            n2.b_pow += 1;
            n2.d_flag = true;
            TraceExpr::add_canonical(out, n2, c * Coeff(Rational(-2) * m.alpha));
        }
    }
    return result;
}

RMatrix build_r_symbolic() {
    RMatrix r;
    r[0][0] = parse_expr("E(1)");
    r[0][1] = parse_expr("(E(1/2)-E(3/2))*t^-1*qi*(b-i*l)");
    r[1][0] = parse_expr("E(1/2)*t*(b+i*l)");
    r[1][1] = parse_expr("1-E(1)");
    return r;
}

TraceExpr eqfe_reduced_form() { return parse_expr("-2*i*t*E(1)*b + 2*i*t*l*E(1)*d"); }

TraceExpr verify_eqfe(const TraceExpr& expected) {
    const RMatrix r = build_r_symbolic();
    RMatrix rt;
    RMatrix rl;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            rt[i][j] = differentiate(r[i][j], 't');
            rl[i][j] = differentiate(r[i][j], 'l');
        }
    }
    RMatrix com;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            com[i][j] = rt[i][0] * r[0][j] + rt[i][1] * r[1][j] - r[i][0] * rt[0][j] -
                        r[i][1] * rt[1][j];
        }
    }
    TraceExpr lhs;
    for (int i = 0; i < 2; ++i)
        lhs = lhs + com[i][0] * rl[0][i] + com[i][1] * rl[1][i];
    const TraceExpr residual = trace_normalize(lhs) - trace_normalize(expected);
    if (!residual.is_zero())
        throw NonzeroResidual("eqfe residual has " + std::to_string(residual.term_count()) +
                              " terms: " + residual.print());
    return residual;
}

TraceExpr verify_eqfe() { return verify_eqfe(eqfe_reduced_form()); }

} // namespace etaforge::sym
