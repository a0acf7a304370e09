#include "etaforge/bcyl.hpp"
#include "etaforge/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace etaforge {

namespace {

void require_boundary_operator(const Matrix& m, const EquivariantModel& model,
                               const char* who) {
    if (m.rows() != m.cols() || m.rows() != model.dim())
        throw DimensionMismatch(std::string(who) + ": operator does not match the model");
    if (!is_hermitian(m))
        throw NotHermitian(std::string(who) + ": operator must be Hermitian");
    if (!is_equivariant(model, m))
        throw NotEquivariant(std::string(who) + ": operator must be equivariant");
}

// Daleckii–Krein derivative of f at a Hermitian matrix in direction e:
// divided differences of f over the spectrum, with the derivative taking
// over where eigenvalues coincide.
Matrix dd_frechet(const HermEig& eig, const std::function<double(double)>& f,
                  const std::function<double(double)>& fp, const Matrix& e) {
    Matrix et = eig.v.adjoint() * e * eig.v;
    const Eigen::Index n = eig.w.size();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double a = eig.w(i);
            const double b = eig.w(j);
            const double dd = std::abs(a - b) <= 1e-7 * (1.0 + std::abs(a) + std::abs(b))
                                  ? fp(0.5 * (a + b))
                                  : (f(a) - f(b)) / (a - b);
            et(i, j) *= dd;
        }
    }
    return eig.v * et * eig.v.adjoint();
}

// Symmetric geometric λ-panels: [0,w], [w,2w], … capped at the window edge.
std::vector<std::pair<double, double>> lambda_panels(double window, double w0) {
    std::vector<std::pair<double, double>> panels;
    if (!(w0 > 0.0) || w0 >= window) {
        panels.emplace_back(0.0, window);
        return panels;
    }
    double lo = 0.0;
    double hi = w0;
    while (lo < window) {
        panels.emplace_back(lo, std::min(hi, window));
        lo = hi;
        hi = 2.0 * lo;
    }
    return panels;
}

template <class F>
Complex cyl_pass(const F& f, double sqrt_tmax, double w0, int n_t, int n_lambda) {
    const Quad1D qu = gauss_legendre(n_t, 0.0, sqrt_tmax);
    Complex acc = 0.0;
    for (std::size_t k = 0; k < qu.x.size(); ++k) {
        const double u = qu.x[k];
        const double t = u * u;
        const double window = 8.0 / t;
        const auto panels = lambda_panels(window, w0);
        const int per_panel = std::max<int>(6, n_lambda / (2 * int(panels.size())));
        Complex slice = 0.0;
        for (const auto& [lo, hi] : panels) {
            const Quad1D ql = gauss_legendre(per_panel, lo, hi);
            for (std::size_t i = 0; i < ql.x.size(); ++i)
                slice += ql.w[i] * (f(t, ql.x[i]) + f(t, -ql.x[i]));
        }
        acc += qu.w[k] * 2.0 * u * slice;
    }
    return acc;
}

// Full-vs-halved tensor quadrature with the disagreement as the error report.
template <class F>
Complex cylinder_double_integral(const F& f, double gamma, double w0, const Grid2D& grid,
                                 double* quad_error, const char* who) {
    if (grid.n_t < 8 || grid.n_lambda < 8)
        throw ConfigError(std::string(who) + ": grid must have at least 8 nodes per axis");
    if (!(gamma > 0.0))
        throw ConfigError(std::string(who) + ": positive sigma floor required");
    const double t_max = grid.t_max > 0.0 ? grid.t_max : 8.0 / gamma;
    const double sqrt_tmax = std::sqrt(t_max);
    const Complex fine = cyl_pass(f, sqrt_tmax, w0, grid.n_t, grid.n_lambda);
    const Complex coarse =
        cyl_pass(f, sqrt_tmax, w0, std::max(8, grid.n_t / 2), std::max(8, grid.n_lambda / 2));
    const double err = std::abs(fine - coarse);
    if (quad_error)
        *quad_error = err;
    if (err > 2e-2 * (1.0 + std::abs(fine)))
        throw QuadratureNotConverged(std::string(who) + ": halved grid disagrees");
    return fine;
}

double lambda_feature_scale(const IndicialData& ind) {
    return 1.0 / (1.0 + op_norm(ind.d_boundary) + op_norm(ind.c_boundary));
}

// Minimum of σ_min(iλ + B(λ)) over the admissibility grid: the mixing grid
// samples every value of the profile, the tail doubles past the transition.
double sweep_sigma_floor(const Matrix& d, const Matrix& c, const Profile& p) {
    const Matrix id = Matrix::Identity(d.rows(), d.cols());
    const auto sigma_at = [&](double lambda) {
        const Matrix b = d + p.evaluate(lambda) * c;
        const Matrix h = lambda * lambda * id + b * b;
        return std::sqrt(std::max(0.0, herm_eig(h).w.minCoeff()));
    };
    double worst = sigma_at(0.0);
    constexpr int mix_steps = 200;
    double transition = 0.0;
    for (int j = 1; j < mix_steps; ++j) {
        const double s = double(j) / mix_steps;
        const double lambda = std::sqrt(2.0 * std::log(1.0 / s)) / p.eps;
        transition = std::max(transition, lambda);
        worst = std::min(worst, sigma_at(lambda));
    }
    double lambda = transition;
    for (int j = 0; j < 8; ++j) {
        lambda *= 2.0;
        worst = std::min(worst, sigma_at(lambda));
    }
    return worst;
}

} // namespace

Profile make_profile(double eps) {
    if (!(eps > 0.0))
        throw ConfigError("make_profile: eps must be positive");
    Profile p;
    p.eps = eps;
    p.evaluate = [eps](double lambda) { return std::exp(-0.5 * eps * eps * lambda * lambda); };
    p.derivative = [eps](double lambda) {
        return -eps * eps * lambda * std::exp(-0.5 * eps * eps * lambda * lambda);
    };
    return p;
}

IndicialData make_indicial(const Matrix& d_b, const Matrix& c_b, const Profile& profile,
                           const EquivariantModel& model) {
    require_boundary_operator(d_b, model, "make_indicial");
    require_boundary_operator(c_b, model, "make_indicial");
    if (sign_and_kernel(d_b + c_b).ker_proj.trace().real() > 0.5)
        throw NotInvertible("make_indicial: D + C must be invertible");

    const double floor = 1e-6 * (1.0 + op_norm(d_b) + op_norm(c_b));
    Profile p = profile;
    for (int halving = 0; halving <= 20; ++halving) {
        const double gamma = sweep_sigma_floor(d_b, c_b, p);
        if (gamma >= floor) {
            IndicialData ind;
            ind.d_boundary = d_b;
            ind.c_boundary = c_b;
            ind.profile = p;
            ind.b = [d_b, c_b, p](double lambda) {
                return Matrix(d_b + p.evaluate(lambda) * c_b);
            };
            ind.db = [c_b, p](double lambda) { return Matrix(p.derivative(lambda) * c_b); };
            ind.gamma = gamma;
            return ind;
        }
        p = make_profile(0.5 * p.eps);
    }
    throw NoAdmissibleEps("make_indicial: no eps cleared the singular-value floor");
}

RtFamily rt_family(const IndicialData& ind, double t, double lambda) {
    if (!(t > 0.0))
        throw ConfigError("rt_family: t must be positive");
    const Matrix b = ind.b(lambda);
    const Matrix db = ind.db(lambda);
    const Eigen::Index n = b.rows();
    const Matrix id = Matrix::Identity(n, n);
    const Matrix h = lambda * lambda * id + b * b;
    const HermEig eig = herm_eig(h);

    const auto g1 = [t](double x) { return std::exp(-t * t * x); };
    const auto g1x = [t](double x) { return -t * t * std::exp(-t * t * x); };
    const auto g1t = [t](double x) { return -2.0 * t * x * std::exp(-t * t * x); };
    // Off-diagonal envelope s(h) = sqrt(phi1(h)), so that
    // g2(x)^2 * x = g1(x) * (1 - g1(x)) and the family stays idempotent.
    const auto env = [](double hh) { return std::sqrt(phi1(hh)); };
    const auto env_prime = [&env](double hh) { return phi1_prime(hh) / (2.0 * env(hh)); };
    const auto g2 = [t, &env](double x) {
        const double hh = t * t * x;
        return t * std::exp(-0.5 * hh) * env(hh);
    };
    const auto g2x = [t, &env, &env_prime](double x) {
        const double hh = t * t * x;
        return t * t * t * std::exp(-0.5 * hh) * (env_prime(hh) - 0.5 * env(hh));
    };
    const auto g2t = [t, &env, &env_prime](double x) {
        const double hh = t * t * x;
        return std::exp(-0.5 * hh) * ((1.0 - hh) * env(hh) + 2.0 * hh * env_prime(hh));
    };

    const Matrix f1 = herm_apply(eig, g1);
    const Matrix f2 = herm_apply(eig, g2);
    const Matrix a_plus = Complex(0.0, 1.0) * lambda * id + b;
    const Matrix a_minus = Complex(0.0, -1.0) * lambda * id + b;

    RtFamily out;
    out.r = Matrix::Zero(2 * n, 2 * n);
    out.r.topLeftCorner(n, n) = f1;
    out.r.topRightCorner(n, n) = f2 * a_minus;
    out.r.bottomLeftCorner(n, n) = f2 * a_plus;
    out.r.bottomRightCorner(n, n) = id - f1;

    const Matrix f1t = herm_apply(eig, g1t);
    const Matrix f2t = herm_apply(eig, g2t);
    out.dr_dt = Matrix::Zero(2 * n, 2 * n);
    out.dr_dt.topLeftCorner(n, n) = f1t;
    out.dr_dt.topRightCorner(n, n) = f2t * a_minus;
    out.dr_dt.bottomLeftCorner(n, n) = f2t * a_plus;
    out.dr_dt.bottomRightCorner(n, n) = -f1t;

    const Matrix h_lambda = 2.0 * lambda * id + b * db + db * b;
    const Matrix df1 = dd_frechet(eig, g1, g1x, h_lambda);
    const Matrix df2 = dd_frechet(eig, g2, g2x, h_lambda);
    const Complex i_unit(0.0, 1.0);
    out.dr_dlambda = Matrix::Zero(2 * n, 2 * n);
    out.dr_dlambda.topLeftCorner(n, n) = df1;
    out.dr_dlambda.topRightCorner(n, n) = df2 * a_minus + f2 * (-i_unit * id + db);
    out.dr_dlambda.bottomLeftCorner(n, n) = df2 * a_plus + f2 * (i_unit * id + db);
    out.dr_dlambda.bottomRightCorner(n, n) = -df1;
    return out;
}

Complex sigma_pairing(const LambdaFamily& a0, const LambdaFamily& a1,
                      const EquivariantModel& model, const SigmaQuad& quad) {
    if (quad.n_nodes < 8)
        throw ConfigError("sigma_pairing: n_nodes must be at least 8");
    const auto cross_norm = [&](double lambda) {
        return op_norm(a0.derivative(lambda)) * op_norm(a1.value(lambda));
    };
    double window = quad.lambda_max;
    if (!(window > 0.0)) {
        window = 8.0;
        const double scale = 1.0 + cross_norm(0.0);
        int doublings = 0;
        while (cross_norm(window) + cross_norm(-window) > 1e-14 * scale) {
            window *= 2.0;
            if (++doublings > 30)
                throw QuadratureNotConverged("sigma_pairing: integrand does not decay");
        }
    }

    const auto integrate = [&](int per_panel) {
        const auto panels = lambda_panels(window, 1.0);
        Complex acc = 0.0;
        for (const auto& [lo, hi] : panels) {
            const Quad1D q = gauss_legendre(per_panel, lo, hi);
            for (std::size_t i = 0; i < q.x.size(); ++i) {
                acc += q.w[i] * (delocalized_trace(model, a0.derivative(q.x[i]) * a1.value(q.x[i])) +
                                 delocalized_trace(model, a0.derivative(-q.x[i]) * a1.value(-q.x[i])));
            }
        }
        return acc;
    };
    const int panels = int(lambda_panels(window, 1.0).size());
    const int per_fine = std::max(8, quad.n_nodes / (2 * panels));
    const Complex fine = integrate(per_fine);
    const Complex coarse = integrate(std::max(4, per_fine / 2));
    if (std::abs(fine - coarse) > 1e-8 * (1.0 + std::abs(fine)))
        throw QuadratureNotConverged("sigma_pairing: halved rule disagrees");
    return Complex(0.0, 1.0) / (2.0 * std::numbers::pi) * fine;
}

Complex eta_cocycle_integral(const IndicialData& ind, const EquivariantModel& model,
                             const Grid2D& grid, double* quad_error) {
    const EquivariantModel doubled = model.direct_sum(model);
    const auto integrand = [&](double t, double lambda) {
        const RtFamily f = rt_family(ind, t, lambda);
        const Matrix com = f.dr_dt * f.r - f.r * f.dr_dt;
        return delocalized_trace(doubled, com * f.dr_dlambda);
    };
    const Complex raw = cylinder_double_integral(integrand, ind.gamma,
                                                 lambda_feature_scale(ind), grid, quad_error,
                                                 "eta_cocycle_integral");
    return raw / Complex(0.0, 2.0 * std::numbers::pi);
}

KeyLemma key_lemma_check(const IndicialData& ind, const EquivariantModel& model,
                         const Grid2D& grid, const EtaQuad& quad) {
    KeyLemma out;
    out.lhs = eta_cocycle_integral(ind, model, grid, &out.lhs_error);
    out.rhs = -0.5 * eta_quadrature(Matrix(ind.d_boundary + ind.c_boundary), model, quad).value;
    out.gap = std::abs(out.lhs - out.rhs);
    return out;
}

EqfeResult eqfe_check(const IndicialData& ind, const EquivariantModel& model, double t,
                      double lambda) {
    if (!(t > 0.0))
        throw ConfigError("eqfe_check: t must be positive");
    const EquivariantModel doubled = model.direct_sum(model);
    const RtFamily f = rt_family(ind, t, lambda);
    const Matrix com = f.dr_dt * f.r - f.r * f.dr_dt;

    EqfeResult out;
    out.lhs = delocalized_trace(doubled, com * f.dr_dlambda);

    const Matrix b = ind.b(lambda);
    const Matrix db = ind.db(lambda);
    const Matrix id = Matrix::Identity(b.rows(), b.cols());
    const Matrix h = lambda * lambda * id + b * b;
    const Matrix heat = herm_apply(h, [t](double x) { return std::exp(-t * t * x); });
    out.rhs = Complex(0.0, -2.0) * t * delocalized_trace(model, heat * (b - lambda * db));
    out.residual = std::abs(out.lhs - out.rhs);
    return out;
}

std::vector<ZetaRow> zeta_sweep(const IndicialData& ind, const EquivariantModel& model,
                                const std::vector<double>& r_grid, const Grid2D& grid) {
    for (double r : r_grid)
        if (r < 0.0 || r > 1.0)
            throw ConfigError("zeta_sweep: r_grid must lie in [0, 1]");

    std::vector<ZetaRow> rows;
    rows.reserve(r_grid.size());
    const double w0 = lambda_feature_scale(ind);
    for (double r : r_grid) {
        const auto integrand = [&](double t, double lambda) {
            const Matrix b = ind.b(r * lambda);
            const Matrix db = r * ind.db(r * lambda);
            const Matrix id = Matrix::Identity(b.rows(), b.cols());
            const Matrix h = lambda * lambda * id + b * b;
            const Matrix heat = herm_apply(h, [t](double x) { return std::exp(-t * t * x); });
            return t * delocalized_trace(model, heat * (b - lambda * db));
        };
        ZetaRow row;
        row.r = r;
        row.value = cylinder_double_integral(integrand, ind.gamma, w0, grid, &row.quad_error,
                                             "zeta_sweep") /
                    std::numbers::pi;
        row.quad_error /= std::numbers::pi;
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace etaforge
