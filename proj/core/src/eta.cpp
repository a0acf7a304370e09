#include "etaforge/eta.hpp"
#include "etaforge/errors.hpp"

#include <cmath>
#include <numbers>

namespace etaforge {

namespace {

constexpr double two_over_sqrt_pi = 2.0 / 1.7724538509055160273;

void require_model_operator(const Matrix& d, const EquivariantModel& model,
                            const char* who) {
    if (d.rows() != d.cols() || d.rows() != model.dim())
        throw DimensionMismatch(std::string(who) + ": operator does not match the model");
    if (!is_hermitian(d))
        throw NotHermitian(std::string(who) + ": operator must be Hermitian");
    if (!is_equivariant(model, d))
        throw NotEquivariant(std::string(who) + ": operator must be equivariant");
}

bool has_kernel(const SignKernel& sk) {
    return sk.ker_proj.trace().real() > 0.5;
}

// Diagonal of each coset conjugate of U_g in the eigenbasis of D. The
// delocalized trace of f(D) collapses to per-coset weighted sums over the
// spectrum, evaluated in O(dim) per quadrature node.
struct TraceWeights {
    std::vector<Vector> diag;
    Eigen::VectorXd w;
};

TraceWeights trace_weights(const EquivariantModel& model, const HermEig& eig) {
    TraceWeights tw;
    tw.w = eig.w;
    const Matrix& ug = model.g_unitary();
    for (int h : model.coset_reps()) {
        const Matrix& uh = model.unitary(h);
        const Matrix conj = eig.v.adjoint() * (uh * ug * uh.adjoint()) * eig.v;
        tw.diag.push_back(conj.diagonal());
    }
    return tw;
}

Complex weighted_trace(const TraceWeights& tw, const std::function<double(double)>& f) {
    Complex total = 0.0;
    Complex first = 0.0;
    double max_abs = 0.0;
    for (std::size_t h = 0; h < tw.diag.size(); ++h) {
        Complex s = 0.0;
        for (Eigen::Index j = 0; j < tw.w.size(); ++j)
            s += tw.diag[h](j) * f(tw.w(j));
        if (h == 0)
            first = s;
        else if (std::abs(s - first) > 1e-10 * (1.0 + std::max(max_abs, std::abs(s))))
            throw NotEquivariant("eta quadrature: coset summands disagree");
        max_abs = std::max(max_abs, std::abs(s));
        total += s;
    }
    return total;
}

// Panels [0,w], [w,2w], [2w,4w], … capped at u_max, where w is the width of
// the fastest Gaussian in the integrand. One rule over the whole window would
// miss the fast spectral scales entirely once the gap (hence the window) and
// the spectral radius are orders of magnitude apart.
std::vector<std::pair<double, double>> graded_panels(double u_max, double w_fast) {
    std::vector<std::pair<double, double>> panels;
    if (!(w_fast > 0.0) || w_fast >= u_max) {
        panels.emplace_back(0.0, u_max);
        return panels;
    }
    double lo = 0.0;
    double hi = w_fast;
    while (lo < u_max) {
        panels.emplace_back(lo, std::min(hi, u_max));
        lo = hi;
        hi = 2.0 * lo;
    }
    return panels;
}

Complex composite_gl(const std::function<Complex(double)>& f,
                     const std::vector<std::pair<double, double>>& panels, int per_panel) {
    Complex acc = 0.0;
    for (const auto& [lo, hi] : panels) {
        const Quad1D q = gauss_legendre(per_panel, lo, hi);
        for (std::size_t i = 0; i < q.x.size(); ++i)
            acc += q.w[i] * f(q.x[i]);
    }
    return acc;
}

std::vector<double> quadrature_nodes(double u_max, double w_fast, int n) {
    const auto panels = graded_panels(u_max, w_fast);
    const int per_panel = std::max<int>(8, n / int(panels.size()));
    std::vector<double> nodes;
    nodes.reserve(panels.size() * per_panel);
    for (const auto& [lo, hi] : panels) {
        const Quad1D q = gauss_legendre(per_panel, lo, hi);
        nodes.insert(nodes.end(), q.x.begin(), q.x.end());
    }
    return nodes;
}

// Shared quadrature core: integrates (2/√π) f over the graded panels with the
// full and the halved per-panel budget and fills the report's error fields.
// The roundoff floor scales with the integrand magnitude so the reported
// error stays an upper estimate.
EtaReport quadrature_report(const std::function<Complex(double)>& f, double u_max,
                            double w_fast, int n, double magnitude, double gap) {
    if (n < 8)
        throw ConfigError("eta quadrature: n_nodes must be at least 8");
    const auto panels = graded_panels(u_max, w_fast);
    const int per_fine = std::max<int>(8, n / int(panels.size()));
    const int per_coarse = std::max(4, per_fine / 2);
    EtaReport report;
    const Complex fine = two_over_sqrt_pi * composite_gl(f, panels, per_fine);
    const Complex coarse = two_over_sqrt_pi * composite_gl(f, panels, per_coarse);
    report.value = fine;
    report.quadrature_error = std::abs(fine - coarse) + 1e-13 * (1.0 + magnitude);
    const double g2u = gap * gap * u_max;
    report.tail_bound =
        two_over_sqrt_pi * magnitude * std::exp(-gap * gap * u_max * u_max) / (2.0 * g2u);
    return report;
}

} // namespace

EtaReport eta_quadrature(const Matrix& d, const EquivariantModel& model,
                         const EtaQuad& quad) {
    require_model_operator(d, model, "eta_quadrature");
    const SignKernel sk = sign_and_kernel(d);

    if (!std::isfinite(sk.gap)) { // no nonzero spectrum at all
        EtaReport report;
        report.value = 0.0;
        report.oracle_value = delocalized_trace(model, sk.sign0);
        return report;
    }

    const double u_max = quad.u_max > 0.0 ? quad.u_max : 8.0 / sk.gap;
    const double radius = op_norm(d);
    const TraceWeights tw = trace_weights(model, herm_eig(d));
    const auto integrand = [&](double u) {
        return weighted_trace(tw, [u](double x) { return x * std::exp(-u * u * x * x); });
    };
    const double magnitude =
        double(model.coset_reps().size()) * double(model.dim()) * radius;
    EtaReport report =
        quadrature_report(integrand, u_max, 1.0 / radius, quad.n_nodes, magnitude, sk.gap);
    report.oracle_value = delocalized_trace(model, sk.sign0);
    return report;
}

Complex eta_oracle(const Matrix& d, const EquivariantModel& model) {
    require_model_operator(d, model, "eta_oracle");
    return delocalized_trace(model, sign_and_kernel(d).sign0);
}

EtaReport eta_perturbed(const Matrix& d, const Matrix& c, const EquivariantModel& model,
                        const EtaQuad& quad, EtaRoute route) {
    require_model_operator(d, model, "eta_perturbed");
    require_model_operator(c, model, "eta_perturbed");
    const Matrix s = d + c;
    const SignKernel sk = sign_and_kernel(s);
    if (has_kernel(sk))
        throw NotInvertible("eta_perturbed: D + C is not invertible");

    if (route == EtaRoute::Direct)
        return eta_quadrature(s, model, quad);

    const PerturbedSquare split = perturbed_square(d, c);
    const auto integrand = [&](double u) {
        const Matrix heat = volterra_heat(split.d2, split.a, u * u, 1e-10).value;
        return delocalized_trace(model, s * heat);
    };
    const double radius = op_norm(s);
    const double magnitude =
        double(model.coset_reps().size()) * double(model.dim()) * radius;
    const double u_max = quad.u_max > 0.0 ? quad.u_max : 8.0 / sk.gap;
    EtaReport report = quadrature_report(integrand, u_max, 1.0 / radius, quad.n_nodes,
                                         magnitude, sk.gap);
    report.oracle_value = delocalized_trace(model, sk.sign0);
    return report;
}

GapSweep eta_gap_sweep(const Matrix& d, const EquivariantModel& model,
                       const std::vector<double>& theta_grid, const EtaQuad& quad) {
    require_model_operator(d, model, "eta_gap_sweep");
    const SignKernel sk = sign_and_kernel(d);
    for (double theta : theta_grid)
        if (!(theta > 0.0) || theta >= sk.gap)
            throw GapViolation("eta_gap_sweep: theta outside the spectral gap");

    const Complex tau_ker = delocalized_trace(model, sk.ker_proj);
    const EtaReport base = eta_quadrature(d, model, quad);

    GapSweep sweep;
    sweep.limit_value = base.value + tau_ker;
    const Matrix id = Matrix::Identity(d.rows(), d.cols());
    for (double theta : theta_grid) {
        // The kernel piece flows to +theta and integrates to τ_g(P_ker)
        // exactly; only the gapped remainder needs quadrature.
        const Matrix rest = (d + theta * id) * (id - sk.ker_proj);
        EtaReport report = eta_quadrature(rest, model, quad);
        report.value += tau_ker;
        report.oracle_value = delocalized_trace(model, sign_and_kernel(d + theta * id).sign0);
        report.theta = theta;

        const double slack = report.quadrature_error + base.quadrature_error +
                             report.tail_bound + base.tail_bound +
                             1e-12 * (1.0 + std::abs(sweep.limit_value));
        if (std::abs(report.value - sweep.limit_value) > slack)
            throw Error("eta_gap_sweep: gap-limit identity violated beyond quadrature error");
        sweep.reports.push_back(std::move(report));
    }
    return sweep;
}

Matrix invertibilize(const Matrix& d, const EquivariantModel& model, double eps) {
    require_model_operator(d, model, "invertibilize");
    const SignKernel sk = sign_and_kernel(d);
    if (!(eps > 0.0) || eps >= sk.gap)
        throw GapViolation("invertibilize: eps must lie strictly inside the spectral gap");
    return eps * sk.ker_proj;
}

std::vector<EtaReport> eta_stability_sweep(const Matrix& d,
                                           const std::function<Matrix(double)>& path,
                                           const EquivariantModel& model,
                                           const std::vector<double>& r_grid,
                                           const EtaQuad& quad) {
    require_model_operator(d, model, "eta_stability_sweep");
    std::vector<EtaReport> rows;
    rows.reserve(r_grid.size());
    for (double r : r_grid) {
        const Matrix b = path(r);
        require_model_operator(b, model, "eta_stability_sweep");
        const Matrix s = d + b;
        if (has_kernel(sign_and_kernel(s)))
            throw GapClosed(r, "eta_stability_sweep: path loses invertibility");
        EtaReport report = eta_quadrature(s, model, quad);
        report.theta = r;
        rows.push_back(std::move(report));
    }
    return rows;
}

EtaReport rho_number(const Matrix& d1, const Matrix& d2, const EquivariantModel& model,
                     double eps, const EtaQuad& quad) {
    require_model_operator(d1, model, "rho_number");
    require_model_operator(d2, model, "rho_number");
    const EquivariantModel doubled = model.direct_sum(model);
    Matrix dsum = Matrix::Zero(2 * model.dim(), 2 * model.dim());
    dsum.topLeftCorner(model.dim(), model.dim()) = d1;
    dsum.bottomRightCorner(model.dim(), model.dim()) = -d2;
    const Matrix c = invertibilize(dsum, doubled, eps);
    return eta_perturbed(dsum, c, doubled, quad);
}

std::pair<EtaReport, EtaReport> symmetric_perturbation_check(
    const Matrix& dv, const Matrix& dw, const Matrix& i_w, const Matrix& b,
    const GradedModel& model, const EtaQuad& quad) {
    const int nv = model.dim_plus;
    const int nw = model.dim_minus;
    if (dv.rows() != nv || dv.cols() != nv || dw.rows() != nw || dw.cols() != nw ||
        i_w.rows() != nw || i_w.cols() != nw || b.rows() != nw || b.cols() != nw)
        throw DimensionMismatch("symmetric_perturbation_check: component sizes disagree");

    const double scale_w = 1.0 + op_norm(dw) + op_norm(b);
    if (op_norm(i_w * i_w - Matrix::Identity(nw, nw)) > 1e-10 || !is_unitary(i_w))
        throw NotOdd("symmetric_perturbation_check: I_W is not a unitary involution");
    if (op_norm(i_w * dw + dw * i_w) > 1e-10 * scale_w)
        throw NotOdd("symmetric_perturbation_check: D_W does not anticommute with I_W");
    if (op_norm(i_w * b + b * i_w) > 1e-10 * scale_w)
        throw NotOdd("symmetric_perturbation_check: B does not anticommute with I_W");

    if (!is_hermitian(dv))
        throw NotHermitian("symmetric_perturbation_check: D_V must be Hermitian");
    if (!is_equivariant(model.joint, model.embed_plus(dv)))
        throw NotEquivariant("symmetric_perturbation_check: D_V must be equivariant");
    for (const Matrix* m : {&dw, &b}) {
        if (!is_hermitian(*m))
            throw NotHermitian("symmetric_perturbation_check: W operators must be Hermitian");
        if (!is_equivariant(model.joint, model.embed_minus(*m)))
            throw NotEquivariant("symmetric_perturbation_check: W operators must be equivariant");
    }
    if (!is_equivariant(model.joint, model.embed_minus(i_w)))
        throw NotEquivariant("symmetric_perturbation_check: I_W must be equivariant");

    if (has_kernel(sign_and_kernel(dv)))
        throw NotInvertible("symmetric_perturbation_check: D_V is not invertible");
    if (has_kernel(sign_and_kernel(dw + b)))
        throw NotInvertible("symmetric_perturbation_check: D_W + B is not invertible");

    Matrix full = Matrix::Zero(nv + nw, nv + nw);
    full.topLeftCorner(nv, nv) = dv;
    full.bottomRightCorner(nw, nw) = dw + b;

    const EtaReport lhs = eta_quadrature(full, model.joint, quad);
    const EtaReport rhs = eta_quadrature(model.embed_plus(dv), model.joint, quad);

    // Pointwise vanishing of the W contribution along the lhs grid.
    const TraceWeights tw_full = trace_weights(model.joint, herm_eig(full));
    const TraceWeights tw_v = trace_weights(model.joint, herm_eig(model.embed_plus(dv)));
    const double u_max = quad.u_max > 0.0 ? quad.u_max : 8.0 / sign_and_kernel(full).gap;
    const std::vector<double> nodes = quadrature_nodes(u_max, 1.0 / op_norm(full), quad.n_nodes);
    for (double u : nodes) {
        const auto f = [u](double x) { return x * std::exp(-u * u * x * x); };
        const Complex l = weighted_trace(tw_full, f);
        const Complex r = weighted_trace(tw_v, f);
        if (std::abs(l - r) > 1e-10 * (1.0 + std::abs(r)))
            throw Error("symmetric_perturbation_check: W integrand failed to vanish");
    }

    const double slack = lhs.quadrature_error + rhs.quadrature_error + lhs.tail_bound +
                         rhs.tail_bound + 1e-12 * (1.0 + std::abs(rhs.value));
    if (std::abs(lhs.value - rhs.value) > slack)
        throw Error("symmetric_perturbation_check: eta values disagree beyond quadrature error");
    return {lhs, rhs};
}

Complex regularized_limit(const std::vector<std::pair<double, Complex>>& samples, int n,
                          int n_terms) {
    if (n < 0)
        throw Error("regularized_limit: dimension must be nonnegative");
    const std::size_t m = samples.size();
    std::size_t k = n_terms > 0 ? static_cast<std::size_t>(n_terms)
                                : std::min(m, static_cast<std::size_t>(n + 4));
    std::vector<double> exponents;
    exponents.reserve(k + 1);
    bool has_constant = false;
    for (std::size_t i = 0; i < k; ++i) {
        const double e = double(i) - 0.5 * double(n + 1);
        exponents.push_back(e);
        if (std::abs(e) < 1e-12)
            has_constant = true;
    }
    if (!has_constant)
        exponents.push_back(0.0);
    if (m < exponents.size())
        throw Error("regularized_limit: more basis terms than samples");

    Matrix a(m, exponents.size());
    Vector f(m);
    for (std::size_t j = 0; j < m; ++j) {
        if (!(samples[j].first > 0.0))
            throw Error("regularized_limit: sample abscissae must be positive");
        for (std::size_t i = 0; i < exponents.size(); ++i)
            a(j, i) = std::pow(samples[j].first, exponents[i]);
        f(j) = samples[j].second;
    }
    const Vector coef = a.jacobiSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(f);
    for (std::size_t i = 0; i < exponents.size(); ++i)
        if (std::abs(exponents[i]) < 1e-12)
            return coef(i);
    return 0.0;
}

} // namespace etaforge
