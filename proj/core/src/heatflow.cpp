#include "etaforge/heatflow.hpp"
#include "etaforge/errors.hpp"

#include <cmath>
#include <numbers>

namespace etaforge {

namespace {

// Tail of the majorant series sum_{k>=K} C^{k+1} x^k / k!.
double majorant_tail(double c, double x, int start) {
    double term = c;
    for (int k = 1; k <= start; ++k)
        term *= c * x / double(k);
    double sum = 0.0;
    int k = start;
    while (term > 0.0 && k < start + 400) {
        sum += term;
        ++k;
        term *= c * x / double(k);
    }
    return sum;
}

struct SeriesPlan {
    int steps = 1;       // power of two
    int squarings = 0;
    double t_step = 0.0;
    int terms = 1;       // series terms per step
    double tail_step = 0.0;
};

SeriesPlan plan_series(double t, double a_norm, double c_const, double tol) {
    SeriesPlan plan;
    double x = t * a_norm;
    while (x > 1.0 && plan.squarings < 60) {
        x *= 0.5;
        ++plan.squarings;
    }
    plan.steps = 1 << plan.squarings;
    plan.t_step = t / double(plan.steps);
    const double tol_step = tol / double(plan.steps);
    int terms = 1;
    double tail = majorant_tail(c_const, x, terms);
    while (tail > tol_step && terms <= 41) {
        ++terms;
        tail = majorant_tail(c_const, x, terms);
    }
    if (terms > 40)
        throw TermCapExceeded("volterra_heat: series needs more than 40 terms");
    plan.terms = terms;
    plan.tail_step = tail;
    return plan;
}

// First block row of exp(-t B) for the block-bidiagonal B with the diagonal
// eigenvalues on the diagonal and the rotated perturbation above it; summing
// the row realizes the truncated series exactly (triangular exponentials are
// divided differences).
Matrix step_divided_difference(const RealVector& w, const Matrix& a_rot, double t_step,
                               int terms) {
    const Eigen::Index n = w.size();
    Matrix block = Matrix::Zero(terms * n, terms * n);
    for (int i = 0; i < terms; ++i) {
        block.block(i * n, i * n, n, n) = w.cast<Complex>().asDiagonal();
        if (i + 1 < terms)
            block.block(i * n, (i + 1) * n, n, n) = a_rot;
    }
    const Matrix e = expm(-t_step * block);
    Matrix q = Matrix::Zero(n, n);
    for (int k = 0; k < terms; ++k)
        q += e.block(0, k * n, n, n);
    return q;
}

// Recursive integral iteration: each term solves
//   T_k(s) = -\int_0^s e^{-(s-r) D2} A T_{k-1}(r) dr
// on a Chebyshev grid with Gauss-Legendre inner nodes and barycentric
// interpolation of the previous term.
Matrix step_duhamel(const HermEig& eig, const Matrix& a, double t_step, int terms) {
    const Eigen::Index n = eig.w.size();
    constexpr int grid = 24;
    constexpr int inner = 32;

    const auto heat = [&](double s) {
        return herm_apply(eig, [s](double x) { return std::exp(-s * x); });
    };

    std::vector<double> nodes(grid);
    std::vector<double> bary(grid);
    for (int m = 0; m < grid; ++m) {
        nodes[m] = 0.5 * t_step * (1.0 - std::cos(std::numbers::pi * double(m) / double(grid - 1)));
        bary[m] = ((m % 2 == 0) ? 1.0 : -1.0) * ((m == 0 || m == grid - 1) ? 0.5 : 1.0);
    }

    std::vector<Quad1D> quads(grid);
    std::vector<std::vector<Matrix>> propagate(grid);
    for (int m = 1; m < grid; ++m) {
        quads[m] = gauss_legendre(inner, 0.0, nodes[m]);
        propagate[m].reserve(inner);
        for (int i = 0; i < inner; ++i)
            propagate[m].push_back(heat(nodes[m] - quads[m].x[i]) * a);
    }

    const auto interpolate = [&](const std::vector<Matrix>& values, double r) {
        for (int m = 0; m < grid; ++m)
            if (std::abs(r - nodes[m]) <= 1e-15 * t_step)
                return values[m];
        Matrix num = Matrix::Zero(n, n);
        double den = 0.0;
        for (int m = 0; m < grid; ++m) {
            const double c = bary[m] / (r - nodes[m]);
            num += c * values[m];
            den += c;
        }
        return Matrix((1.0 / den) * num);
    };

    std::vector<Matrix> prev(grid);
    std::vector<Matrix> accum(grid);
    for (int m = 0; m < grid; ++m) {
        prev[m] = heat(nodes[m]);
        accum[m] = prev[m];
    }
    for (int k = 1; k < terms; ++k) {
        std::vector<Matrix> cur(grid);
        cur[0] = Matrix::Zero(n, n);
        for (int m = 1; m < grid; ++m) {
            Matrix acc = Matrix::Zero(n, n);
            for (int i = 0; i < inner; ++i)
                acc += quads[m].w[i] * (propagate[m][i] * interpolate(prev, quads[m].x[i]));
            cur[m] = -acc;
        }
        for (int m = 0; m < grid; ++m)
            accum[m] += cur[m];
        prev = std::move(cur);
    }
    return accum[grid - 1];
}

} // namespace

PerturbedSquare perturbed_square(const Matrix& d, const Matrix& c) {
    if (d.rows() != d.cols() || c.rows() != c.cols() || d.rows() != c.rows())
        throw DimensionMismatch("perturbed_square: operands must be square and same size");
    PerturbedSquare out;
    out.d2 = d * d;
    out.a = c * c + d * c + c * d;
    return out;
}

VolterraResult volterra_heat(const Matrix& d2, const Matrix& a, double t, double tol,
                             VolterraRoute route) {
    if (d2.rows() != d2.cols() || a.rows() != a.cols() || d2.rows() != a.rows())
        throw DimensionMismatch("volterra_heat: operands must be square and same size");
    if (!(t > 0.0))
        throw Error("volterra_heat: t must be positive");
    if (!(tol > 0.0))
        throw Error("volterra_heat: tol must be positive");

    const HermEig eig = herm_eig(d2);
    const double bottom = eig.w.minCoeff();
    const double a_norm = op_norm(a);

    // sup_s ||e^{-s t_step D2}||, equal to 1 on a positive semidefinite D2.
    double c_const = 1.0;
    SeriesPlan plan = plan_series(t, a_norm, c_const, tol);
    if (bottom < 0.0) {
        c_const = std::exp(-bottom * plan.t_step);
        plan = plan_series(t, a_norm, c_const, tol);
    }

    Matrix q_step;
    if (route == VolterraRoute::DividedDifference) {
        const Matrix a_rot = eig.v.adjoint() * a * eig.v;
        q_step = step_divided_difference(eig.w, a_rot, plan.t_step, plan.terms);
        for (int s = 0; s < plan.squarings; ++s)
            q_step = q_step * q_step;
        q_step = eig.v * q_step * eig.v.adjoint();
    } else {
        q_step = step_duhamel(eig, a, plan.t_step, plan.terms);
        for (int s = 0; s < plan.squarings; ++s)
            q_step = q_step * q_step;
    }

    VolterraResult out;
    out.value = q_step;
    out.terms_used = plan.terms;
    out.tail_bound = double(plan.steps) * plan.tail_step;
    return out;
}

double small_time_defect(const Matrix& k, const Matrix& d, const Matrix& c,
                         double delta, double m_prime) {
    if (d.rows() != d.cols() || c.rows() != c.cols() || d.rows() != c.rows() ||
        k.rows() != k.cols() || k.rows() != d.rows())
        throw DimensionMismatch("small_time_defect: operands must be square and same size");
    if (delta < 0.0)
        throw Error("small_time_defect: delta must be nonnegative");
    const Matrix h = (d + c) * (d + c);
    const Matrix e = expm(-delta * h);
    const double defect = op_norm(k * e - k);
    const double bound =
        delta * m_prime * op_norm(h * k) + (1.0 - std::exp(-delta)) * op_norm(k);
    if (defect > bound + 1e-12 * (1.0 + op_norm(k)))
        throw Error("small_time_defect: defect exceeds the declared bound");
    return defect;
}

Matrix GradedModel::embed_plus(const Matrix& x) const {
    Matrix out = Matrix::Zero(dim_plus + dim_minus, dim_plus + dim_minus);
    out.topLeftCorner(dim_plus, dim_plus) = x;
    return out;
}

Matrix GradedModel::embed_minus(const Matrix& y) const {
    Matrix out = Matrix::Zero(dim_plus + dim_minus, dim_plus + dim_minus);
    out.bottomRightCorner(dim_minus, dim_minus) = y;
    return out;
}

Matrix GradedModel::embed_graded(const Matrix& x, const Matrix& y) const {
    Matrix out = Matrix::Zero(dim_plus + dim_minus, dim_plus + dim_minus);
    out.topLeftCorner(dim_plus, dim_plus) = x;
    out.bottomRightCorner(dim_minus, dim_minus) = -y;
    return out;
}

Matrix GradedModel::embed_odd(const Matrix& a_plus) const {
    Matrix out = Matrix::Zero(dim_plus + dim_minus, dim_plus + dim_minus);
    out.bottomLeftCorner(dim_minus, dim_plus) = a_plus;
    return out;
}

GradedModel make_graded_model(const std::vector<Matrix>& gen_plus,
                              const std::vector<Matrix>& gen_minus, int g_index,
                              int max_order) {
    if (gen_plus.size() != gen_minus.size() || gen_plus.empty())
        throw ConfigError("make_graded_model: generator lists must pair up");
    const Eigen::Index np = gen_plus.front().rows();
    const Eigen::Index nm = gen_minus.front().rows();
    std::vector<Matrix> joint;
    joint.reserve(gen_plus.size());
    for (std::size_t i = 0; i < gen_plus.size(); ++i) {
        if (gen_plus[i].rows() != np || gen_minus[i].rows() != nm)
            throw DimensionMismatch("make_graded_model: inconsistent generator dimensions");
        Matrix u = Matrix::Zero(np + nm, np + nm);
        u.topLeftCorner(np, np) = gen_plus[i];
        u.bottomRightCorner(nm, nm) = gen_minus[i];
        joint.push_back(u);
    }
    GradedModel model;
    model.joint = build_group_model(joint, g_index, max_order);
    model.dim_plus = static_cast<int>(np);
    model.dim_minus = static_cast<int>(nm);
    return model;
}

SupertraceReport mckean_singer(const Matrix& a_plus, const GradedModel& model,
                               const std::vector<double>& t_grid) {
    if (a_plus.cols() != model.dim_plus || a_plus.rows() != model.dim_minus)
        throw DimensionMismatch("mckean_singer: odd block does not match the graded components");
    if (!is_equivariant(model.joint, model.embed_odd(a_plus)))
        throw NotEquivariant("mckean_singer: odd block is not equivariant");

    const HermEig ep = herm_eig(a_plus.adjoint() * a_plus);
    const HermEig em = herm_eig(a_plus * a_plus.adjoint());

    SupertraceReport report;
    report.points.reserve(t_grid.size());
    for (double t : t_grid) {
        const auto f = [t](double x) { return std::exp(-t * x); };
        const Matrix graded = model.embed_graded(herm_apply(ep, f), herm_apply(em, f));
        report.points.push_back({t, delocalized_trace(model.joint, graded)});
    }

    const Matrix kp = sign_and_kernel(a_plus.adjoint() * a_plus).ker_proj;
    const Matrix km = sign_and_kernel(a_plus * a_plus.adjoint()).ker_proj;
    report.kernel_value = delocalized_trace(model.joint, model.embed_graded(kp, km));
    return report;
}

} // namespace etaforge
