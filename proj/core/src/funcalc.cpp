#include "etaforge/funcalc.hpp"
#include "etaforge/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <utility>

namespace etaforge {

namespace {

void validate_contour(const ContourSpec& spec) {
    if (spec.n_nodes < 8)
        throw ConfigError("contour: n_nodes must be at least 8");
    if (!(spec.truncation_tol > 0.0))
        throw ConfigError("contour: truncation_tol must be positive");
    if (spec.kind == ContourSpec::Kind::Wedge && !(spec.m > 0.0))
        throw ConfigError("contour: wedge slope must be positive");
    if (spec.kind == ContourSpec::Kind::Circle && !(spec.sigma > 0.0))
        throw ConfigError("contour: circle radius must be positive");
}

// One traversal of the wedge (lower half-line toward the vertex, then the
// upper half-line away from it), integrated panel by panel.
Matrix wedge_sum(const Matrix& d2, double t, double b, double theta,
                 const std::vector<std::pair<double, double>>& panels,
                 int nodes_per_panel) {
    const Eigen::Index n = d2.rows();
    const Matrix id = Matrix::Identity(n, n);
    const Complex dir(std::cos(theta), std::sin(theta));
    Matrix acc = Matrix::Zero(n, n);
    for (const auto& [lo, hi] : panels) {
        const Quad1D q = gauss_legendre(nodes_per_panel, lo, hi);
        for (std::size_t k = 0; k < q.x.size(); ++k) {
            const Complex zp = b + q.x[k] * dir;
            const Complex zm = std::conj(zp);
            const Matrix rp = (d2 - zp * id).partialPivLu().solve(id);
            const Matrix rm = (d2 - zm * id).partialPivLu().solve(id);
            acc += q.w[k] * (dir * std::exp(-t * zp) * rp -
                             std::conj(dir) * std::exp(-t * zm) * rm);
        }
    }
    return acc / Complex(0.0, 2.0 * std::numbers::pi);
}

} // namespace

Matrix resolvent(const Matrix& d2, Complex lambda) {
    if (d2.rows() != d2.cols())
        throw DimensionMismatch("resolvent: operator must be square");
    Eigen::ComplexEigenSolver<Matrix> ces(d2, false);
    double dist = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < ces.eigenvalues().size(); ++i)
        dist = std::min(dist, std::abs(ces.eigenvalues()[i] - lambda));
    const double threshold = 1e-12 * op_norm(d2);
    if (dist < threshold || !(dist > 0.0))
        throw NearSpectrum("resolvent: point too close to the spectrum");
    const Matrix id = Matrix::Identity(d2.rows(), d2.cols());
    return (d2 - lambda * id).partialPivLu().solve(id);
}

Matrix spectral_function(const Matrix& a, const std::function<Complex(Complex)>& f) {
    if (a.rows() != a.cols())
        throw DimensionMismatch("spectral_function: operator must be square");
    const double scale = op_norm(a);
    if (hermiticity_defect(a) <= 1e-10 * (1.0 + scale)) {
        const HermEig eig = herm_eig(a);
        Matrix fw = Matrix::Zero(a.rows(), a.cols());
        for (Eigen::Index i = 0; i < eig.w.size(); ++i)
            fw(i, i) = f(Complex(eig.w[i], 0.0));
        return eig.v * fw * eig.v.adjoint();
    }
    const double normality = op_norm(a * a.adjoint() - a.adjoint() * a);
    if (normality > 1e-10 * (1.0 + scale * scale))
        throw NotDiagonalizable("spectral_function: operator is not normal");
    Eigen::ComplexSchur<Matrix> schur(a);
    Matrix fw = Matrix::Zero(a.rows(), a.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        fw(i, i) = f(schur.matrixT()(i, i));
    return schur.matrixU() * fw * schur.matrixU().adjoint();
}

Matrix contour_heat(const Matrix& d2, double t, const ContourSpec& spec) {
    if (d2.rows() != d2.cols())
        throw DimensionMismatch("contour_heat: operator must be square");
    if (spec.kind != ContourSpec::Kind::Wedge)
        throw ConfigError("contour_heat: contour must be a wedge");
    validate_contour(spec);
    if (!(t > 0.0))
        throw Error("contour_heat: t must be positive");
    if (!is_hermitian(d2))
        throw NotHermitian("contour_heat: operator must be Hermitian");

    const HermEig eig = herm_eig(d2);
    const double bottom = eig.w.minCoeff();
    double b = spec.b;
    if (b <= 0.0)
        b = 0.5 * bottom;
    if (!(b > 0.0) || b >= bottom)
        throw ContourHitsSpectrum(
            "contour_heat: wedge vertex must lie strictly between 0 and the spectrum");

    const double theta = std::atan(spec.m);
    const double d0 = bottom - b;
    // Truncate where |e^{-t z}| drops below truncation_tol, but always cover
    // the region around the nearest spectral point.
    double smax = (std::log(1.0 / spec.truncation_tol) - t * b) / (t * std::cos(theta));
    smax = std::max(smax, 4.0 * d0);

    // Geometrically graded panels: the integrand varies on scale d0 near the
    // vertex and flattens further out.
    std::vector<std::pair<double, double>> panels;
    double lo = 0.0;
    double hi = 0.5 * d0;
    while (lo < smax) {
        panels.emplace_back(lo, std::min(hi, smax));
        lo = hi;
        hi = 2.0 * lo;
    }

    const int per_panel = std::max<int>(
        6, static_cast<int>(std::ceil(double(spec.n_nodes) / double(panels.size()))));
    const Matrix coarse = wedge_sum(d2, t, b, theta, panels, per_panel);
    const Matrix fine = wedge_sum(d2, t, b, theta, panels, 2 * per_panel);
    if (op_norm(fine - coarse) > 1e-8)
        throw QuadratureNotConverged("contour_heat: node doubling moved the result by > 1e-8");
    return fine;
}

Matrix contour_projector(const Matrix& d2, double sigma) {
    if (d2.rows() != d2.cols())
        throw DimensionMismatch("contour_projector: operator must be square");
    if (!(sigma > 0.0))
        throw ConfigError("contour_projector: sigma must be positive");
    if (!is_hermitian(d2))
        throw NotHermitian("contour_projector: operator must be Hermitian");

    const HermEig eig = herm_eig(d2);
    for (Eigen::Index i = 0; i < eig.w.size(); ++i) {
        const double mu = std::abs(eig.w[i]);
        if (mu >= 0.5 * sigma && mu <= 2.0 * sigma)
            throw GapViolation("contour_projector: eigenvalue within [sigma/2, 2 sigma]");
    }

    const Eigen::Index n = d2.rows();
    const Matrix id = Matrix::Identity(n, n);
    const int nodes = 64;
    Matrix acc = Matrix::Zero(n, n);
    for (int j = 0; j < nodes; ++j) {
        const double th = 2.0 * std::numbers::pi * double(j) / double(nodes);
        const Complex z = sigma * Complex(std::cos(th), std::sin(th));
        acc += z * (z * id - d2).partialPivLu().solve(id);
    }
    return acc / double(nodes);
}

Matrix cm_projector(const Matrix& a_plus, double t) {
    if (t < 0.0)
        throw Error("cm_projector: t must be nonnegative");
    const Eigen::Index np = a_plus.cols();
    const Eigen::Index nm = a_plus.rows();

    // One SVD of the odd block keeps the A^-A^+ and A^+A^- heat factors
    // exactly intertwined; separate eigendecompositions lose idempotency to
    // rounding once t^2 ||A||^2 is large.
    Eigen::JacobiSVD<Matrix> svd(a_plus, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Index rank_slots = svd.singularValues().size();
    const Matrix& u = svd.matrixU();
    const Matrix& w = svd.matrixV();

    RealVector f11 = RealVector::Ones(np);
    RealVector f22 = RealVector::Zero(nm);
    Matrix d12 = Matrix::Zero(np, nm);
    Matrix d21 = Matrix::Zero(nm, np);
    for (Eigen::Index i = 0; i < rank_slots; ++i) {
        const double s = svd.singularValues()[i];
        const double h = t * t * s * s;
        f11[i] = std::exp(-h);
        f22[i] = 1.0 - std::exp(-h);
        d12(i, i) = std::exp(-0.5 * h) * phi1(h) * t * s;
        d21(i, i) = t * s * std::exp(-0.5 * h);
    }

    Matrix v(np + nm, np + nm);
    v.topLeftCorner(np, np) = w * f11.asDiagonal() * w.adjoint();
    v.topRightCorner(np, nm) = w * d12 * u.adjoint();
    v.bottomLeftCorner(nm, np) = u * d21 * w.adjoint();
    v.bottomRightCorner(nm, nm) = u * f22.asDiagonal() * u.adjoint();
    return v;
}

std::vector<DecayRow> decay_profile(const Matrix& d, const Matrix& c,
                                    const std::vector<double>& t_grid) {
    if (d.rows() != d.cols() || c.rows() != c.cols() || d.rows() != c.rows())
        throw DimensionMismatch("decay_profile: operands must be square and same size");
    const Matrix s = d + c;
    if (!is_hermitian(s))
        throw NotHermitian("decay_profile: D + C must be Hermitian");
    const HermEig eig = herm_eig(s);
    double amin = std::numeric_limits<double>::infinity();
    double radius = 0.0;
    for (Eigen::Index i = 0; i < eig.w.size(); ++i) {
        amin = std::min(amin, std::abs(eig.w[i]));
        radius = std::max(radius, std::abs(eig.w[i]));
    }
    if (amin <= 1e-12 * std::max(1.0, radius))
        throw NotInvertible("decay_profile: D + C is not invertible");

    const HermEig eig2 = herm_eig(s * s);
    std::vector<DecayRow> rows;
    rows.reserve(t_grid.size());
    for (double t : t_grid) {
        const double norm = op_norm(herm_apply(eig2, [t](double x) { return std::exp(-t * x); }));
        const double bound = std::exp(-amin * amin * t);
        if (norm > bound * (1.0 + 1e-10))
            throw Error("decay_profile: measured norm exceeds the gap bound");
        rows.push_back({t, norm, bound});
    }
    return rows;
}

} // namespace etaforge
