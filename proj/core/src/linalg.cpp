#include "etaforge/linalg.hpp"
#include "etaforge/errors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <numbers>

namespace etaforge {

double op_norm(const Matrix& m) {
    if (m.rows() == 0 || m.cols() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

double hermiticity_defect(const Matrix& m) {
    return op_norm(m - m.adjoint());
}

double unitarity_defect(const Matrix& m) {
    return op_norm(m.adjoint() * m - Matrix::Identity(m.cols(), m.cols()));
}

bool is_hermitian(const Matrix& m, double tol_rel) {
    return hermiticity_defect(m) <= tol_rel * (1.0 + op_norm(m));
}

bool is_unitary(const Matrix& m, double tol_rel) {
    return unitarity_defect(m) <= tol_rel;
}

HermEig herm_eig(const Matrix& m) {
    if (m.rows() != m.cols())
        throw DimensionMismatch("herm_eig: matrix not square");
    if (!is_hermitian(m))
        throw NotHermitian("herm_eig: input is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Matrix> es((m + m.adjoint()) / 2.0);
    if (es.info() != Eigen::Success)
        throw Error("herm_eig: eigensolver failed");
    return HermEig{es.eigenvalues(), es.eigenvectors()};
}

Matrix herm_apply(const HermEig& eig, const std::function<double(double)>& f) {
    const auto n = eig.w.size();
    RealVector fw(n);
    for (Eigen::Index i = 0; i < n; ++i) fw(i) = f(eig.w(i));
    return eig.v * fw.asDiagonal() * eig.v.adjoint();
}

Matrix herm_apply(const Matrix& m, const std::function<double(double)>& f) {
    return herm_apply(herm_eig(m), f);
}

Matrix expm(const Matrix& m) {
    return m.exp();
}

Matrix expm_frechet(const Matrix& x, const Matrix& e) {
    const auto n = x.rows();
    if (x.cols() != n || e.rows() != n || e.cols() != n)
        throw DimensionMismatch("expm_frechet: blocks must be square and equal-sized");
    Matrix aug = Matrix::Zero(2 * n, 2 * n);
    aug.topLeftCorner(n, n) = x;
    aug.topRightCorner(n, n) = e;
    aug.bottomRightCorner(n, n) = x;
    return aug.exp().topRightCorner(n, n);
}

double phi1(double z) {
    if (std::abs(z) <= 1e-2) {
        // sum_{k=0}^{6} (-z)^k/(k+1)!
        double acc = 0.0, p = 1.0, fact = 1.0;
        for (int k = 0; k <= 6; ++k) {
            fact *= static_cast<double>(k + 1);
            acc += p / fact;
            p *= -z;
        }
        return acc;
    }
    return (1.0 - std::exp(-z)) / z;
}

double phi1_prime(double z) {
    if (std::abs(z) <= 1e-2) {
        // sum_{k=1}^{7} k (-1)^k z^{k-1}/(k+1)!
        double acc = 0.0, p = 1.0, fact = 1.0; // p = z^{k-1} signless
        double sign = -1.0;
        for (int k = 1; k <= 7; ++k) {
            fact *= static_cast<double>(k + 1); // (k+1)!/1! running product
            acc += sign * static_cast<double>(k) * p / fact;
            p *= z;
            sign = -sign;
        }
        return acc;
    }
    return (std::exp(-z) * (1.0 + z) - 1.0) / (z * z);
}

Matrix phim(const Matrix& z) {
    const auto n = z.rows();
    if (z.cols() != n) throw DimensionMismatch("phim: matrix not square");
    // exp([[-z, I], [0, 0]]) has (1,2) block (I - e^{-z}) z^{-1}.
    Matrix aug = Matrix::Zero(2 * n, 2 * n);
    aug.topLeftCorner(n, n) = -z;
    aug.topRightCorner(n, n) = Matrix::Identity(n, n);
    return aug.exp().topRightCorner(n, n);
}

Matrix phim_frechet(const Matrix& z, const Matrix& w) {
    const auto n = z.rows();
    if (z.cols() != n || w.rows() != n || w.cols() != n)
        throw DimensionMismatch("phim_frechet: blocks must be square and equal-sized");
    Matrix zt = Matrix::Zero(2 * n, 2 * n);
    zt.topLeftCorner(n, n) = z;
    zt.topRightCorner(n, n) = w;
    zt.bottomRightCorner(n, n) = z;
    return phim(zt).topRightCorner(n, n);
}

Quad1D gauss_legendre(int n, double a, double b) {
    if (n < 1) throw Error("gauss_legendre: need at least one node");
    Quad1D q;
    q.x.resize(n);
    q.w.resize(n);
    // Newton on Legendre P_n with Chebyshev initial guesses.
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        q.x[n - 1 - i] = 0.5 * (b - a) * x + 0.5 * (a + b);
        q.w[n - 1 - i] = (b - a) / ((1.0 - x * x) * pp * pp);
    }
    return q;
}

std::uint64_t Rng::next_u64() {
    // splitmix64
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = 0.0;
    do {
        u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
}

Complex Rng::cnormal() {
    const double re = normal();
    const double im = normal();
    return Complex(re, im) / std::sqrt(2.0);
}

Matrix random_matrix(Rng& rng, int rows, int cols) {
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = rng.cnormal();
    return m;
}

Matrix random_hermitian(Rng& rng, int n) {
    Matrix m = random_matrix(rng, n, n);
    return (m + m.adjoint()) / 2.0;
}

} // namespace etaforge
