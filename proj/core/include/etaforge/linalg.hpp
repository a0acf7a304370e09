#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

namespace etaforge {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

// Operator 2-norm (largest singular value). Dense SVD; fine at desk scale.
double op_norm(const Matrix& m);

double hermiticity_defect(const Matrix& m);
double unitarity_defect(const Matrix& m);

bool is_hermitian(const Matrix& m, double tol_rel = 1e-10);
bool is_unitary(const Matrix& m, double tol_rel = 1e-10);

// Eigendecomposition of a Hermitian matrix: m = V diag(w) V^*.
struct HermEig {
    RealVector w;
    Matrix v;
};
HermEig herm_eig(const Matrix& m);

// f applied to a Hermitian matrix through its spectrum.
Matrix herm_apply(const HermEig& eig, const std::function<double(double)>& f);
Matrix herm_apply(const Matrix& m, const std::function<double(double)>& f);

// General complex matrix exponential (scaling and squaring).
Matrix expm(const Matrix& m);

// Frechet derivative of exp at x in direction e, via the augmented block
// exponential exp([[x, e], [0, x]]).
Matrix expm_frechet(const Matrix& x, const Matrix& e);

// phi(z) = (1 - e^{-z})/z, entire; series branch below |z| = 1e-2.
double phi1(double z);
// First derivative phi'(z) with its own series branch.
double phi1_prime(double z);

// phi1 of a general matrix, evaluated as an exponential of an augmented block
// (no inversion, stable near singular arguments).
Matrix phim(const Matrix& z);
// Frechet derivative of phim at z in direction w (nested augmentation).
Matrix phim_frechet(const Matrix& z, const Matrix& w);

// Gauss-Legendre nodes/weights on [a, b].
struct Quad1D {
    std::vector<double> x;
    std::vector<double> w;
};
Quad1D gauss_legendre(int n, double a, double b);

// Deterministic seeded RNG: splitmix64 + Box-Muller. Bitwise reproducible
// for a fixed seed independent of the standard library's distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}
    double uniform();      // [0, 1)
    double normal();       // N(0, 1)
    Complex cnormal();     // (normal + i normal)/sqrt(2)

private:
    std::uint64_t next_u64();
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

Matrix random_matrix(Rng& rng, int rows, int cols);
Matrix random_hermitian(Rng& rng, int n);

} // namespace etaforge
