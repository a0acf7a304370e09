#include <doctest.h>

#include "etaforge/errors.hpp"
#include "etaforge/opmodel.hpp"
#include "test_util.hpp"

#include <cmath>
#include <numbers>

using namespace etaforge;
using testutil::check_close;

namespace {

Matrix diag2(Complex a, Complex b) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

EquivariantModel z2_model() {
    return build_group_model({diag2(1.0, -1.0)}, 0);
}

// Order-6 permutation representation generated by a transposition and a 3-cycle.
EquivariantModel s3_model() {
    Matrix swap01 = Matrix::Zero(3, 3);
    swap01(0, 1) = 1.0;
    swap01(1, 0) = 1.0;
    swap01(2, 2) = 1.0;
    Matrix cyc = Matrix::Zero(3, 3);
    cyc(0, 2) = 1.0;
    cyc(1, 0) = 1.0;
    cyc(2, 1) = 1.0;
    return build_group_model({swap01, cyc}, 0);
}

} // namespace

TEST_SUITE("opmodel") {

TEST_CASE("trivial group gives the ordinary trace") {
    auto model = build_group_model({Matrix::Identity(3, 3)}, 0);
    CHECK(model.order() == 1);
    Matrix t(3, 3);
    t.setZero();
    t(0, 0) = 1.5;
    t(1, 1) = Complex(0.0, 2.0);
    check_close(delocalized_trace(model, t), Complex(1.5, 2.0), 1e-14);
}

TEST_CASE("order-two example evaluates to tr(U_g T)") {
    auto model = z2_model();
    CHECK(model.order() == 2);
    check_close(delocalized_trace(model, diag2(2.0, 3.0)), Complex(-1.0, 0.0), 1e-14);
}

TEST_CASE("marked identity reduces to the plain trace") {
    auto model = z2_model().with_marked(0);
    check_close(delocalized_trace(model, diag2(2.0, 3.0)), Complex(5.0, 0.0), 1e-14);
}

TEST_CASE("closure builds S3 with six elements and conjugacy-correct cosets") {
    auto model = s3_model();
    CHECK(model.order() == 6);
    // marked element is a transposition: centralizer has order 2, three cosets
    CHECK(model.coset_reps().size() == 3);
}

TEST_CASE("delocalized trace rejects non-equivariant input when cosets disagree") {
    auto model = s3_model();
    Matrix t = Matrix::Zero(3, 3);
    t(0, 0) = 1.0; // breaks S3 symmetry
    CHECK_THROWS_AS(delocalized_trace(model, t), NotEquivariant);
}

TEST_CASE("trace property holds for equivariant operators") {
    auto model = s3_model();
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
        Matrix a = random_equivariant_hermitian(model, seed, 1.0);
        Matrix b = random_equivariant_hermitian(model, seed + 100, 2.0);
        Complex ab = delocalized_trace(model, a * b);
        Complex ba = delocalized_trace(model, b * a);
        check_close(ab, ba, 1e-10);
    }
}

TEST_CASE("conjugation symmetry against the inverse marked element") {
    auto model = s3_model();
    auto model_inv = model.with_marked_inverse();
    for (std::uint64_t seed : {11ULL, 12ULL, 13ULL}) {
        Matrix a = random_equivariant_hermitian(model, seed, 1.0);
        Complex lhs = std::conj(delocalized_trace(model, a));
        Complex rhs = delocalized_trace(model_inv, Matrix(a.adjoint()));
        check_close(lhs, rhs, 1e-10);
    }
}

TEST_CASE("closure cap raises") {
    const double theta = 2.0 * std::numbers::pi / 100.0;
    Matrix u = diag2(std::exp(Complex(0, theta)), 1.0);
    CHECK_THROWS_AS(build_group_model({u}, 0, 16), ClosureExceeded);
}

TEST_CASE("non-unitary generator raises") {
    CHECK_THROWS_AS(build_group_model({diag2(2.0, 1.0)}, 0), NotUnitary);
}

TEST_CASE("check_equivariance measures the commutator defect") {
    auto model = z2_model();
    Matrix swap = Matrix::Zero(2, 2);
    swap(0, 1) = 1.0;
    swap(1, 0) = 1.0;
    CHECK(check_equivariance(model, swap) == doctest::Approx(2.0));
    CHECK(check_equivariance(model, diag2(4.0, -1.0)) == doctest::Approx(0.0));
}

TEST_CASE("random_equivariant_hermitian is equivariant, Hermitian, scaled, reproducible") {
    auto model = s3_model();
    Matrix a = random_equivariant_hermitian(model, 77, 1.5);
    Matrix b = random_equivariant_hermitian(model, 77, 1.5);
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
    CHECK(hermiticity_defect(a) < 1e-12);
    CHECK(check_equivariance(model, a) < 1e-10);
    HermEig eig = herm_eig(a);
    double radius = 0.0;
    for (Eigen::Index i = 0; i < eig.w.size(); ++i)
        radius = std::max(radius, std::abs(eig.w(i)));
    CHECK(radius == doctest::Approx(1.5));
}

TEST_CASE("sign_and_kernel splits spectrum with sign(0) = 0") {
    Matrix d = Matrix::Zero(3, 3);
    d(0, 0) = 3.0;
    d(1, 1) = -2.0;
    d(2, 2) = 0.0;
    SignKernel sk = sign_and_kernel(d);
    Matrix sgn = Matrix::Zero(3, 3);
    sgn(0, 0) = 1.0;
    sgn(1, 1) = -1.0;
    Matrix ker = Matrix::Zero(3, 3);
    ker(2, 2) = 1.0;
    check_close(sk.sign0, sgn, 1e-14);
    check_close(sk.ker_proj, ker, 1e-14);
    CHECK(sk.gap == doctest::Approx(2.0));
}

TEST_CASE("sign_and_kernel algebra: sign0^2 + ker = identity, commutes with D") {
    Rng rng(21);
    Matrix h = random_hermitian(rng, 6);
    Matrix d = h * h - 0.5 * Matrix::Identity(6, 6); // generic spectrum
    SignKernel sk = sign_and_kernel(d);
    check_close(sk.sign0 * sk.sign0 + sk.ker_proj, Matrix::Identity(6, 6), 1e-12);
    check_close(sk.sign0 * d, d * sk.sign0, 1e-12);
    check_close(sk.ker_proj * sk.ker_proj, sk.ker_proj, 1e-12);
}

TEST_CASE("sign_and_kernel on all-zero operator reports infinite gap") {
    SignKernel sk = sign_and_kernel(Matrix::Zero(2, 2));
    CHECK(std::isinf(sk.gap));
    check_close(sk.ker_proj, Matrix::Identity(2, 2), 1e-14);
    check_close(sk.sign0, Matrix::Zero(2, 2), 1e-14);
}

TEST_CASE("circle model at alpha = pi closes to order two") {
    CircleModel cm = circle_dirac_model(7, 0.5, std::numbers::pi);
    CHECK(cm.model.order() == 2);
    CHECK(cm.model.dim() == 15);
    SignKernel sk = sign_and_kernel(cm.d);
    // truncated alternating sign sum collapses to exactly one
    check_close(delocalized_trace(cm.model, sk.sign0), Complex(1.0, 0.0), 1e-12);
}

TEST_CASE("circle model at alpha = 0 is the trivial twist") {
    CircleModel cm = circle_dirac_model(3, 0.5, 0.0);
    CHECK(cm.model.order() == 1);
    SignKernel sk = sign_and_kernel(cm.d);
    // ordinary truncated sign sum: one unpaired positive mode
    check_close(delocalized_trace(cm.model, sk.sign0), Complex(1.0, 0.0), 1e-12);
}

TEST_CASE("direct_sum doubles the space and adds traces") {
    auto model = z2_model();
    auto sum = model.direct_sum(model);
    CHECK(sum.dim() == 4);
    CHECK(sum.order() == 2);
    Matrix t = Matrix::Zero(4, 4);
    t.topLeftCorner(2, 2) = diag2(2.0, 3.0);
    t.bottomRightCorner(2, 2) = diag2(5.0, 7.0);
    check_close(delocalized_trace(sum, t), Complex(-1.0 + -2.0, 0.0), 1e-13);
}

} // TEST_SUITE
