#include "doctest.h"
#include "test_util.hpp"

#include "etaforge/errors.hpp"
#include "etaforge/eta.hpp"

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

// U_g = diag(1, e^{2πi/m}): a faithful character pair on two points.
EquivariantModel phase_model(int m) {
    const double theta = 2.0 * std::numbers::pi / m;
    return build_group_model({diag2(1.0, std::polar(1.0, theta))}, 0);
}

EquivariantModel z2_model() {
    return build_group_model({diag2(1.0, -1.0)}, 0);
}

EquivariantModel trivial_model(int n) {
    return build_group_model({Matrix::Identity(n, n)}, 0);
}

// Seeded model zoo for the oracle-identity sweep: trivial, sign-graded, and
// order-four characters of varying dimension.
EquivariantModel seeded_model(int seed) {
    const int n = 2 + seed % 17;
    switch (seed % 3) {
    case 0:
        return trivial_model(n);
    case 1: {
        Matrix u = Matrix::Identity(n, n);
        for (int j = n / 2; j < n; ++j)
            u(j, j) = -1.0;
        return build_group_model({u}, 0);
    }
    default: {
        Matrix u = Matrix::Identity(n, n);
        for (int j = 0; j < n; ++j)
            u(j, j) = std::polar(1.0, 0.5 * std::numbers::pi * (j % 4));
        return build_group_model({u}, 0);
    }
    }
}

void check_report_invariant(const EtaReport& report) {
    REQUIRE(report.oracle_value.has_value());
    const double err = std::abs(report.value - *report.oracle_value);
    CAPTURE(err);
    CHECK(err <= report.quadrature_error + report.tail_bound);
}

} // namespace

TEST_SUITE("eta") {

TEST_CASE("two-point spectral asymmetry matches the character defect") {
    const auto model = phase_model(5);
    const Complex omega = std::polar(1.0, 2.0 * std::numbers::pi / 5);
    const Matrix d = diag2(1.0, -1.0);

    const EtaReport report = eta_quadrature(d, model);
    check_close(report.value, Complex(1.0) - omega, 1e-10);
    check_report_invariant(report);
    check_close(eta_oracle(d, model), Complex(1.0) - omega, 1e-12);

    const EtaReport sym = eta_quadrature(Matrix(diag2(1.0, 1.0)), model);
    check_close(sym.value, Complex(1.0) + omega, 1e-10);
}

TEST_CASE("quadrature validates its inputs") {
    const auto model = z2_model();
    Matrix bad = Matrix::Zero(2, 2);
    bad(0, 1) = 1.0;
    CHECK_THROWS_AS(eta_quadrature(bad, model), NotHermitian);

    Matrix swap = Matrix::Zero(2, 2);
    swap(0, 1) = 1.0;
    swap(1, 0) = 1.0;
    CHECK_THROWS_AS(eta_quadrature(swap, model), NotEquivariant);

    CHECK_THROWS_AS(eta_quadrature(Matrix::Identity(3, 3), model), DimensionMismatch);

    EtaQuad quad;
    quad.n_nodes = 4;
    CHECK_THROWS_AS(eta_quadrature(diag2(1.0, -1.0), model, quad), ConfigError);
}

TEST_CASE("zero operator reports zero with a zero oracle") {
    const auto model = z2_model();
    const EtaReport report = eta_quadrature(Matrix::Zero(2, 2), model);
    check_close(report.value, Complex(0.0), 0.0);
    check_close(*report.oracle_value, Complex(0.0), 0.0);
}

TEST_CASE("quadrature agrees with the sign oracle across seeded models") {
    for (int seed = 0; seed < 100; ++seed) {
        CAPTURE(seed);
        const auto model = seeded_model(seed);
        const Matrix d = random_equivariant_hermitian(model, 1000 + seed, 2.0);
        const EtaReport report = eta_quadrature(d, model);
        check_report_invariant(report);
        check_close(*report.oracle_value, eta_oracle(d, model), 1e-13);
    }
}

TEST_CASE("spectral asymmetry is odd in the operator") {
    for (int seed = 0; seed < 6; ++seed) {
        CAPTURE(seed);
        const auto model = seeded_model(seed);
        const Matrix d = random_equivariant_hermitian(model, 2000 + seed, 1.5);
        const Complex plus = eta_quadrature(d, model).value;
        const Complex minus = eta_quadrature(Matrix(-d), model).value;
        check_close(plus + minus, Complex(0.0), 1e-10);
    }
}

TEST_CASE("circle truncations extrapolate to one") {
    const double alpha = std::numbers::pi;
    const CircleModel a = circle_dirac_model(59, 0.5, alpha);
    const CircleModel b = circle_dirac_model(60, 0.5, alpha);
    const EtaReport ra = eta_quadrature(a.d, a.model);
    const EtaReport rb = eta_quadrature(b.d, b.model);
    check_report_invariant(ra);
    check_report_invariant(rb);
    const Complex avg = 0.5 * (ra.value + rb.value);
    check_close(avg, Complex(1.0), 1e-3);
}

TEST_CASE("gap sweep reproduces the kernel-corrected limit") {
    const auto model = z2_model();
    const Matrix d = diag2(0.0, 1.0);
    const std::vector<double> grid{1e-1, 1e-2, 1e-3};

    const GapSweep sweep = eta_gap_sweep(d, model, grid);
    check_close(sweep.limit_value, Complex(0.0), 1e-10);
    REQUIRE(sweep.reports.size() == grid.size());

    double worst_err = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const EtaReport& r = sweep.reports[i];
        REQUIRE(r.theta.has_value());
        CHECK(*r.theta == grid[i]);
        check_close(r.value, Complex(0.0), 1e-10);
        check_report_invariant(r);
        worst_err = std::max(worst_err, r.quadrature_error);
    }
    for (const EtaReport& r : sweep.reports)
        for (const EtaReport& s : sweep.reports)
            CHECK(std::abs(r.value - s.value) <= 2.0 * worst_err);
}

TEST_CASE("gap sweep is flat for invertible operators") {
    const auto model = trivial_model(3);
    Matrix d = Matrix::Zero(3, 3);
    d(0, 0) = 1.0;
    d(1, 1) = -2.0;
    d(2, 2) = 3.0;
    const GapSweep sweep = eta_gap_sweep(d, model, {0.2, 0.5, 0.9});
    check_close(sweep.limit_value, eta_quadrature(d, model).value, 1e-12);
    for (const EtaReport& r : sweep.reports)
        check_close(r.value, sweep.limit_value, 1e-10);
}

TEST_CASE("gap sweep rejects theta outside the gap") {
    const auto model = z2_model();
    const Matrix d = diag2(0.0, 1.0);
    CHECK_THROWS_AS(eta_gap_sweep(d, model, {1.5}), GapViolation);
    CHECK_THROWS_AS(eta_gap_sweep(d, model, {1.0}), GapViolation);
    CHECK_THROWS_AS(eta_gap_sweep(d, model, {0.0}), GapViolation);
    CHECK_THROWS_AS(eta_gap_sweep(d, model, {-0.1}), GapViolation);
}

TEST_CASE("invertibilize scales the kernel projector") {
    const auto model = trivial_model(2);
    const Matrix d = diag2(0.0, 3.0);
    check_close(invertibilize(d, model, 0.1), diag2(0.1, 0.0), 1e-14);

    CHECK_THROWS_AS(invertibilize(d, model, 3.0), GapViolation);
    CHECK_THROWS_AS(invertibilize(d, model, -0.5), GapViolation);

    const Matrix inv = diag2(1.0, -2.0);
    check_close(invertibilize(inv, model, 0.5), Matrix(Matrix::Zero(2, 2)), 0.0);
}

TEST_CASE("perturbed eta routes agree with the direct sum") {
    const auto model = z2_model();
    const Matrix d = diag2(1.0, -1.0);
    const Matrix c = diag2(0.3, -0.2);
    EtaQuad quad;
    quad.n_nodes = 64;

    const EtaReport direct = eta_perturbed(d, c, model, quad, EtaRoute::Direct);
    const EtaReport series = eta_perturbed(d, c, model, quad, EtaRoute::Volterra);
    const EtaReport plain = eta_quadrature(Matrix(d + c), model, quad);

    check_close(direct.value, plain.value, 1e-12);
    check_close(series.value, direct.value, 1e-8);
    check_report_invariant(direct);
    check_report_invariant(series);
}

TEST_CASE("perturbing to a positive multiple of the identity sums the character") {
    const auto model = phase_model(3);
    const Complex omega = std::polar(1.0, 2.0 * std::numbers::pi / 3);
    const Matrix d = diag2(1.0, -1.0);
    const Matrix c = Matrix(0.7 * Matrix::Identity(2, 2)) - d;
    const EtaReport report = eta_perturbed(d, c, model);
    check_close(report.value, Complex(1.0) + omega, 1e-10);
}

TEST_CASE("perturbed eta rejects a closed gap") {
    const auto model = z2_model();
    const Matrix d = diag2(1.0, -1.0);
    CHECK_THROWS_AS(eta_perturbed(d, Matrix(-d), model), NotInvertible);
}

TEST_CASE("stability sweep is constant along invertible paths") {
    const auto model = z2_model();
    const Matrix d = diag2(1.0, -2.0);
    const auto path = [](double r) { return diag2(0.5 * r, r); };
    const std::vector<double> grid{0.0, 0.25, 0.5, 0.75, 1.0};

    const auto rows = eta_stability_sweep(d, path, model, grid);
    REQUIRE(rows.size() == grid.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        REQUIRE(rows[i].theta.has_value());
        CHECK(*rows[i].theta == grid[i]);
        check_close(rows[i].value, rows[0].value, 1e-8);
        check_report_invariant(rows[i]);
    }
}

TEST_CASE("stability sweep pinpoints the first crossing") {
    const auto model = trivial_model(2);
    const Matrix d = diag2(1.0, -2.0);
    const auto path = [](double r) { return diag2(-2.0 * r, 0.0); };
    try {
        eta_stability_sweep(d, path, model, {0.0, 0.25, 0.5, 0.75});
        FAIL("expected GapClosed");
    } catch (const GapClosed& e) {
        CHECK(e.r == doctest::Approx(0.5));
    }
}

TEST_CASE("rho difference of identical invertible operators vanishes") {
    const auto model = z2_model();
    const Matrix d = diag2(1.3, -0.8);
    const EtaReport report = rho_number(d, d, model, 0.1);
    check_close(report.value, Complex(0.0), 1e-10);
    check_report_invariant(report);
}

TEST_CASE("rho of trivial characters vanishes") {
    const auto model = trivial_model(1);
    const Matrix d1 = Matrix::Constant(1, 1, 1.0);
    const Matrix d2 = Matrix::Constant(1, 1, 2.0);
    const EtaReport report = rho_number(d1, d2, model, 0.3);
    check_close(report.value, Complex(0.0), 1e-10);
}

TEST_CASE("rho is independent of the invertibilizing scale") {
    const auto model = trivial_model(2);
    const Matrix d1 = diag2(0.0, 1.0);
    const Matrix d2 = diag2(0.0, 2.0);
    const Complex a = rho_number(d1, d2, model, 1e-2).value;
    const Complex b = rho_number(d1, d2, model, 1e-3).value;
    const Complex c = rho_number(d1, d2, model, 1e-4).value;
    check_close(a, b, 1e-8);
    check_close(b, c, 1e-8);
}

TEST_CASE("symmetric perturbation leaves eta to the unperturbed summand") {
    Matrix uplus = diag2(1.0, -1.0);
    Matrix uminus = Matrix::Identity(2, 2);
    const GradedModel model = make_graded_model({uplus}, {uminus}, 0);

    const Matrix dv = diag2(2.0, -1.0);
    const Matrix dw = diag2(0.8, -0.8);
    Matrix iw = Matrix::Zero(2, 2);
    iw(0, 1) = 1.0;
    iw(1, 0) = 1.0;
    Matrix b = Matrix::Zero(2, 2);
    b(0, 1) = Complex(0.0, -0.4);
    b(1, 0) = Complex(0.0, 0.4);

    const auto [lhs, rhs] = symmetric_perturbation_check(dv, dw, iw, b, model);
    check_close(lhs.value, rhs.value, 1e-10);
    check_close(rhs.value, Complex(2.0), 1e-10);

    const auto [l0, r0] =
        symmetric_perturbation_check(dv, dw, iw, Matrix(Matrix::Zero(2, 2)), model);
    check_close(l0.value, r0.value, 1e-10);
}

TEST_CASE("symmetric perturbation rejects even perturbations") {
    Matrix uplus = diag2(1.0, -1.0);
    Matrix uminus = Matrix::Identity(2, 2);
    const GradedModel model = make_graded_model({uplus}, {uminus}, 0);

    const Matrix dv = diag2(2.0, -1.0);
    const Matrix dw = diag2(0.8, -0.8);
    Matrix iw = Matrix::Zero(2, 2);
    iw(0, 1) = 1.0;
    iw(1, 0) = 1.0;

    CHECK_THROWS_AS(symmetric_perturbation_check(dv, dw, iw, iw, model), NotOdd);
    CHECK_THROWS_AS(
        symmetric_perturbation_check(dv, Matrix(Matrix::Identity(2, 2)), iw,
                                     Matrix(Matrix::Zero(2, 2)), model),
        NotOdd);
}

TEST_CASE("regularized limit recovers the constant term") {
    std::vector<std::pair<double, Complex>> samples;
    for (int j = 1; j <= 8; ++j) {
        const double s = 0.1 * j;
        samples.push_back({s, 2.0 / (s * s) + 3.0 / s + 5.0 + 7.0 * s});
    }
    check_close(regularized_limit(samples, 3), Complex(5.0), 1e-8);

    samples.clear();
    for (int j = 1; j <= 8; ++j) {
        const double s = 0.1 * j;
        const Complex v = 4.0 * std::pow(s, -1.5) - 2.0 * std::pow(s, -0.5) + 6.0 +
                          std::sqrt(s) * Complex(0.0, 1.0);
        samples.push_back({s, v});
    }
    check_close(regularized_limit(samples, 2), Complex(6.0), 1e-8);

    samples.clear();
    for (int j = 1; j <= 6; ++j) {
        const double s = 0.2 * j;
        samples.push_back({s, Complex(1.0, 2.0) + Complex(0.0, 3.0) / s});
    }
    check_close(regularized_limit(samples, 1), Complex(1.0, 2.0), 1e-8);

    samples.resize(2);
    CHECK_THROWS_AS(regularized_limit(samples, 10), Error);
}

} // TEST_SUITE
