#pragma once

#include <doctest.h>

#include "etaforge/linalg.hpp"

namespace etaforge::testutil {

inline void check_close(Complex a, Complex b, double tol) {
    CAPTURE(a.real());
    CAPTURE(a.imag());
    CAPTURE(b.real());
    CAPTURE(b.imag());
    CHECK(std::abs(a - b) <= tol);
}

inline void check_close(const Matrix& a, const Matrix& b, double tol) {
    REQUIRE(a.rows() == b.rows());
    REQUIRE(a.cols() == b.cols());
    const double d = (a - b).cwiseAbs().maxCoeff();
    CAPTURE(d);
    CHECK(d <= tol);
}

} // namespace etaforge::testutil
