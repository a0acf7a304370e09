#pragma once

#include "etaforge/opmodel.hpp"

#include <utility>
#include <vector>

namespace etaforge {

// (D + C)^2 split into the unperturbed square and the cross terms.
struct PerturbedSquare {
    Matrix d2;
    Matrix a;   // C^2 + DC + CD
};
PerturbedSquare perturbed_square(const Matrix& d, const Matrix& c);

struct VolterraResult {
    Matrix value;
    int terms_used = 0;      // series terms per splitting step
    double tail_bound = 0.0; // declared truncation bound, <= requested tol
};

enum class VolterraRoute {
    DividedDifference, // block-bidiagonal exponential in the eigenbasis of D2
    Duhamel,           // recursive integral iteration on a Chebyshev grid
};

// e^{-t (D2 + A)} through the iterated-integral series
//   sum_k (-t)^k \int_{simplex} e^{-s_0 t D2} A ... A e^{-s_k t D2} ds.
// The time interval is split in halves until t ||A|| <= 1 per step, the series
// is truncated where the majorant tail drops below tol / steps, and the step
// operator is squared back up. Both routes must agree with the dense
// exponential to within 2 tol.
VolterraResult volterra_heat(const Matrix& d2, const Matrix& a, double t, double tol,
                             VolterraRoute route = VolterraRoute::DividedDifference);

// || K e^{-delta (D+C)^2} - K ||, asserted against
// delta * m_prime * ||(D+C)^2 K|| + (1 - e^{-delta}) ||K||.
double small_time_defect(const Matrix& k, const Matrix& d, const Matrix& c,
                         double delta, double m_prime = 1.0);

// One group acting block-diagonally on a graded space V+ ⊕ V-; the odd block
// maps the plus component into the minus one. Built as a single closure so
// both components share the group structure even when one restriction is not
// faithful.
struct GradedModel {
    EquivariantModel joint;
    int dim_plus = 0;
    int dim_minus = 0;

    Matrix embed_plus(const Matrix& x) const;   // blockdiag(x, 0)
    Matrix embed_minus(const Matrix& y) const;  // blockdiag(0, y)
    // blockdiag(x, -y): the graded combination whose delocalized trace is the
    // supertrace.
    Matrix embed_graded(const Matrix& x, const Matrix& y) const;
    // [[0, 0], [a_plus, 0]]
    Matrix embed_odd(const Matrix& a_plus) const;
};

GradedModel make_graded_model(const std::vector<Matrix>& gen_plus,
                              const std::vector<Matrix>& gen_minus, int g_index,
                              int max_order = 10000);

struct SupertracePoint {
    double t;
    Complex value;
};

struct SupertraceReport {
    std::vector<SupertracePoint> points;
    Complex kernel_value; // tau_g(P_ker A+) - tau_g(P_ker A-)
};

// Delocalized supertrace tau_g(e^{-t A- A+}) - tau_g(e^{-t A+ A-}) over a
// t grid. Constant in t and equal to the kernel-projector difference.
SupertraceReport mckean_singer(const Matrix& a_plus, const GradedModel& model,
                               const std::vector<double>& t_grid);

} // namespace etaforge
