#pragma once

#include "etaforge/heatflow.hpp"
#include "etaforge/opmodel.hpp"

#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace etaforge {

// Quadrature parameters for the spectral asymmetry integral after the u = √t
// substitution. u_max = 0 selects 8 / gap, far past the slowest Gaussian.
struct EtaQuad {
    int n_nodes = 256;
    double u_max = 0.0;
};

struct EtaReport {
    Complex value;
    double quadrature_error = 0.0; // node-halving estimate plus roundoff floor
    double tail_bound = 0.0;       // analytic bound on the truncated tail
    std::optional<Complex> oracle_value;
    std::optional<double> theta;   // sweep coordinate when part of a table
};

// (2/√π) ∫_0^U τ_g(D e^{-u² D²}) du by Gauss-Legendre; kernel eigenvalues
// contribute nothing, so a spectral gap around the remaining spectrum fixes U.
EtaReport eta_quadrature(const Matrix& d, const EquivariantModel& model,
                         const EtaQuad& quad = {});

// τ_g(sign₀(D)): the closed-form value of the same integral.
Complex eta_oracle(const Matrix& d, const EquivariantModel& model);

enum class EtaRoute {
    Direct,   // heat factors by eigendecomposition
    Volterra, // heat factors through the iterated-integral series
};

// Spectral asymmetry of D + C for an equivariant Hermitian perturbation C
// keeping D + C invertible.
EtaReport eta_perturbed(const Matrix& d, const Matrix& c, const EquivariantModel& model,
                        const EtaQuad& quad = {}, EtaRoute route = EtaRoute::Direct);

struct GapSweep {
    std::vector<EtaReport> reports; // theta carries the grid point
    Complex limit_value;            // eta(D) + τ_g(P_ker)
};

// eta of D + Θ·I for Θ inside the spectral gap: the kernel flows to +Θ and
// integrates exactly, the rest is quadrature. Asserts the gap-limit identity
// eta(Θ) = eta(D) + τ_g(P_ker) for every grid point.
GapSweep eta_gap_sweep(const Matrix& d, const EquivariantModel& model,
                       const std::vector<double>& theta_grid, const EtaQuad& quad = {});

// eps·P_ker(D): the canonical finite-rank perturbation making D invertible.
Matrix invertibilize(const Matrix& d, const EquivariantModel& model, double eps);

// eta of D + B(r) along a path of equivariant Hermitian perturbations; every
// grid operator must stay invertible. theta carries r.
std::vector<EtaReport> eta_stability_sweep(const Matrix& d,
                                           const std::function<Matrix(double)>& path,
                                           const EquivariantModel& model,
                                           const std::vector<double>& r_grid,
                                           const EtaQuad& quad = {});

// eta of the invertibilized difference model (D1 ⊕ -D2) over the doubled
// representation.
EtaReport rho_number(const Matrix& d1, const Matrix& d2, const EquivariantModel& model,
                     double eps, const EtaQuad& quad = {});

// For D = D_V ⊕ D_W and B odd with respect to an equivariant involution on W
// anticommuting with D_W, the W component drops out of the eta integrand.
// Returns (eta(D + 0⊕B), eta(D_V)) and asserts both the equality and the
// pointwise vanishing of the W integrand at every quadrature node.
std::pair<EtaReport, EtaReport> symmetric_perturbation_check(
    const Matrix& dv, const Matrix& dw, const Matrix& i_w, const Matrix& b,
    const GradedModel& model, const EtaQuad& quad = {});

// Coefficient of s⁰ in a least-squares fit of samples (s, f(s)) to the family
// Σ a_i s^{i-(n+1)/2} (the constant exponent is appended when the family
// misses it). With bounded data this is the plain limit.
Complex regularized_limit(const std::vector<std::pair<double, Complex>>& samples, int n,
                          int n_terms = -1);

} // namespace etaforge
