#pragma once

#include "etaforge/eta.hpp"

#include <functional>
#include <vector>

namespace etaforge {

// Even, real, rapidly decaying bump transform with value 1 at the origin;
// realized as the Gaussian e^{-eps² λ² / 2}.
struct Profile {
    double eps = 1.0;
    std::function<double(double)> evaluate;
    std::function<double(double)> derivative;
};

Profile make_profile(double eps);

// Boundary perturbation family B(λ) = D + ρ̂_ε(λ)·C with its λ-derivative.
// gamma is the verified lower bound of σ_min(iλ + B(λ)) over the admissibility
// sweep; it sets the time window of every integral downstream.
struct IndicialData {
    Matrix d_boundary;
    Matrix c_boundary;
    Profile profile;
    std::function<Matrix(double)> b;
    std::function<Matrix(double)> db;
    double gamma = 0.0;
};

// Validates the boundary pair, then halves eps (at most 20 times) until
// iλ + B(λ) clears a uniform singular-value floor on the sweep grid.
IndicialData make_indicial(const Matrix& d_b, const Matrix& c_b, const Profile& profile,
                           const EquivariantModel& model);

// The two-by-two block idempotent r(t,λ) built from the heat factors of
// H(λ) = λ² + B(λ)², with exact t- and λ-derivatives.
struct RtFamily {
    Matrix r;
    Matrix dr_dt;
    Matrix dr_dlambda;
};

RtFamily rt_family(const IndicialData& ind, double t, double lambda);

// A matrix-valued function of λ together with its exact derivative.
struct LambdaFamily {
    std::function<Matrix(double)> value;
    std::function<Matrix(double)> derivative;
};

struct SigmaQuad {
    int n_nodes = 256;
    double lambda_max = 0.0; // 0 = grow until the integrand decays out
};

// (i/2π) ∫ τ_g(A₀′(λ)·A₁(λ)) dλ. Antisymmetric under swapping the families
// whenever both decay.
Complex sigma_pairing(const LambdaFamily& a0, const LambdaFamily& a1,
                      const EquivariantModel& model, const SigmaQuad& quad = {});

// Tensor quadrature over (t, λ) ∈ (0,∞) × ℝ: u = √t outer substitution with
// the window 8/gamma, per-slice λ-panels graded geometrically out to the
// Gaussian cutoff 8/t.
struct Grid2D {
    int n_t = 128;
    int n_lambda = 128;
    double t_max = 0.0; // 0 = 8 / gamma
};

// (2πi)⁻¹ ∬ τ_g([∂_t r, r]·∂_λ r) dλ dt over the doubled representation.
Complex eta_cocycle_integral(const IndicialData& ind, const EquivariantModel& model,
                             const Grid2D& grid = {}, double* quad_error = nullptr);

// lhs = eta_cocycle_integral; rhs = −½ η_g(B(0)) through the spectral route.
struct KeyLemma {
    Complex lhs;
    Complex rhs;
    double gap;
    double lhs_error;
};

KeyLemma key_lemma_check(const IndicialData& ind, const EquivariantModel& model,
                         const Grid2D& grid = {}, const EtaQuad& quad = {});

// Pointwise identity τ_g([∂_t r, r]·∂_λ r) = −2it·τ_g(e^{−t²H}(B − λB′))
// with exact derivatives on both sides.
struct EqfeResult {
    Complex lhs;
    Complex rhs;
    double residual;
};

EqfeResult eqfe_check(const IndicialData& ind, const EquivariantModel& model, double t,
                      double lambda);

// ζ(r) = (1/π) ∬ t·τ_g(e^{−t²(λ²+B(rλ)²)}(B(rλ) − λ·∂_λ[B(rλ)])) dλ dt,
// constant in r between the Gaussian endpoint ζ(0) = ½η_g(B(0)) and the
// cocycle endpoint ζ(1).
struct ZetaRow {
    double r;
    Complex value;
    double quad_error;
};

std::vector<ZetaRow> zeta_sweep(const IndicialData& ind, const EquivariantModel& model,
                                const std::vector<double>& r_grid, const Grid2D& grid = {});

} // namespace etaforge
