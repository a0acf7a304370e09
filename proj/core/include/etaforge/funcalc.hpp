#pragma once

#include "etaforge/linalg.hpp"

#include <vector>

namespace etaforge {

// Integration contour for holomorphic functional calculus. A wedge is a pair
// of half-lines Im z = ±m (Re z − b) opening to the right of the vertex b;
// a circle of radius sigma is centered at the origin.
struct ContourSpec {
    enum class Kind { Wedge, Circle };
    Kind kind = Kind::Wedge;
    double m = 0.5;              // half-line slope
    double b = 0.0;              // wedge vertex; 0 means auto (half the spectral bottom)
    double sigma = 0.0;          // circle radius
    int n_nodes = 256;           // node budget per half-line, or circle node count
    double truncation_tol = 1e-16;
};

// (D2 - lambda)^{-1}. Refuses points closer to the spectrum than
// 1e-12 * ||D2||.
Matrix resolvent(const Matrix& d2, Complex lambda);

// f of a Hermitian or normal matrix through its eigenvalues.
Matrix spectral_function(const Matrix& a, const std::function<Complex(Complex)>& f);

// e^{-t D2} as the contour integral (1/2pi i) \oint e^{-t z} (D2 - z)^{-1} dz
// over a wedge enclosing the spectrum. D2 must be Hermitian with spectrum
// strictly above the vertex. Composite Gauss-Legendre on geometrically graded
// arclength panels per half-line; the node count is doubled once and the two
// results must agree to 1e-8.
Matrix contour_heat(const Matrix& d2, double t, const ContourSpec& spec = {});

// Riesz projector onto the kernel: (1/2pi i) \oint_{|z|=sigma} (z - D2)^{-1} dz
// by the uniform trapezoid rule (64 nodes). The circle must separate 0 from
// the rest of the spectrum with a factor-2 margin.
Matrix contour_projector(const Matrix& d2, double sigma);

// Graded heat idempotent of the odd block a_plus at scale t, assembled from
// heat factors of t^2 A^- A^+ / t^2 A^+ A^- and the entire function
// phi(z) = (1 - e^{-z})/z. Idempotent for every t; not self-adjoint.
// a_plus may be rectangular (rows index the odd target component).
Matrix cm_projector(const Matrix& a_plus, double t);

struct DecayRow {
    double t;
    double norm;    // ||e^{-t (D+C)^2}||
    double bound;   // e^{-4 a^2 t} with 2a the spectral gap of D + C
};

// Heat decay of the perturbed square against the gap bound. D + C must be
// Hermitian and invertible.
std::vector<DecayRow> decay_profile(const Matrix& d, const Matrix& c,
                                    const std::vector<double>& t_grid);

} // namespace etaforge
