#pragma once

#include "etaforge/linalg.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace etaforge {

// Finite unitary representation of a finite group with a marked element g.
// Elements are stored closed under product and inverse; index 0 is the
// identity. coset_reps index a transversal of the centralizer Z(g).
class EquivariantModel {
public:
    int dim() const { return dim_; }
    int order() const { return static_cast<int>(elements_.size()); }
    int g_index() const { return g_index_; }
    const Matrix& unitary(int i) const { return elements_[i]; }
    const Matrix& g_unitary() const { return elements_[g_index_]; }
    const std::vector<int>& coset_reps() const { return coset_reps_; }

    int multiply(int a, int b) const { return mul_table_[a][b]; }
    int inverse(int a) const { return inv_table_[a]; }

    // Same group, different marked element.
    EquivariantModel with_marked(int new_g_index) const;
    // Marked element replaced by its inverse.
    EquivariantModel with_marked_inverse() const;

    // Block direct sum of the representation with itself (or with another
    // model over the same abstract group, matched element by element).
    EquivariantModel direct_sum(const EquivariantModel& other) const;

    friend EquivariantModel build_group_model(const std::vector<Matrix>& generators,
                                              int g_index, int max_order);

private:
    void finalize();

    int dim_ = 0;
    int g_index_ = 0;
    std::vector<Matrix> elements_;
    std::vector<std::vector<int>> mul_table_;
    std::vector<int> inv_table_;
    std::vector<int> coset_reps_;
};

// Closes the generated group (cap max_order, default 10000). g_index refers
// to the generator list as passed; generators equal to the identity or to
// each other are deduplicated but keep addressable positions.
EquivariantModel build_group_model(const std::vector<Matrix>& generators,
                                   int g_index, int max_order = 10000);

// tau_g(T) = sum over coset reps h of tr(U_{h g h^-1} T). For equivariant T
// every summand agrees; enforced within 1e-10 relative.
Complex delocalized_trace(const EquivariantModel& model, const Matrix& t);

// max over group elements of ||[T, U_gamma]||.
double check_equivariance(const EquivariantModel& model, const Matrix& t);

bool is_equivariant(const EquivariantModel& model, const Matrix& t,
                    double tol_rel = 1e-10);

// Group average of a seeded random Hermitian matrix, rescaled to the given
// spectral radius. Bitwise reproducible for a fixed seed.
Matrix random_equivariant_hermitian(const EquivariantModel& model,
                                    std::uint64_t seed, double spectral_scale);

struct SignKernel {
    Matrix sign0;     // sign of D with sign(0) = 0
    Matrix ker_proj;  // spectral projector onto the kernel
    double gap = std::numeric_limits<double>::infinity(); // min |nonzero eigenvalue|
};

// Spectral sign and kernel data of a Hermitian D. Eigenvalues with
// |lambda| <= kernel_tol * spectral_radius count as kernel; kernel_tol < 0
// selects the default 1e-10.
SignKernel sign_and_kernel(const Matrix& d, double kernel_tol = -1.0);

// Truncated circle model: D = diag(k + shift), U_g = diag(e^{i k alpha}),
// k = -K..K. alpha must generate a finite cyclic group within the closure cap.
struct CircleModel {
    EquivariantModel model;
    Matrix d;
};
CircleModel circle_dirac_model(int k_max, double shift, double alpha);

} // namespace etaforge
