#include "etaforge/opmodel.hpp"
#include "etaforge/errors.hpp"

#include <cmath>
#include <string>

namespace etaforge {

namespace {

int find_element(const std::vector<Matrix>& elems, const Matrix& m, double tol = 1e-10) {
    for (std::size_t i = 0; i < elems.size(); ++i) {
        if ((elems[i] - m).cwiseAbs().maxCoeff() <= tol) return static_cast<int>(i);
    }
    return -1;
}

} // namespace

EquivariantModel build_group_model(const std::vector<Matrix>& generators,
                                   int g_index, int max_order) {
    EquivariantModel model;
    if (generators.empty())
        throw ConfigError("build_group_model: need at least one generator");
    const int dim = static_cast<int>(generators[0].rows());
    for (const auto& u : generators) {
        if (u.rows() != u.cols() || static_cast<int>(u.rows()) != dim)
            throw DimensionMismatch("build_group_model: generators must be square with equal size");
        if (unitarity_defect(u) > 1e-10)
            throw NotUnitary("build_group_model: generator is not unitary");
    }
    if (g_index < 0 || g_index >= static_cast<int>(generators.size()))
        throw ConfigError("build_group_model: g_index out of range");

    model.dim_ = dim;
    model.elements_.push_back(Matrix::Identity(dim, dim));
    std::vector<int> gen_pos;
    for (const auto& u : generators) {
        int idx = find_element(model.elements_, u);
        if (idx < 0) {
            model.elements_.push_back(u);
            idx = static_cast<int>(model.elements_.size()) - 1;
        }
        gen_pos.push_back(idx);
    }

    // Breadth-first closure under right multiplication by generators.
    for (std::size_t i = 0; i < model.elements_.size(); ++i) {
        for (int gp : gen_pos) {
            Matrix prod = model.elements_[i] * model.elements_[gp];
            if (find_element(model.elements_, prod) < 0) {
                if (static_cast<int>(model.elements_.size()) >= max_order)
                    throw ClosureExceeded("build_group_model: closure exceeds cap of " +
                                          std::to_string(max_order) + " elements");
                model.elements_.push_back(std::move(prod));
            }
        }
    }

    model.g_index_ = gen_pos[g_index];
    model.finalize();
    return model;
}

void EquivariantModel::finalize() {
    const int n = order();
    mul_table_.assign(n, std::vector<int>(n, -1));
    inv_table_.assign(n, -1);
    for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
            int idx = find_element(elements_, elements_[a] * elements_[b]);
            if (idx < 0) throw Error("EquivariantModel: element set is not closed");
            mul_table_[a][b] = idx;
            if (idx == 0) inv_table_[a] = b;
        }
        if (inv_table_[a] < 0) throw Error("EquivariantModel: element has no inverse");
    }

    // Left-coset transversal of the centralizer Z(g).
    std::vector<int> centralizer;
    for (int h = 0; h < n; ++h)
        if (mul_table_[h][g_index_] == mul_table_[g_index_][h]) centralizer.push_back(h);
    std::vector<bool> covered(n, false);
    coset_reps_.clear();
    for (int h = 0; h < n; ++h) {
        if (covered[h]) continue;
        coset_reps_.push_back(h);
        for (int z : centralizer) covered[mul_table_[h][z]] = true;
    }
}

EquivariantModel EquivariantModel::with_marked(int new_g_index) const {
    if (new_g_index < 0 || new_g_index >= order())
        throw ConfigError("with_marked: index out of range");
    EquivariantModel m = *this;
    m.g_index_ = new_g_index;
    m.finalize();
    return m;
}

EquivariantModel EquivariantModel::with_marked_inverse() const {
    return with_marked(inv_table_[g_index_]);
}

EquivariantModel EquivariantModel::direct_sum(const EquivariantModel& other) const {
    if (order() != other.order() || g_index_ != other.g_index_ ||
        mul_table_ != other.mul_table_)
        throw NotEquivariant("direct_sum: group structures do not match element by element");
    EquivariantModel m;
    m.dim_ = dim_ + other.dim_;
    m.g_index_ = g_index_;
    for (int i = 0; i < order(); ++i) {
        Matrix u = Matrix::Zero(m.dim_, m.dim_);
        u.topLeftCorner(dim_, dim_) = elements_[i];
        u.bottomRightCorner(other.dim_, other.dim_) = other.elements_[i];
        m.elements_.push_back(std::move(u));
    }
    m.finalize();
    return m;
}

Complex delocalized_trace(const EquivariantModel& model, const Matrix& t) {
    if (t.rows() != model.dim() || t.cols() != model.dim())
        throw DimensionMismatch("delocalized_trace: operator size does not match model");
    const Matrix& ug = model.g_unitary();
    Complex total(0.0, 0.0);
    double max_abs = 0.0;
    std::vector<Complex> summands;
    summands.reserve(model.coset_reps().size());
    for (int h : model.coset_reps()) {
        const Matrix& uh = model.unitary(h);
        Complex s = (uh * ug * uh.adjoint() * t).trace();
        summands.push_back(s);
        max_abs = std::max(max_abs, std::abs(s));
        total += s;
    }
    for (const Complex& s : summands) {
        if (std::abs(s - summands[0]) > 1e-10 * (1.0 + max_abs))
            throw NotEquivariant(
                "delocalized_trace: coset summands disagree; operator is not equivariant");
    }
    return total;
}

double check_equivariance(const EquivariantModel& model, const Matrix& t) {
    if (t.rows() != model.dim() || t.cols() != model.dim())
        throw DimensionMismatch("check_equivariance: operator size does not match model");
    double worst = 0.0;
    for (int i = 0; i < model.order(); ++i) {
        const Matrix& u = model.unitary(i);
        worst = std::max(worst, op_norm(t * u - u * t));
    }
    return worst;
}

bool is_equivariant(const EquivariantModel& model, const Matrix& t, double tol_rel) {
    return check_equivariance(model, t) <= tol_rel * (1.0 + op_norm(t));
}

Matrix random_equivariant_hermitian(const EquivariantModel& model,
                                    std::uint64_t seed, double spectral_scale) {
    Rng rng(seed);
    Matrix h0 = random_hermitian(rng, model.dim());
    Matrix avg = Matrix::Zero(model.dim(), model.dim());
    for (int i = 0; i < model.order(); ++i) {
        const Matrix& u = model.unitary(i);
        avg += u * h0 * u.adjoint();
    }
    avg /= static_cast<double>(model.order());
    avg = (avg + avg.adjoint()) / 2.0;
    HermEig eig = herm_eig(avg);
    double radius = std::max(std::abs(eig.w(0)), std::abs(eig.w(eig.w.size() - 1)));
    if (radius > 0.0) avg *= spectral_scale / radius;
    return avg;
}

SignKernel sign_and_kernel(const Matrix& d, double kernel_tol) {
    if (kernel_tol < 0.0) kernel_tol = 1e-10;
    HermEig eig = herm_eig(d);
    const auto n = eig.w.size();
    double radius = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) radius = std::max(radius, std::abs(eig.w(i)));
    const double cut = kernel_tol * radius;

    SignKernel out;
    RealVector sgn(n), ker(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double w = eig.w(i);
        if (std::abs(w) <= cut) {
            sgn(i) = 0.0;
            ker(i) = 1.0;
        } else {
            sgn(i) = w > 0.0 ? 1.0 : -1.0;
            ker(i) = 0.0;
            out.gap = std::min(out.gap, std::abs(w));
        }
    }
    out.sign0 = eig.v * sgn.asDiagonal() * eig.v.adjoint();
    out.ker_proj = eig.v * ker.asDiagonal() * eig.v.adjoint();
    return out;
}

CircleModel circle_dirac_model(int k_max, double shift, double alpha) {
    if (k_max < 0) throw ConfigError("circle_dirac_model: k_max must be nonnegative");
    const int n = 2 * k_max + 1;
    Matrix d = Matrix::Zero(n, n);
    Matrix u = Matrix::Zero(n, n);
    for (int k = -k_max; k <= k_max; ++k) {
        const int i = k + k_max;
        d(i, i) = Complex(static_cast<double>(k) + shift, 0.0);
        u(i, i) = std::exp(Complex(0.0, static_cast<double>(k) * alpha));
    }
    CircleModel cm{build_group_model({u}, 0), d};
    return cm;
}

} // namespace etaforge
