#include "acceptance.hpp"

#include "report.hpp"

#include "etaforge/bcyl.hpp"
#include "etaforge/errors.hpp"
#include "etaforge/eta.hpp"
#include "etaforge/funcalc.hpp"
#include "etaforge/heatflow.hpp"
#include "etaforge/symtrace.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <thread>

namespace etaforge::cli {

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    if (n <= 0) return;
    threads = std::max(1, std::min(threads, n));
    if (threads == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex err_mtx;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lk(err_mtx);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_s(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::uint64_t mix(std::uint64_t s, std::uint64_t salt) {
    return s * 0x9e3779b97f4a7c15ull + salt;
}

const double kPi = std::acos(-1.0);

EquivariantModel seeded_model(std::uint64_t s, int max_dim) {
    const int family = static_cast<int>(s % 4);
    int dim = 2 + static_cast<int>((s * 2654435761ull) %
                                   static_cast<std::uint64_t>(std::max(1, max_dim - 1)));
    dim = std::min(dim, max_dim);
    switch (family) {
        case 0:
            return build_group_model({Matrix(Matrix::Identity(dim, dim))}, 0);
        case 1: {
            Matrix u = Matrix::Identity(dim, dim);
            for (int i = dim / 2; i < dim; ++i) u(i, i) = -1.0;
            return build_group_model({u}, 0);
        }
        case 2: {
            Matrix u = Matrix::Zero(dim, dim);
            for (int i = 0; i < dim; ++i)
                u(i, i) = std::exp(Complex(0.0, 2.0 * kPi / 3.0 * (i % 3)));
            return build_group_model({u}, 0);
        }
        default: {
            const int m = std::max(1, dim / 2);
            Matrix u = Matrix::Zero(2 * m, 2 * m);
            for (int i = 0; i < m; ++i) {
                u(i, m + i) = 1.0;
                u(m + i, i) = 1.0;
            }
            return build_group_model({u}, 0);
        }
    }
}

double min_abs_eig(const Matrix& m) {
    const HermEig eig = herm_eig(m);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < eig.w.size(); ++i) best = std::min(best, std::abs(eig.w[i]));
    return best;
}

// Random equivariant Hermitian, shifted by the smallest multiple of the
// identity that clears the invertibility floor.
Matrix seeded_invertible(const EquivariantModel& model, std::uint64_t s, double scale,
                         double floor_gap) {
    const Matrix d = random_equivariant_hermitian(model, s, scale);
    const Matrix id = Matrix::Identity(d.rows(), d.cols());
    for (int k = 0; k < 128; ++k) {
        const double shift = 0.19 * ((k + 1) / 2) * (k % 2 ? 1.0 : -1.0);
        const Matrix cand = d + shift * id;
        if (min_abs_eig(cand) >= floor_gap) return cand;
    }
    throw Error("seeded_invertible: no shift cleared the floor");
}

struct GappedOp {
    Matrix d;
    double gap = 0.0;
    Matrix ker_proj;
    int ker_dim = 0;
};

// Zeroes the smallest eigenvalue magnitudes of a random equivariant Hermitian
// through a spectral cut, producing an operator with an exact kernel and a
// certified gap.
GappedOp seeded_gapped(const EquivariantModel& model, std::uint64_t s) {
    for (int attempt = 0; attempt < 8; ++attempt) {
        const Matrix d0 = random_equivariant_hermitian(model, mix(s, 71 + attempt), 2.0);
        const HermEig eig = herm_eig(d0);
        const int n = static_cast<int>(eig.w.size());
        std::vector<double> mags(n);
        for (int i = 0; i < n; ++i) mags[i] = std::abs(eig.w[i]);
        std::sort(mags.begin(), mags.end());
        const int cut_cap = std::max(1, std::min(3, n - 1));
        int k = 1 + static_cast<int>(s % static_cast<std::uint64_t>(cut_cap));
        while (k < n && mags[k] - mags[k - 1] < 1e-6) ++k;
        if (k >= n) continue;
        const double thr = 0.5 * (mags[k - 1] + mags[k]);
        GappedOp out;
        out.d = herm_apply(d0, [thr](double x) { return std::abs(x) <= thr ? 0.0 : x; });
        out.ker_proj =
            herm_apply(d0, [thr](double x) { return std::abs(x) <= thr ? 1.0 : 0.0; });
        out.gap = mags[k];
        out.ker_dim = k;
        return out;
    }
    throw Error("seeded_gapped: spectrum too degenerate to cut");
}

struct BoundaryInstance {
    EquivariantModel model;
    Matrix d;
    Matrix c;
};

BoundaryInstance z2_boundary_instance(std::uint64_t s) {
    Matrix u = Matrix::Identity(4, 4);
    u(2, 2) = -1.0;
    u(3, 3) = -1.0;
    EquivariantModel model = build_group_model({u}, 0);
    const Matrix c = 0.6 * random_equivariant_hermitian(model, mix(s, 7), 1.0);
    const Matrix d0 = random_equivariant_hermitian(model, mix(s, 6), 1.5);
    const Matrix id = Matrix::Identity(4, 4);
    for (int k = 0; k < 128; ++k) {
        const double shift = 0.19 * ((k + 1) / 2) * (k % 2 ? 1.0 : -1.0);
        const Matrix cand = d0 + shift * id;
        if (min_abs_eig(cand) >= 0.15 && min_abs_eig(cand + c) >= 0.15)
            return {std::move(model), cand, c};
    }
    throw Error("z2_boundary_instance: no shift kept both operators gapped");
}

Matrix mat2(Complex a, Complex b, Complex c, Complex d) {
    Matrix m(2, 2);
    m << a, b, c, d;
    return m;
}

// The five boundary families exercised by the cylinder criteria: a scalar, a
// diagonal pair with an order-3 character, two noncommuting 2x2 pairs, and a
// seeded 4x4 reflection-equivariant pair.
BoundaryInstance boundary_instance(int kind, std::uint64_t s) {
    switch (kind) {
        case 0: {
            EquivariantModel model =
                build_group_model({Matrix(Matrix::Identity(1, 1))}, 0);
            return {std::move(model), Matrix(Matrix::Constant(1, 1, 1.0)),
                    Matrix(Matrix::Constant(1, 1, 0.5))};
        }
        case 1: {
            Matrix u = Matrix::Zero(2, 2);
            u(0, 0) = 1.0;
            u(1, 1) = std::exp(Complex(0.0, 2.0 * kPi / 3.0));
            EquivariantModel model = build_group_model({u}, 0);
            Matrix d = Matrix::Zero(2, 2);
            d(0, 0) = 1.0;
            d(1, 1) = 0.7;
            Matrix c = Matrix::Zero(2, 2);
            c(0, 0) = 0.4;
            c(1, 1) = -0.2;
            return {std::move(model), d, c};
        }
        case 2: {
            EquivariantModel model =
                build_group_model({Matrix(Matrix::Identity(2, 2))}, 0);
            return {std::move(model), mat2(1.0, 0.3, 0.3, -1.0),
                    mat2(0.5, 0.2, 0.2, -0.1)};
        }
        case 3: {
            EquivariantModel model =
                build_group_model({Matrix(Matrix::Identity(2, 2))}, 0);
            return {std::move(model),
                    mat2(0.6, Complex(0.1, -0.2), Complex(0.1, 0.2), -0.9),
                    mat2(0.3, Complex(0.0, 0.15), Complex(0.0, -0.15), 0.2)};
        }
        default:
            return z2_boundary_instance(s);
    }
}

template <class Body>
CriterionResult timed(int index, std::string name, std::string formula,
                      double budget_s, Body&& body) {
    CriterionResult r;
    r.index = index;
    r.name = std::move(name);
    r.formula = std::move(formula);
    const auto t0 = Clock::now();
    try {
        body(r);
    } catch (const std::exception& e) {
        r.pass = false;
        r.detail = std::string("aborted: ") + e.what();
    }
    r.seconds = elapsed_s(t0);
    if (budget_s > 0.0 && r.seconds > budget_s) {
        r.pass = false;
        r.detail += " [over the " + format_sig(budget_s) + " s budget]";
    }
    return r;
}

} // namespace

std::vector<CriterionResult> run_acceptance(bool quick, std::uint64_t seed, int threads) {
    std::vector<CriterionResult> out;

    out.push_back(timed(
        1, "eta-oracle-agreement",
        "eta quadrature equals the delocalized trace of sign(D) on seeded "
        "invertible models",
        30.0, [&](CriterionResult& r) {
            const int n = quick ? 25 : 100;
            std::vector<double> diffs(n, 0.0);
            parallel_for(n, threads, [&](int i) {
                const std::uint64_t s = seed + static_cast<std::uint64_t>(i);
                const EquivariantModel model = seeded_model(s, 32);
                const Matrix d = seeded_invertible(model, mix(s, 11), 2.0, 1e-3);
                const EtaReport rep = eta_quadrature(d, model);
                const Complex oracle =
                    delocalized_trace(model, sign_and_kernel(d).sign0);
                diffs[i] = std::abs(rep.value - oracle);
            });
            const double worst = *std::max_element(diffs.begin(), diffs.end());
            r.pass = worst <= 1e-8;
            r.detail = "max |eta - sign trace| = " + format_sig(worst) + " over " +
                       std::to_string(n) + " models";
        }));

    out.push_back(timed(
        2, "volterra-vs-exponential",
        "the perturbation series reproduces exp(-t (D+C)^2) at t in {0.1, 1, 10}",
        30.0, [&](CriterionResult& r) {
            const int n = quick ? 12 : 50;
            std::vector<double> worst(n, 0.0);
            parallel_for(n, threads, [&](int i) {
                const std::uint64_t s = seed + 1000 + static_cast<std::uint64_t>(i);
                const int dim = 2 + static_cast<int>((s * 2654435761ull) % 15);
                Rng rng(mix(s, 22));
                const Matrix d = random_hermitian(rng, dim);
                const Matrix c = 0.5 * random_hermitian(rng, dim);
                const PerturbedSquare ps = perturbed_square(d, c);
                const Matrix sum2 = (d + c) * (d + c);
                double w = 0.0;
                for (double t : {0.1, 1.0, 10.0}) {
                    const Matrix ref =
                        herm_apply(sum2, [t](double x) { return std::exp(-t * x); });
                    const VolterraResult v = volterra_heat(ps.d2, ps.a, t, 1e-10);
                    w = std::max(w, op_norm(v.value - ref));
                }
                worst[i] = w;
            });
            const double top = *std::max_element(worst.begin(), worst.end());
            r.pass = top <= 1e-8;
            r.detail = "max series-vs-exponential defect = " + format_sig(top) +
                       " over " + std::to_string(n) + " pairs";
        }));

    out.push_back(timed(
        3, "gap-limit-formula",
        "eta(D + theta) equals eta(D) plus the delocalized kernel weight inside "
        "the gap",
        0.0, [&](CriterionResult& r) {
            const int n = quick ? 6 : 20;
            std::vector<double> excess(n, 0.0), spread(n, 0.0);
            parallel_for(n, threads, [&](int i) {
                const std::uint64_t s = seed + 2000 + static_cast<std::uint64_t>(i);
                const EquivariantModel model = seeded_model(s, 16);
                const GappedOp g = seeded_gapped(model, mix(s, 31));
                const GapSweep sweep = eta_gap_sweep(
                    g.d, model, {g.gap / 2.0, g.gap / 10.0, g.gap / 100.0});
                const EtaReport base = eta_quadrature(g.d, model);
                const Complex limit =
                    base.value + delocalized_trace(model, g.ker_proj);
                double ex = -1.0, sp = 0.0;
                for (const EtaReport& rep : sweep.reports) {
                    const double budget =
                        2.0 * (rep.quadrature_error + rep.tail_bound +
                               base.quadrature_error + base.tail_bound) +
                        1e-13;
                    ex = std::max(ex, std::abs(rep.value - limit) - budget);
                    for (const EtaReport& other : sweep.reports)
                        sp = std::max(sp, std::abs(rep.value - other.value));
                }
                excess[i] = ex;
                spread[i] = sp;
            });
            const double worst_ex = *std::max_element(excess.begin(), excess.end());
            const double worst_sp = *std::max_element(spread.begin(), spread.end());
            r.pass = worst_ex <= 0.0 && worst_sp <= 1e-8;
            r.detail = "max identity excess over the error budget = " +
                       format_sig(worst_ex) +
                       ", max theta spread = " + format_sig(worst_sp) + " over " +
                       std::to_string(n) + " gapped models";
        }));

    out.push_back(timed(
        4, "contour-projector",
        "the resolvent-circle projector matches the spectral kernel projector",
        0.0, [&](CriterionResult& r) {
            const int n = quick ? 6 : 20;
            std::vector<double> diffs(n, 0.0);
            parallel_for(n, threads, [&](int i) {
                const std::uint64_t s = seed + 2500 + static_cast<std::uint64_t>(i);
                const EquivariantModel model = seeded_model(s, 16);
                const GappedOp g = seeded_gapped(model, mix(s, 41));
                const Matrix d2 = g.d * g.d;
                // radius well clear of both the kernel and gap^2, so the
                // contour guard band never grazes an eigenvalue
                const Matrix p = contour_projector(d2, g.gap * g.gap / 4.0);
                diffs[i] = op_norm(p - g.ker_proj);
            });
            const double worst = *std::max_element(diffs.begin(), diffs.end());
            r.pass = worst <= 1e-8;
            r.detail = "max projector defect = " + format_sig(worst) + " over " +
                       std::to_string(n) + " gapped models";
        }));

    out.push_back(timed(
        5, "eqfe-numeric-grid",
        "the commutator trace matches the heat-weighted boundary term on a 5x5 "
        "(t, lambda) grid",
        60.0, [&](CriterionResult& r) {
            const int n = quick ? 3 : 10;
            std::vector<double> worst(n, 0.0);
            parallel_for(n, threads, [&](int i) {
                const BoundaryInstance bi =
                    z2_boundary_instance(seed + 3000 + static_cast<std::uint64_t>(i));
                const IndicialData ind =
                    make_indicial(bi.d, bi.c, make_profile(1.0), bi.model);
                double w = 0.0;
                for (double t : {0.3, 0.675, 1.05, 1.425, 1.8})
                    for (double l : {-2.0, -1.0, 0.0, 1.0, 2.0})
                        w = std::max(w, eqfe_check(ind, bi.model, t, l).residual);
                worst[i] = w;
            });
            const double top = *std::max_element(worst.begin(), worst.end());
            r.pass = top <= 1e-8;
            r.detail = "max pointwise residual = " + format_sig(top) + " over " +
                       std::to_string(n) + " seeded 4x4 instances";
        }));

    out.push_back(timed(
        6, "eqfe-symbolic-exact",
        "the symbolic commutator trace cancels exactly and every single-"
        "coefficient mutation is caught",
        0.0, [&](CriterionResult& r) {
            const sym::TraceExpr residual = sym::verify_eqfe();
            const bool base_ok = residual.is_zero();
            const std::vector<std::string> mutations = {
                "-2*t*E(1)*b + 2*i*t*l*E(1)*d",
                "-2*i*t*E(1)*b + 2*t*l*E(1)*d",
                "2*i*t*E(1)*b + 2*i*t*l*E(1)*d",
                "-2*i*t*E(1)*b - 2*i*t*l*E(1)*d",
                "-i*t*E(1)*b + 2*i*t*l*E(1)*d",
                "-2*i*t*E(1)*b + 3*i*t*l*E(1)*d",
                "-2*i*t*E(1)*b",
                "2*i*t*l*E(1)*d",
            };
            std::size_t detected = 0;
            for (const std::string& text : mutations) {
                try {
                    sym::verify_eqfe(sym::parse_expr(text));
                } catch (const NonzeroResidual&) {
                    ++detected;
                }
            }
            r.pass = base_ok && detected == mutations.size();
            r.detail = "residual: " + std::to_string(residual.term_count()) +
                       " terms; " + std::to_string(detected) + "/" +
                       std::to_string(mutations.size()) + " mutations detected";
        }));

    out.push_back(timed(
        7, "key-lemma-convergence",
        "the cylinder cocycle integral lands on minus half the boundary eta and "
        "tightens at 4x resolution",
        300.0, [&](CriterionResult& r) {
            const std::vector<int> kinds =
                quick ? std::vector<int>{0, 2} : std::vector<int>{0, 1, 2, 3, 4};
            const int n = static_cast<int>(kinds.size());
            const Grid2D coarse = quick ? Grid2D{64, 64, 0.0} : Grid2D{};
            const Grid2D fine =
                quick ? Grid2D{256, 256, 0.0} : Grid2D{512, 512, 0.0};
            const double coarse_tol = quick ? 4e-3 : 1e-3;
            const double fine_tol = quick ? 1e-4 : 1e-5;

            std::vector<IndicialData> inds;
            std::vector<EquivariantModel> models;
            for (int i = 0; i < n; ++i) {
                BoundaryInstance bi = boundary_instance(kinds[i], seed + 4000);
                inds.push_back(
                    make_indicial(bi.d, bi.c, make_profile(1.0), bi.model));
                models.push_back(std::move(bi.model));
            }

            std::vector<double> rel(static_cast<std::size_t>(2) * n, 0.0);
            parallel_for(2 * n, threads, [&](int k) {
                const int i = k / 2;
                const bool is_fine = (k % 2) == 1;
                const KeyLemma kl = key_lemma_check(inds[i], models[i],
                                                    is_fine ? fine : coarse);
                rel[k] = kl.gap / (1.0 + std::abs(kl.rhs));
            });
            double worst_coarse = 0.0, worst_fine = 0.0;
            for (int i = 0; i < n; ++i) {
                worst_coarse = std::max(worst_coarse, rel[2 * i]);
                worst_fine = std::max(worst_fine, rel[2 * i + 1]);
            }
            r.pass = worst_coarse <= coarse_tol && worst_fine <= fine_tol;
            r.detail = "max normalized gap = " + format_sig(worst_coarse) +
                       " at default resolution, " + format_sig(worst_fine) +
                       " at 4x, over " + std::to_string(n) + " instances";
        }));

    out.push_back(timed(
        8, "zeta-constancy",
        "the interpolation between the Gaussian and cocycle pictures is flat in r",
        0.0, [&](CriterionResult& r) {
            const std::vector<int> kinds =
                quick ? std::vector<int>{0, 2} : std::vector<int>{0, 1, 2, 3, 4};
            const int n = static_cast<int>(kinds.size());
            const int n_r = quick ? 5 : 11;
            std::vector<double> r_grid(n_r);
            for (int i = 0; i < n_r; ++i)
                r_grid[i] = static_cast<double>(i) / static_cast<double>(n_r - 1);
            const Grid2D grid = quick ? Grid2D{64, 64, 0.0} : Grid2D{};
            const double tol0 = quick ? 4e-3 : 1e-3;

            std::vector<double> ratio(n, 0.0);
            parallel_for(n, threads, [&](int i) {
                const BoundaryInstance bi =
                    boundary_instance(kinds[i], seed + 4500);
                const IndicialData ind =
                    make_indicial(bi.d, bi.c, make_profile(1.0), bi.model);
                const std::vector<ZetaRow> rows =
                    zeta_sweep(ind, bi.model, r_grid, grid);
                double var = 0.0;
                for (const ZetaRow& row : rows)
                    var = std::max(var, std::abs(row.value - rows.front().value));
                ratio[i] = var / (1.0 + std::abs(rows.front().value));
            });
            const double worst = *std::max_element(ratio.begin(), ratio.end());
            r.pass = worst <= tol0;
            r.detail = "max normalized variation = " + format_sig(worst) + " over " +
                       std::to_string(n) + " instances and " + std::to_string(n_r) +
                       " grid points";
        }));

    out.push_back(timed(
        9, "mckean-singer-index",
        "the graded heat trace is flat in t and equals the delocalized kernel "
        "index, including a rectangular index-1 instance",
        0.0, [&](CriterionResult& r) {
            const int n = quick ? 6 : 20;
            const std::vector<double> t_grid{0.1, 0.5, 1.0, 2.0, 5.0};
            std::vector<double> worst(n, 0.0);
            bool rect_ok = false;
            for (int i = 0; i < n; ++i) {
                const std::uint64_t s = seed + 6000 + static_cast<std::uint64_t>(i);
                Rng rng(mix(s, 52));
                Matrix a_plus;
                GradedModel gm = [&]() -> GradedModel {
                    if (i == 0) {
                        // 2x3 full-rank: one kernel line upstairs, none down.
                        do {
                            a_plus = random_matrix(rng, 2, 3);
                        } while (min_abs_eig(Matrix(a_plus * a_plus.adjoint())) < 1e-3);
                        return make_graded_model(
                            {Matrix(Matrix::Identity(3, 3))},
                            {Matrix(Matrix::Identity(2, 2))}, 0);
                    }
                    if (i % 3 == 1) {
                        Matrix grade = Matrix::Identity(2, 2);
                        grade(1, 1) = -1.0;
                        Matrix diag = Matrix::Zero(2, 2);
                        diag(0, 0) = rng.normal();
                        diag(1, 1) = rng.normal();
                        a_plus = diag;
                        return make_graded_model({grade}, {grade}, 0);
                    }
                    const int p = 1 + static_cast<int>(s % 4);
                    const int m = 1 + static_cast<int>((s * 7) % 4);
                    a_plus = random_matrix(rng, m, p);
                    return make_graded_model({Matrix(Matrix::Identity(p, p))},
                                             {Matrix(Matrix::Identity(m, m))}, 0);
                }();
                const SupertraceReport rep = mckean_singer(a_plus, gm, t_grid);
                double w = 0.0;
                for (const SupertracePoint& pt : rep.points) {
                    w = std::max(w, std::abs(pt.value - rep.points.front().value));
                    w = std::max(w, std::abs(pt.value - rep.kernel_value));
                }
                worst[i] = w;
                if (i == 0) rect_ok = std::abs(rep.kernel_value - Complex(1.0)) <= 1e-10;
            }
            const double top = *std::max_element(worst.begin(), worst.end());
            r.pass = top <= 1e-10 && rect_ok;
            r.detail = "max supertrace drift = " + format_sig(top) + " over " +
                       std::to_string(n) + " graded operators; rectangular index " +
                       (rect_ok ? "= 1" : "!= 1");
        }));

    out.push_back(timed(
        10, "stability-and-rho",
        "eta is flat along invertible equivariant paths and the difference "
        "invariant ignores the invertibilizing scale",
        0.0, [&](CriterionResult& r) {
            const int n_paths = quick ? 4 : 10;
            std::vector<double> spread(n_paths, 0.0);
            parallel_for(n_paths, threads, [&](int i) {
                const std::uint64_t s = seed + 7000 + static_cast<std::uint64_t>(i);
                const EquivariantModel model = seeded_model(s, 12);
                const Matrix d0 = seeded_invertible(model, mix(s, 61), 2.0, 0.05);
                const double g0 = min_abs_eig(d0);
                Matrix pert = random_equivariant_hermitian(model, mix(s, 62), 1.0);
                const double pn = op_norm(pert);
                if (pn > 0.0) pert *= 0.3 * g0 / pn;
                const Matrix step = pert;
                const std::vector<EtaReport> rows = eta_stability_sweep(
                    d0, [&step](double t) { return Matrix(t * step); }, model,
                    {0.0, 0.25, 0.5, 0.75, 1.0});
                double sp = 0.0;
                for (const EtaReport& rep : rows)
                    sp = std::max(sp, std::abs(rep.value - rows.front().value));
                spread[i] = sp;
            });
            const double worst_path = *std::max_element(spread.begin(), spread.end());

            const int n_rho = quick ? 2 : 3;
            double worst_rho = 0.0;
            for (int i = 0; i < n_rho; ++i) {
                const std::uint64_t s = seed + 7500 + static_cast<std::uint64_t>(i);
                const EquivariantModel model =
                    build_group_model({Matrix(Matrix::Identity(3, 3))}, 0);
                const Matrix d1 = seeded_invertible(model, mix(s, 63), 2.0, 0.05);
                const Matrix d2 = seeded_gapped(model, mix(s, 64)).d;
                std::vector<Complex> vals;
                for (double eps : {1e-2, 1e-3, 1e-4})
                    vals.push_back(rho_number(d1, d2, model, eps).value);
                for (const Complex& v : vals)
                    worst_rho = std::max(worst_rho, std::abs(v - vals.front()));
            }
            r.pass = worst_path <= 1e-8 && worst_rho <= 1e-8;
            r.detail = "max path spread = " + format_sig(worst_path) + " over " +
                       std::to_string(n_paths) +
                       " paths; max rho spread across three scale decades = " +
                       format_sig(worst_rho);
        }));

    out.push_back(timed(
        11, "symmetric-perturbation",
        "an odd perturbation of the anticommuting summand leaves eta with the "
        "untouched summand",
        0.0, [&](CriterionResult& r) {
            const int n = quick ? 4 : 10;
            std::vector<double> excess(n, 0.0);
            parallel_for(n, threads, [&](int i) {
                const std::uint64_t s = seed + 8000 + static_cast<std::uint64_t>(i);
                Rng rng(mix(s, 81));
                const int p = 1 + i % 3;
                const int m = 1 + i % 2;

                Matrix uplus = Matrix::Identity(p, p);
                if (i % 2 == 1)
                    for (int k = 1; k < p; k += 2) uplus(k, k) = -1.0;
                const EquivariantModel vmodel = build_group_model({uplus}, 0);
                const Matrix dv = seeded_invertible(vmodel, mix(s, 82), 1.5, 0.1);

                Matrix x = random_hermitian(rng, m);
                x += (0.5 + op_norm(x)) * Matrix::Identity(m, m);
                const Matrix xp = random_hermitian(rng, m);
                const Matrix z = random_hermitian(rng, m);

                Matrix dw = Matrix::Zero(2 * m, 2 * m);
                dw.topLeftCorner(m, m) = x;
                dw.bottomRightCorner(m, m) = -x;
                Matrix iw = Matrix::Zero(2 * m, 2 * m);
                iw.topRightCorner(m, m) = Matrix::Identity(m, m);
                iw.bottomLeftCorner(m, m) = Matrix::Identity(m, m);
                Matrix b = Matrix::Zero(2 * m, 2 * m);
                b.topLeftCorner(m, m) = xp;
                b.bottomRightCorner(m, m) = -xp;
                b.topRightCorner(m, m) = Complex(0.0, 1.0) * z;
                b.bottomLeftCorner(m, m) = Complex(0.0, -1.0) * z;

                const GradedModel gm = make_graded_model(
                    {uplus}, {Matrix(Matrix::Identity(2 * m, 2 * m))}, 0);
                const auto [lhs, rhs] =
                    symmetric_perturbation_check(dv, dw, iw, b, gm);
                const double budget = lhs.quadrature_error + lhs.tail_bound +
                                      rhs.quadrature_error + rhs.tail_bound + 1e-12;
                excess[i] = std::abs(lhs.value - rhs.value) - budget;
            });
            const double worst = *std::max_element(excess.begin(), excess.end());
            r.pass = worst <= 0.0;
            r.detail = "max |eta(full) - eta(summand)| excess over the quadrature "
                       "budget = " +
                       format_sig(worst) + " over " + std::to_string(n) +
                       " odd perturbations";
        }));

    out.push_back(timed(
        12, "small-time-large-time",
        "the short-time heat defect obeys its first-order envelope and the heat "
        "norm decays under the gap bound",
        0.0, [&](CriterionResult& r) {
            const int n = quick ? 4 : 10;
            double max_defect = 0.0, max_ratio = 0.0;
            for (int i = 0; i < n; ++i) {
                const std::uint64_t s = seed + 9000 + static_cast<std::uint64_t>(i);
                Rng rng(mix(s, 91));
                const int dim = 2 + static_cast<int>(s % 7);
                const Matrix k = random_hermitian(rng, dim);
                const Matrix d = random_hermitian(rng, dim);
                const Matrix c = 0.3 * random_hermitian(rng, dim);
                const double delta = std::array<double, 3>{1e-2, 1e-3, 1e-4}[i % 3];
                max_defect = std::max(max_defect, small_time_defect(k, d, c, delta));

                const Matrix id = Matrix::Identity(dim, dim);
                Matrix dshift = d;
                for (int j = 0; j < 128 && min_abs_eig(dshift + c) < 0.2; ++j)
                    dshift = d + 0.19 * ((j + 2) / 2) * (j % 2 ? 1.0 : -1.0) * id;
                for (const DecayRow& row :
                     decay_profile(dshift, c, {0.5, 1.0, 2.0, 4.0, 8.0}))
                    max_ratio = std::max(
                        max_ratio, row.norm / (row.bound * (1.0 + 1e-12)));
            }
            r.pass = max_ratio <= 1.0;
            r.detail = "all short-time envelopes held (max defect = " +
                       format_sig(max_defect) +
                       "); max heat-norm over gap-envelope ratio = " +
                       format_sig(max_ratio) + " across " + std::to_string(n) +
                       " instances";
        }));

    out.push_back(timed(
        13, "circle-dirac-extrapolation",
        "truncated circle eta values extrapolate to the closed-form alternating "
        "limit 1",
        0.0, [&](CriterionResult& r) {
            const std::vector<int> ks =
                quick ? std::vector<int>{25, 50, 100} : std::vector<int>{50, 100, 200};
            std::vector<std::pair<double, Complex>> samples;
            std::string vals;
            for (int k : ks) {
                const CircleModel cm = circle_dirac_model(k, 0.5, kPi);
                const EtaReport rep = eta_quadrature(cm.d, cm.model);
                samples.emplace_back(1.0 / static_cast<double>(k), rep.value);
                vals += (vals.empty() ? "" : ", ") + std::to_string(k) + ": " +
                        format_sig(rep.value.real());
            }
            const Complex extrap = regularized_limit(samples, 1, 3);
            const double err = std::abs(extrap - Complex(1.0));
            r.pass = err <= 1e-3;
            r.detail = "eta at K {" + vals + "}; |extrapolation - 1| = " +
                       format_sig(err);
        }));

    return out;
}

} // namespace etaforge::cli
