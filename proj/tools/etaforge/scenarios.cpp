#include "scenarios.hpp"

#include "acceptance.hpp"

#include "etaforge/bcyl.hpp"
#include "etaforge/errors.hpp"
#include "etaforge/eta.hpp"
#include "etaforge/funcalc.hpp"
#include "etaforge/heatflow.hpp"
#include "etaforge/symtrace.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

namespace etaforge::cli {

namespace {

struct ScenarioOutput {
    std::vector<CheckRow> checks;
    std::vector<CsvTable> tables;
    std::vector<std::string> notes; // extra preamble lines
    std::vector<std::pair<std::string, std::string>> extra_files;
};

using ScenarioFn = std::function<void(const json&, const RunOptions&,
                                      const std::filesystem::path&, ScenarioOutput&)>;

std::vector<double> grid_from(const json& cfg, const std::string& key,
                              std::vector<double> fallback) {
    if (!cfg.contains(key)) return fallback;
    const json& jg = cfg.at(key);
    if (!jg.is_array() || jg.empty())
        throw ConfigError("\"" + key + "\" must be a nonempty array of numbers");
    std::vector<double> out;
    out.reserve(jg.size());
    for (const json& v : jg) {
        if (!v.is_number()) throw ConfigError("\"" + key + "\" must contain numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

EtaQuad quad_from(const json& cfg) {
    EtaQuad q;
    if (cfg.contains("quad")) {
        const json& jq = cfg.at("quad");
        q.n_nodes = jq.value("n_nodes", q.n_nodes);
        q.u_max = jq.value("u_max", q.u_max);
        if (q.n_nodes < 2) throw ConfigError("quad.n_nodes must be at least 2");
    }
    return q;
}

Grid2D grid2d_from(const json& cfg, bool quick) {
    Grid2D g;
    if (cfg.contains("grid")) {
        const json& jg = cfg.at("grid");
        g.n_t = jg.value("t", g.n_t);
        g.n_lambda = jg.value("lambda", g.n_lambda);
        g.t_max = jg.value("t_max", g.t_max);
        if (g.n_t < 4 || g.n_lambda < 4)
            throw ConfigError("grid.t and grid.lambda must be at least 4");
    }
    if (quick) {
        g.n_t = std::max(4, g.n_t / 2);
        g.n_lambda = std::max(4, g.n_lambda / 2);
    }
    return g;
}

IndicialData indicial_from(const json& cfg, const std::filesystem::path& base,
                           const EquivariantModel& model) {
    const Matrix d = matrix_from_config(cfg, "D", model.dim());
    const Matrix c = matrix_from_config(cfg, "C", model.dim());
    double eps = 1.0;
    if (cfg.contains("eps") && !(cfg.at("eps").is_string() &&
                                 cfg.at("eps").get<std::string>() == "auto")) {
        if (!cfg.at("eps").is_number()) throw ConfigError("\"eps\" must be a number or \"auto\"");
        eps = cfg.at("eps").get<double>();
    }
    (void)base;
    return make_indicial(d, c, make_profile(eps), model);
}

std::string complex_str(Complex z) {
    return format_sig(z.real()) + (z.imag() < 0 ? " - " : " + ") +
           format_sig(std::abs(z.imag())) + "i";
}

CheckRow bound_check(std::string id, std::string formula, double measured, double tol) {
    CheckRow c{std::move(id), std::move(formula), measured <= tol,
               "measured " + format_sig(measured) + ", tolerance " + format_sig(tol)};
    return c;
}

// ---------------------------------------------------------------- eta

void scenario_eta(const json& cfg, const RunOptions&, const std::filesystem::path& base,
                  ScenarioOutput& out) {
    const EquivariantModel model = model_from_config(cfg, base);
    const Matrix d = matrix_from_config(cfg, "D", model.dim());
    const EtaReport rep = eta_quadrature(d, model, quad_from(cfg));

    CsvTable t{"eta",
               {"theta_or_r", "value_re", "value_im", "quad_error", "tail_bound",
                "oracle_re", "oracle_im"},
               {}};
    std::vector<std::string> row{format_sig(0.0)};
    push_complex(row, rep.value);
    row.push_back(format_sig(rep.quadrature_error));
    row.push_back(format_sig(rep.tail_bound));
    const Complex oracle = rep.oracle_value.value_or(Complex(0.0));
    push_complex(row, oracle);
    t.add_row(std::move(row));
    out.tables.push_back(std::move(t));

    if (!rep.oracle_value) {
        out.checks.push_back({"eta-vs-sign-trace",
                              "eta quadrature equals the delocalized trace of sign(D)",
                              false, "no spectral oracle: operator has no usable gap"});
        return;
    }
    const double diff = std::abs(rep.value - *rep.oracle_value);
    out.checks.push_back(bound_check(
        "eta-vs-sign-trace", "eta quadrature equals the delocalized trace of sign(D)",
        diff, 1e-8 * (1.0 + std::abs(*rep.oracle_value))));
    out.notes.push_back("eta = " + complex_str(rep.value));
}

// ---------------------------------------------------------------- eta-gap

void scenario_eta_gap(const json& cfg, const RunOptions&,
                      const std::filesystem::path& base, ScenarioOutput& out) {
    const EquivariantModel model = model_from_config(cfg, base);
    const Matrix d = matrix_from_config(cfg, "D", model.dim());
    const SignKernel sk = sign_and_kernel(d);
    if (!(sk.gap > 0.0) || !std::isfinite(sk.gap))
        throw ConfigError("eta-gap needs an operator with a spectral gap");
    const std::vector<double> grid = grid_from(
        cfg, "theta_grid", {sk.gap / 2.0, sk.gap / 10.0, sk.gap / 100.0});
    const EtaQuad quad = quad_from(cfg);
    const GapSweep sweep = eta_gap_sweep(d, model, grid, quad);
    const EtaReport at_zero = eta_quadrature(d, model, quad);

    CsvTable t{"eta_gap",
               {"theta_or_r", "value_re", "value_im", "quad_error", "tail_bound",
                "limit_re", "limit_im"},
               {}};
    double worst_identity = 0.0;
    double identity_budget = 0.0;
    double worst_spread = 0.0;
    for (const EtaReport& r : sweep.reports) {
        std::vector<std::string> row{format_sig(r.theta.value_or(0.0))};
        push_complex(row, r.value);
        row.push_back(format_sig(r.quadrature_error));
        row.push_back(format_sig(r.tail_bound));
        push_complex(row, sweep.limit_value);
        t.add_row(std::move(row));

        const double id_err = std::abs(r.value - sweep.limit_value);
        const double budget = 2.0 * (r.quadrature_error + r.tail_bound +
                                     at_zero.quadrature_error + at_zero.tail_bound) +
                              1e-12;
        if (id_err > worst_identity) {
            worst_identity = id_err;
            identity_budget = budget;
        }
        for (const EtaReport& s : sweep.reports)
            worst_spread = std::max(worst_spread, std::abs(r.value - s.value));
    }
    out.tables.push_back(std::move(t));
    out.checks.push_back(bound_check(
        "gap-limit-identity",
        "eta(D + theta) equals eta(D) plus the delocalized kernel weight",
        worst_identity, identity_budget));
    out.checks.push_back(bound_check("gap-constancy",
                                     "the shifted eta is independent of theta inside the gap",
                                     worst_spread, 1e-8 * (1.0 + std::abs(sweep.limit_value))));
}

// ---------------------------------------------------------------- stability

void scenario_stability(const json& cfg, const RunOptions&,
                        const std::filesystem::path& base, ScenarioOutput& out) {
    const EquivariantModel model = model_from_config(cfg, base);
    const Matrix d0 = matrix_from_config(cfg, "D0", model.dim());
    const Matrix d1 = matrix_from_config(cfg, "D1", model.dim());
    const std::vector<double> r_grid =
        grid_from(cfg, "r_grid", {0.0, 0.25, 0.5, 0.75, 1.0});
    const Matrix step = d1 - d0;
    const auto path = [&step](double r) { return Matrix(r * step); };
    const std::vector<EtaReport> rows =
        eta_stability_sweep(d0, path, model, r_grid, quad_from(cfg));

    CsvTable t{"stability",
               {"theta_or_r", "value_re", "value_im", "quad_error", "tail_bound"},
               {}};
    double spread = 0.0;
    for (const EtaReport& r : rows) {
        std::vector<std::string> row{format_sig(r.theta.value_or(0.0))};
        push_complex(row, r.value);
        row.push_back(format_sig(r.quadrature_error));
        row.push_back(format_sig(r.tail_bound));
        t.add_row(std::move(row));
        spread = std::max(spread, std::abs(r.value - rows.front().value));
    }
    out.tables.push_back(std::move(t));
    out.checks.push_back(bound_check(
        "path-constancy", "eta is constant along an invertible equivariant path",
        spread, 1e-8 * (1.0 + std::abs(rows.front().value))));
}

// ---------------------------------------------------------------- rho

void scenario_rho(const json& cfg, const RunOptions&,
                  const std::filesystem::path& base, ScenarioOutput& out) {
    const EquivariantModel model = model_from_config(cfg, base);
    const Matrix d1 = matrix_from_config(cfg, "D1", model.dim());
    const Matrix d2 = matrix_from_config(cfg, "D2", model.dim());
    const std::vector<double> eps_list =
        grid_from(cfg, "eps_list", {1e-2, 1e-3, 1e-4});
    const EtaQuad quad = quad_from(cfg);

    CsvTable t{"rho", {"eps", "value_re", "value_im", "quad_error"}, {}};
    std::vector<Complex> values;
    for (double eps : eps_list) {
        const EtaReport r = rho_number(d1, d2, model, eps, quad);
        std::vector<std::string> row{format_sig(eps)};
        push_complex(row, r.value);
        row.push_back(format_sig(r.quadrature_error));
        t.add_row(std::move(row));
        values.push_back(r.value);
    }
    out.tables.push_back(std::move(t));
    double spread = 0.0;
    for (const Complex& v : values)
        spread = std::max(spread, std::abs(v - values.front()));
    out.checks.push_back(bound_check(
        "rho-eps-independence",
        "the difference invariant does not depend on the invertibilizing scale",
        spread, 1e-8 * (1.0 + std::abs(values.front()))));
}

// ---------------------------------------------------------------- volterra

void scenario_volterra(const json& cfg, const RunOptions&,
                       const std::filesystem::path&, ScenarioOutput& out) {
    const Matrix d = matrix_from_config(cfg, "D");
    const Matrix c = matrix_from_config(cfg, "C", static_cast<int>(d.rows()));
    const std::vector<double> t_grid = grid_from(cfg, "t_grid", {0.1, 1.0, 10.0});
    const double tol = cfg.value("tol", 1e-10);

    const PerturbedSquare ps = perturbed_square(d, c);
    const Matrix sum2 = (d + c) * (d + c);

    CsvTable tab{"volterra",
                 {"t", "defect_divided_difference", "defect_duhamel", "terms_dd",
                  "terms_duhamel", "tail_dd", "tail_duhamel"},
                 {}};
    double worst = 0.0;
    for (double t : t_grid) {
        const Matrix ref =
            herm_apply(sum2, [t](double x) { return std::exp(-t * x); });
        const VolterraResult dd =
            volterra_heat(ps.d2, ps.a, t, tol, VolterraRoute::DividedDifference);
        const VolterraResult du =
            volterra_heat(ps.d2, ps.a, t, tol, VolterraRoute::Duhamel);
        const double e_dd = op_norm(dd.value - ref);
        const double e_du = op_norm(du.value - ref);
        worst = std::max({worst, e_dd, e_du});
        tab.add_row({format_sig(t), format_sig(e_dd), format_sig(e_du),
                     std::to_string(dd.terms_used), std::to_string(du.terms_used),
                     format_sig(dd.tail_bound), format_sig(du.tail_bound)});
    }
    out.tables.push_back(std::move(tab));
    out.checks.push_back(bound_check(
        "volterra-vs-exponential",
        "both perturbation-series routes reproduce exp(-t (D+C)^2)", worst, 1e-8));
}

// ---------------------------------------------------------------- mckean-singer

void scenario_mckean_singer(const json& cfg, const RunOptions&,
                            const std::filesystem::path&, ScenarioOutput& out) {
    const Matrix a_plus = matrix_from_config(cfg, "a_plus");
    const int dim_plus = static_cast<int>(a_plus.cols());
    const int dim_minus = static_cast<int>(a_plus.rows());

    std::vector<Matrix> gp, gm;
    if (cfg.contains("u_plus"))
        for (const json& g : cfg.at("u_plus")) gp.push_back(matrix_from_json(g, dim_plus));
    else
        gp.push_back(Matrix::Identity(dim_plus, dim_plus));
    if (cfg.contains("u_minus"))
        for (const json& g : cfg.at("u_minus")) gm.push_back(matrix_from_json(g, dim_minus));
    else
        gm.push_back(Matrix::Identity(dim_minus, dim_minus));
    const int g_index = cfg.value("g_index", 0);

    const GradedModel model = make_graded_model(gp, gm, g_index);
    const std::vector<double> t_grid =
        grid_from(cfg, "t_grid", {0.1, 0.5, 1.0, 2.0, 5.0});
    const SupertraceReport rep = mckean_singer(a_plus, model, t_grid);

    CsvTable t{"mckean_singer", {"t", "supertrace_re", "supertrace_im"}, {}};
    double spread = 0.0;
    for (const SupertracePoint& p : rep.points) {
        std::vector<std::string> row{format_sig(p.t)};
        push_complex(row, p.value);
        t.add_row(std::move(row));
        spread = std::max(spread, std::abs(p.value - rep.points.front().value));
    }
    out.tables.push_back(std::move(t));

    CsvTable k{"mckean_singer_index", {"kernel_re", "kernel_im"}, {}};
    std::vector<std::string> krow;
    push_complex(krow, rep.kernel_value);
    k.add_row(std::move(krow));
    out.tables.push_back(std::move(k));

    out.checks.push_back(bound_check(
        "supertrace-constancy", "the graded heat trace does not depend on t", spread,
        1e-10));
    out.checks.push_back(bound_check(
        "supertrace-equals-kernel-index",
        "the graded heat trace equals the delocalized kernel index",
        std::abs(rep.points.front().value - rep.kernel_value), 1e-10));
}

// ---------------------------------------------------------------- key-lemma

void scenario_key_lemma(const json& cfg, const RunOptions& opts,
                        const std::filesystem::path& base, ScenarioOutput& out) {
    const EquivariantModel model = model_from_config(cfg, base);
    const IndicialData ind = indicial_from(cfg, base, model);
    const Grid2D grid = grid2d_from(cfg, opts.quick);
    const KeyLemma kl = key_lemma_check(ind, model, grid, quad_from(cfg));

    CsvTable t{"key_lemma",
               {"lhs_re", "lhs_im", "rhs_re", "rhs_im", "gap", "lhs_error", "eps",
                "gamma"},
               {}};
    std::vector<std::string> row;
    push_complex(row, kl.lhs);
    push_complex(row, kl.rhs);
    row.push_back(format_sig(kl.gap));
    row.push_back(format_sig(kl.lhs_error));
    row.push_back(format_sig(ind.profile.eps));
    row.push_back(format_sig(ind.gamma));
    t.add_row(std::move(row));
    out.tables.push_back(std::move(t));

    const double tol =
        cfg.value("tol", (opts.quick ? 4e-3 : 1e-3)) * (1.0 + std::abs(kl.rhs));
    out.checks.push_back(bound_check(
        "cocycle-vs-boundary-eta",
        "the cylinder cocycle integral equals minus half the boundary eta", kl.gap,
        tol));
    out.notes.push_back("lhs = " + complex_str(kl.lhs) + ", rhs = " + complex_str(kl.rhs));
}

// ---------------------------------------------------------------- eqfe-numeric

void scenario_eqfe_numeric(const json& cfg, const RunOptions& opts,
                           const std::filesystem::path& base, ScenarioOutput& out) {
    const EquivariantModel model = model_from_config(cfg, base);
    const IndicialData ind = indicial_from(cfg, base, model);
    std::vector<double> t_grid =
        grid_from(cfg, "t_grid", {0.3, 0.675, 1.05, 1.425, 1.8});
    std::vector<double> l_grid =
        grid_from(cfg, "lambda_grid", {-2.0, -1.0, 0.0, 1.0, 2.0});
    if (opts.quick) {
        t_grid = {t_grid.front(), t_grid[t_grid.size() / 2], t_grid.back()};
        l_grid = {l_grid.front(), l_grid[l_grid.size() / 2], l_grid.back()};
    }

    const int nt = static_cast<int>(t_grid.size());
    const int nl = static_cast<int>(l_grid.size());
    std::vector<EqfeResult> results(static_cast<std::size_t>(nt) * nl);
    parallel_for(nt * nl, opts.threads, [&](int k) {
        results[k] = eqfe_check(ind, model, t_grid[k / nl], l_grid[k % nl]);
    });

    CsvTable t{"eqfe_numeric",
               {"t", "lambda", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "residual"},
               {}};
    double worst = 0.0;
    for (int k = 0; k < nt * nl; ++k) {
        const EqfeResult& r = results[k];
        std::vector<std::string> row{format_sig(t_grid[k / nl]), format_sig(l_grid[k % nl])};
        push_complex(row, r.lhs);
        push_complex(row, r.rhs);
        row.push_back(format_sig(r.residual));
        t.add_row(std::move(row));
        worst = std::max(worst, r.residual);
    }
    out.tables.push_back(std::move(t));
    out.checks.push_back(bound_check(
        "pointwise-derivative-identity",
        "the commutator trace equals -2it times the heat-weighted boundary term "
        "at every grid point",
        worst, cfg.value("tol", 1e-8)));
}

// ---------------------------------------------------------------- eqfe-symbolic

void scenario_eqfe_symbolic(const json&, const RunOptions& opts,
                            const std::filesystem::path&, ScenarioOutput& out) {
    const sym::RMatrix r = sym::build_r_symbolic();
    const char* names[2][2] = {{"r00", "r01"}, {"r10", "r11"}};

    CsvTable t{"eqfe_symbolic", {"item", "terms"}, {}};
    std::string ir;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            t.add_row({names[i][j], std::to_string(r[i][j].term_count())});
            ir += std::string(names[i][j]) + " = " + r[i][j].print() + "\n";
        }
    }
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            const sym::TraceExpr dt = differentiate(r[i][j], 't');
            const sym::TraceExpr dl = differentiate(r[i][j], 'l');
            t.add_row({std::string("dt_") + names[i][j], std::to_string(dt.term_count())});
            t.add_row({std::string("dl_") + names[i][j], std::to_string(dl.term_count())});
            ir += std::string("dt_") + names[i][j] + " = " + dt.print() + "\n";
            ir += std::string("dl_") + names[i][j] + " = " + dl.print() + "\n";
        }
    }
    const sym::TraceExpr reduced = sym::eqfe_reduced_form();
    t.add_row({"reduced_form", std::to_string(reduced.term_count())});
    ir += "reduced_form = " + reduced.print() + "\n";

    CheckRow check{"symbolic-residual",
                   "the commutator trace minus the reduced form normalizes to zero",
                   false, ""};
    try {
        const sym::TraceExpr residual = sym::verify_eqfe();
        check.pass = residual.is_zero();
        check.detail = "residual: " + std::to_string(residual.term_count()) + " terms";
        t.add_row({"residual", std::to_string(residual.term_count())});
        ir += "residual = " + residual.print() + "\n";
    } catch (const NonzeroResidual& e) {
        check.detail = e.what();
        t.add_row({"residual", "-1"});
    }
    out.tables.push_back(std::move(t));
    out.checks.push_back(std::move(check));
    out.notes.push_back(out.checks.back().detail);
    if (opts.trace_ir) out.extra_files.emplace_back("trace_ir.txt", ir);
}

// ---------------------------------------------------------------- zeta

void scenario_zeta(const json& cfg, const RunOptions& opts,
                   const std::filesystem::path& base, ScenarioOutput& out) {
    const EquivariantModel model = model_from_config(cfg, base);
    const IndicialData ind = indicial_from(cfg, base, model);
    std::vector<double> r_grid;
    if (cfg.contains("r_grid")) r_grid = grid_from(cfg, "r_grid", {});
    else {
        const int n = opts.quick ? 5 : 11;
        for (int i = 0; i < n; ++i) r_grid.push_back(double(i) / double(n - 1));
    }
    const std::vector<ZetaRow> rows =
        zeta_sweep(ind, model, r_grid, grid2d_from(cfg, opts.quick));

    CsvTable t{"zeta", {"theta_or_r", "value_re", "value_im", "quad_error"}, {}};
    double spread = 0.0;
    for (const ZetaRow& r : rows) {
        std::vector<std::string> row{format_sig(r.r)};
        push_complex(row, r.value);
        row.push_back(format_sig(r.quad_error));
        t.add_row(std::move(row));
        spread = std::max(spread, std::abs(r.value - rows.front().value));
    }
    out.tables.push_back(std::move(t));
    const double tol =
        cfg.value("tol", (opts.quick ? 4e-3 : 1e-3)) * (1.0 + std::abs(rows.front().value));
    out.checks.push_back(bound_check(
        "deformation-constancy",
        "the interpolation between the Gaussian and cocycle pictures is constant",
        spread, tol));
}

// ---------------------------------------------------------------- decay

void scenario_decay(const json& cfg, const RunOptions&,
                    const std::filesystem::path&, ScenarioOutput& out) {
    const Matrix d = matrix_from_config(cfg, "D");
    const Matrix c = matrix_from_config(cfg, "C", static_cast<int>(d.rows()));
    const std::vector<double> t_grid =
        grid_from(cfg, "t_grid", {0.5, 1.0, 2.0, 4.0, 8.0});
    const std::vector<DecayRow> rows = decay_profile(d, c, t_grid);

    CsvTable t{"decay", {"t", "norm", "bound"}, {}};
    double worst_excess = 0.0;
    for (const DecayRow& r : rows) {
        t.add_row({format_sig(r.t), format_sig(r.norm), format_sig(r.bound)});
        worst_excess = std::max(worst_excess, r.norm - r.bound * (1.0 + 1e-12));
    }
    out.tables.push_back(std::move(t));
    out.checks.push_back(bound_check(
        "large-time-decay", "the heat norm stays below the spectral-gap envelope",
        worst_excess, 0.0));
}

// ---------------------------------------------------------------- small-time

void scenario_small_time(const json& cfg, const RunOptions&,
                         const std::filesystem::path&, ScenarioOutput& out) {
    const Matrix k = matrix_from_config(cfg, "K");
    const Matrix d = matrix_from_config(cfg, "D", static_cast<int>(k.rows()));
    const Matrix c = matrix_from_config(cfg, "C", static_cast<int>(k.rows()));
    const double delta = cfg.value("delta", 1e-3);
    const double m_prime = cfg.value("m_prime", 1.0);

    const double defect = small_time_defect(k, d, c, delta, m_prime);
    const Matrix h = (d + c) * (d + c);
    const double bound =
        delta * m_prime * op_norm(h * k) + (1.0 - std::exp(-delta)) * op_norm(k);

    CsvTable t{"small_time", {"delta", "defect", "bound"}, {}};
    t.add_row({format_sig(delta), format_sig(defect), format_sig(bound)});
    out.tables.push_back(std::move(t));
    out.checks.push_back(bound_check(
        "small-time-defect-bound",
        "the short-time heat defect stays below its first-order envelope",
        defect - bound, 1e-12 * (1.0 + op_norm(k))));
}

// ---------------------------------------------------------------- verify-all

void scenario_verify_all(const json& cfg, const RunOptions& opts,
                         const std::filesystem::path& base, ScenarioOutput& out) {
    // Pre-flight gates: when the config carries a model and an operator,
    // validate them before committing to the long suite.
    if (cfg.contains("model") || cfg.contains("model_path")) {
        const EquivariantModel model = model_from_config(cfg, base);
        if (cfg.contains("D")) {
            const Matrix d = matrix_from_config(cfg, "D", model.dim());
            const double h_defect = hermiticity_defect(d);
            out.checks.push_back(bound_check("hermiticity-gate",
                                             "the supplied operator is Hermitian",
                                             h_defect, 1e-10 * (1.0 + op_norm(d))));
            if (!out.checks.back().pass) return;
            const double e_defect = check_equivariance(model, d);
            out.checks.push_back(bound_check("equivariance-gate",
                                             "the supplied operator commutes with the group",
                                             e_defect, 1e-10 * (1.0 + op_norm(d))));
            if (!out.checks.back().pass) return;
        }
    }

    const std::uint64_t seed = cfg.value("seed", opts.seed);
    const std::vector<CriterionResult> rows =
        run_acceptance(opts.quick, seed, opts.threads);

    CsvTable t{"verify_all", {"index", "name", "pass"}, {}};
    for (const CriterionResult& r : rows) {
        t.add_row({std::to_string(r.index), r.name, r.pass ? "1" : "0"});
        out.checks.push_back({r.name, r.formula, r.pass, r.detail});
    }
    out.tables.push_back(std::move(t));
}

const std::map<std::string, ScenarioFn>& registry() {
    static const std::map<std::string, ScenarioFn> reg = {
        {"eta", scenario_eta},
        {"eta-gap", scenario_eta_gap},
        {"stability", scenario_stability},
        {"rho", scenario_rho},
        {"volterra", scenario_volterra},
        {"mckean-singer", scenario_mckean_singer},
        {"key-lemma", scenario_key_lemma},
        {"eqfe-numeric", scenario_eqfe_numeric},
        {"eqfe-symbolic", scenario_eqfe_symbolic},
        {"zeta", scenario_zeta},
        {"decay", scenario_decay},
        {"small-time", scenario_small_time},
        {"verify-all", scenario_verify_all},
    };
    return reg;
}

} // namespace

const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& [k, fn] : registry()) v.push_back(k);
        return v;
    }();
    return names;
}

ExitReport run_scenario(const json& cfg, const RunOptions& opts,
                        const std::filesystem::path& base_dir) {
    if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
    if (!cfg.contains("scenario") || !cfg.at("scenario").is_string())
        throw ConfigError("config needs a \"scenario\" string");
    const std::string name = cfg.at("scenario").get<std::string>();
    const auto it = registry().find(name);
    if (it == registry().end()) {
        std::string msg = "unknown scenario \"" + name + "\"; valid names:";
        for (const auto& n : scenario_names()) msg += " " + n;
        throw ConfigError(msg);
    }

    ScenarioOutput so;
    try {
        it->second(cfg, opts, base_dir, so);
    } catch (const ConfigError&) {
        throw;
    } catch (const IoError&) {
        throw;
    } catch (const QuadratureNotConverged&) {
        throw;
    } catch (const NoAdmissibleEps&) {
        throw;
    } catch (const NotHermitian& e) {
        so.checks.push_back({"hermiticity-gate", "input operators must be Hermitian",
                             false, e.what()});
    } catch (const NotEquivariant& e) {
        so.checks.push_back({"equivariance-gate",
                             "input operators must commute with the group action", false,
                             e.what()});
    } catch (const NotUnitary& e) {
        so.checks.push_back({"unitarity-gate", "group generators must be unitary", false,
                             e.what()});
    } catch (const NotInvertible& e) {
        so.checks.push_back({"invertibility-gate",
                             "the operator must be invertible for this scenario", false,
                             e.what()});
    } catch (const GapClosed& e) {
        so.checks.push_back({"gap-gate", "the spectral gap must stay open", false,
                             e.what()});
    } catch (const NotOdd& e) {
        so.checks.push_back({"odd-parity-gate",
                             "the perturbation must anticommute with the involution",
                             false, e.what()});
    } catch (const Error& e) {
        so.checks.push_back({"scenario-gate", "the scenario must run to completion",
                             false, e.what()});
    }

    ExitReport rep;
    rep.scenario = name;
    rep.checks = so.checks;
    rep.exit_code = rep.all_passed() ? 0 : 2;

    std::filesystem::create_directories(opts.out_dir);
    std::vector<std::string> preamble{"scenario: " + name,
                                      "seed: " + std::to_string(opts.seed),
                                      std::string("quick: ") + (opts.quick ? "yes" : "no")};
    preamble.insert(preamble.end(), so.notes.begin(), so.notes.end());
    rep.summary_text = render_markdown(name, preamble, rep.checks);
    const auto summary_path = opts.out_dir / "summary.md";
    write_text_file(summary_path, rep.summary_text);
    rep.files.push_back(summary_path);
    for (const CsvTable& table : so.tables) {
        const auto p = opts.out_dir / (table.name + ".csv");
        write_csv(p, table);
        rep.files.push_back(p);
    }
    for (const auto& [fname, text] : so.extra_files) {
        const auto p = opts.out_dir / fname;
        write_text_file(p, text);
        rep.files.push_back(p);
    }
    return rep;
}

ExitReport run_config(const std::filesystem::path& config_path, const RunOptions& opts) {
    const json cfg = load_json_file(config_path);
    RunOptions eff = opts;
    if (cfg.is_object()) {
        if (cfg.contains("seed")) eff.seed = cfg.at("seed").get<std::uint64_t>();
        if (cfg.contains("out_dir"))
            eff.out_dir = cfg.at("out_dir").get<std::string>();
    }
    return run_scenario(cfg, eff, config_path.parent_path());
}

} // namespace etaforge::cli
