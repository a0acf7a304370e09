#include "model_io.hpp"

#include "etaforge/errors.hpp"
#include "etaforge/linalg.hpp"

#include <cmath>
#include <fstream>

namespace etaforge::cli {

json load_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::exception& e) {
        throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
    }
}

Complex complex_from_json(const json& j) {
    if (j.is_number()) return Complex(j.get<double>(), 0.0);
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return Complex(j[0].get<double>(), j[1].get<double>());
    throw ConfigError("matrix entry must be a number or an [re, im] pair");
}

namespace {

int exact_square_root(std::size_t n) {
    const int r = static_cast<int>(std::llround(std::sqrt(static_cast<double>(n))));
    if (r <= 0 || static_cast<std::size_t>(r) * static_cast<std::size_t>(r) != n)
        throw ConfigError("flat matrix data must have a square length, got " +
                          std::to_string(n) + " entries");
    return r;
}

Matrix matrix_from_rows(const json& j) {
    const int rows = static_cast<int>(j.size());
    const int cols = static_cast<int>(j[0].size());
    if (cols == 0) throw ConfigError("matrix rows must be nonempty");
    Matrix m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        const json& row = j[r];
        if (!row.is_array() || static_cast<int>(row.size()) != cols)
            throw ConfigError("matrix rows must all have length " + std::to_string(cols));
        for (int c = 0; c < cols; ++c) m(r, c) = complex_from_json(row[c]);
    }
    return m;
}

Matrix matrix_from_flat_pairs(const json& j) {
    const int n = exact_square_root(j.size());
    Matrix m(n, n);
    for (int k = 0; k < n * n; ++k) m(k / n, k % n) = complex_from_json(j[k]);
    return m;
}

Matrix matrix_from_flat_reals(const json& j) {
    const int n = exact_square_root(j.size());
    Matrix m(n, n);
    for (int k = 0; k < n * n; ++k) {
        if (!j[k].is_number()) throw ConfigError("flat real matrix data must be numbers");
        m(k / n, k % n) = Complex(j[k].get<double>(), 0.0);
    }
    return m;
}

} // namespace

Matrix matrix_from_json(const json& j, int dim_hint) {
    if (!j.is_array() || j.empty())
        throw ConfigError("matrix must be a nonempty array");

    Matrix m;
    if (j[0].is_number()) {
        m = matrix_from_flat_reals(j);
    } else if (j[0].is_array() && !j[0].empty() && j[0][0].is_array()) {
        m = matrix_from_rows(j);
    } else if (j[0].is_array()) {
        // Rows of plain numbers, unless the shape only fits the flat-pair
        // reading (a square count of [re, im] pairs that is not itself a
        // square row layout).
        const bool square_rows = j.size() == j[0].size();
        if (!square_rows && j[0].size() == 2) m = matrix_from_flat_pairs(j);
        else m = matrix_from_rows(j);
    } else {
        throw ConfigError("matrix entries must be numbers or arrays");
    }

    if (dim_hint >= 0 && (m.rows() != dim_hint || m.cols() != dim_hint))
        throw ConfigError("matrix has size " + std::to_string(m.rows()) + "x" +
                          std::to_string(m.cols()) + ", expected " +
                          std::to_string(dim_hint) + "x" + std::to_string(dim_hint));
    return m;
}

EquivariantModel model_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("model must be a JSON object");
    try {
        if (j.contains("cyclic")) {
            const int order = j.at("cyclic").get<int>();
            if (order <= 0) throw ConfigError("cyclic order must be positive");
            const json& jw = j.at("weights");
            if (!jw.is_array() || jw.empty())
                throw ConfigError("cyclic shorthand needs a nonempty weights array");
            const double alpha =
                j.contains("alpha") ? j.at("alpha").get<double>()
                                    : 2.0 * std::acos(-1.0) / static_cast<double>(order);
            const int dim = static_cast<int>(jw.size());
            Matrix u = Matrix::Zero(dim, dim);
            for (int k = 0; k < dim; ++k) {
                const double w = jw[k].get<double>();
                u(k, k) = std::exp(Complex(0.0, alpha * w));
                const Complex full = std::exp(Complex(0.0, alpha * w * order));
                if (std::abs(full - Complex(1.0)) > 1e-10)
                    throw ConfigError(
                        "cyclic shorthand: weight " + std::to_string(w) +
                        " does not close after " + std::to_string(order) + " steps");
            }
            return build_group_model({u}, 0);
        }

        const int dim = j.at("dim").get<int>();
        const json& jg = j.at("generators");
        if (!jg.is_array() || jg.empty())
            throw ConfigError("model needs a nonempty generators array");
        std::vector<Matrix> gens;
        gens.reserve(jg.size());
        for (const json& g : jg) gens.push_back(matrix_from_json(g, dim));
        const int g_index = j.contains("g_index") ? j.at("g_index").get<int>() : 0;
        return build_group_model(gens, g_index);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("model object is malformed: ") + e.what());
    }
}

EquivariantModel model_from_config(const json& cfg,
                                   const std::filesystem::path& base_dir) {
    if (cfg.contains("model")) return model_from_json(cfg.at("model"));
    if (cfg.contains("model_path")) {
        std::filesystem::path p = cfg.at("model_path").get<std::string>();
        if (p.is_relative()) p = base_dir / p;
        return model_from_json(load_json_file(p));
    }
    throw ConfigError("config needs an inline \"model\" or a \"model_path\"");
}

Matrix matrix_from_config(const json& cfg, const std::string& key, int dim_hint) {
    if (!cfg.contains(key))
        throw ConfigError("config is missing the matrix field \"" + key + "\"");
    return matrix_from_json(cfg.at(key), dim_hint);
}

} // namespace etaforge::cli
