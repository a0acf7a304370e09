#pragma once

#include "etaforge/opmodel.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace etaforge::cli {

using nlohmann::json;

// Parses a JSON document from disk; a missing file or malformed text becomes
// ConfigError.
json load_json_file(const std::filesystem::path& path);

// A number or an [re, im] pair.
Complex complex_from_json(const json& j);

// Accepted layouts, in order of precedence:
//   * nested rows (entries are numbers or [re, im] pairs),
//   * a flat row-major list of [re, im] pairs (length must be a square),
//   * a flat row-major list of reals (length must be a square).
// dim_hint, when nonnegative, is enforced against the column count.
Matrix matrix_from_json(const json& j, int dim_hint = -1);

// { "dim": N, "generators": [...], "g_index": k } with matrices in any of the
// layouts above, or the shorthand { "cyclic": n, "weights": [...], "alpha": x }
// for the diagonal generator U = diag(exp(i*alpha*w_j)); the shorthand checks
// U^n = I before building the group.
EquivariantModel model_from_json(const json& j);

// Resolves a model from a scenario config: an inline "model" object wins,
// otherwise "model_path" is loaded relative to base_dir.
EquivariantModel model_from_config(const json& cfg,
                                   const std::filesystem::path& base_dir);

// cfg[key] as a matrix; absence is a ConfigError naming the key.
Matrix matrix_from_config(const json& cfg, const std::string& key,
                          int dim_hint = -1);

} // namespace etaforge::cli
