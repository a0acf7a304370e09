#include "model_io.hpp"
#include "report.hpp"
#include "scenarios.hpp"

#include "etaforge/errors.hpp"
#include "etaforge/linalg.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace etaforge;
using namespace etaforge::cli;

namespace {

std::filesystem::path fresh_dir(const std::string& tag) {
    const auto p = std::filesystem::temp_directory_path() / ("etaforge_" + tag);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(bool(in));
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Parses a CSV produced by write_csv into header + string cells.
std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& p) {
    std::ifstream in(p);
    REQUIRE(bool(in));
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

json identity_model(int n) {
    json gen = json::array();
    for (int r = 0; r < n; ++r) {
        json row = json::array();
        for (int c = 0; c < n; ++c) row.push_back(r == c ? 1.0 : 0.0);
        gen.push_back(row);
    }
    return json{{"dim", n}, {"generators", json::array({gen})}};
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("matrix layouts parse and disagree loudly") {
    // nested complex rows
    const Matrix a = matrix_from_json(json::parse("[[[1,2],[0,0]],[[0,0],[3,-4]]]"));
    CHECK(a(0, 0) == Complex(1.0, 2.0));
    CHECK(a(1, 1) == Complex(3.0, -4.0));

    // nested real rows
    const Matrix b = matrix_from_json(json::parse("[[1,2],[3,4]]"));
    CHECK(b(0, 1) == Complex(2.0));
    CHECK(b(1, 0) == Complex(3.0));

    // flat reals, row-major
    const Matrix c = matrix_from_json(json::parse("[1,2,3,4]"));
    CHECK(c(0, 1) == Complex(2.0));

    // flat [re, im] pairs, row-major (length 4 with rows of 2 is not square-nested)
    const Matrix d = matrix_from_json(json::parse("[[1,1],[2,2],[3,3],[4,-4]]"));
    CHECK(d.rows() == 2);
    CHECK(d(0, 1) == Complex(2.0, 2.0));
    CHECK(d(1, 1) == Complex(4.0, -4.0));

    // rectangular nested rows
    const Matrix e = matrix_from_json(json::parse("[[1,2,3],[4,5,6]]"));
    CHECK(e.rows() == 2);
    CHECK(e.cols() == 3);

    CHECK_THROWS_AS(matrix_from_json(json::parse("[]")), ConfigError);
    CHECK_THROWS_AS(matrix_from_json(json::parse("[1,2,3]")), ConfigError);
    CHECK_THROWS_AS(matrix_from_json(json::parse("[[1,2],[3]]")), ConfigError);
    CHECK_THROWS_AS(matrix_from_json(json::parse("[[1,2],[3,4]]"), 3), ConfigError);
    CHECK_THROWS_AS(matrix_from_json(json::parse("[\"x\"]")), ConfigError);
}

TEST_CASE("cyclic shorthand builds the diagonal character model") {
    const json j = json::parse(R"({"cyclic": 4, "weights": [0, 1, 2, 3]})");
    const EquivariantModel model = model_from_json(j);
    CHECK(model.dim() == 4);
    CHECK(model.order() == 4);
    const Complex u11 = model.g_unitary()(1, 1);
    CHECK(std::abs(u11 - std::exp(Complex(0.0, std::acos(-1.0) / 2.0))) < 1e-12);

    // a generator whose declared order does not close
    const json bad = json::parse(R"({"cyclic": 2, "weights": [0, 1], "alpha": 1.0})");
    CHECK_THROWS_AS(model_from_json(bad), ConfigError);
}

TEST_CASE("missing model file is a config error") {
    json cfg;
    cfg["scenario"] = "eta";
    cfg["model_path"] = "definitely_not_here.json";
    cfg["D"] = json::parse("[[1,0],[0,-1]]");
    RunOptions opts;
    opts.out_dir = fresh_dir("missing_model");
    CHECK_THROWS_AS(run_scenario(cfg, opts, fresh_dir("missing_model_base")),
                    ConfigError);
}

TEST_CASE("unknown or absent scenario is a config error") {
    RunOptions opts;
    opts.out_dir = fresh_dir("bad_scenario");
    json cfg;
    CHECK_THROWS_AS(run_scenario(cfg, opts, "."), ConfigError);
    cfg["scenario"] = "no-such-thing";
    CHECK_THROWS_AS(run_scenario(cfg, opts, "."), ConfigError);
}

TEST_CASE("eta scenario writes the character-weighted sign trace") {
    const double theta = 2.0 * std::acos(-1.0) / 3.0;
    json cfg;
    cfg["scenario"] = "eta";
    cfg["model"] = json{{"cyclic", 3}, {"weights", json::array({0, 1})}, {"alpha", theta}};
    cfg["D"] = json::parse("[[1,0],[0,-1]]");
    RunOptions opts;
    opts.out_dir = fresh_dir("eta_run");

    const ExitReport rep = run_scenario(cfg, opts, ".");
    CHECK(rep.exit_code == 0);
    CHECK(rep.all_passed());

    const auto rows = read_csv(opts.out_dir / "eta.csv");
    REQUIRE(rows.size() == 2);
    REQUIRE(rows[0].size() == 7);
    CHECK(rows[0][1] == "value_re");
    const double re = std::strtod(rows[1][1].c_str(), nullptr);
    const double im = std::strtod(rows[1][2].c_str(), nullptr);
    CHECK(std::abs(re - (1.0 - std::cos(theta))) < 1e-10);
    CHECK(std::abs(im - (-std::sin(theta))) < 1e-10);
}

TEST_CASE("eqfe-symbolic summary reports a zero residual") {
    json cfg;
    cfg["scenario"] = "eqfe-symbolic";
    RunOptions opts;
    opts.out_dir = fresh_dir("eqfe_sym");
    const ExitReport rep = run_scenario(cfg, opts, ".");
    CHECK(rep.exit_code == 0);
    CHECK(rep.summary_text.find("residual: 0 terms") != std::string::npos);
    CHECK(slurp(opts.out_dir / "summary.md").find("residual: 0 terms") !=
          std::string::npos);
}

TEST_CASE("non-Hermitian input fails at a named hermiticity gate") {
    json cfg;
    cfg["scenario"] = "eta";
    cfg["model"] = identity_model(2);
    cfg["D"] = json::parse("[[1,1],[0,-1]]");
    RunOptions opts;
    opts.out_dir = fresh_dir("gate");
    const ExitReport rep = run_scenario(cfg, opts, ".");
    CHECK(rep.exit_code == 2);
    REQUIRE(!rep.checks.empty());
    CHECK(rep.checks.front().id == "hermiticity-gate");
    CHECK_FALSE(rep.checks.front().pass);

    // the same gate guards the long suite
    json vcfg;
    vcfg["scenario"] = "verify-all";
    vcfg["model"] = identity_model(2);
    vcfg["D"] = json::parse("[[1,1],[0,-1]]");
    RunOptions vopts;
    vopts.out_dir = fresh_dir("gate_all");
    const ExitReport vrep = run_scenario(vcfg, vopts, ".");
    CHECK(vrep.exit_code == 2);
    REQUIRE(!vrep.checks.empty());
    CHECK(vrep.checks.front().id == "hermiticity-gate");
    CHECK_FALSE(vrep.checks.front().pass);
}

TEST_CASE("reruns are byte-identical and thread-count independent") {
    json cfg;
    cfg["scenario"] = "eqfe-numeric";
    cfg["model"] = identity_model(2);
    cfg["D"] = json::parse("[[1.0,0.3],[0.3,-1.0]]");
    cfg["C"] = json::parse("[[0.5,0.2],[0.2,-0.1]]");
    cfg["t_grid"] = json::array({0.4, 0.9});
    cfg["lambda_grid"] = json::array({-1.0, 0.0, 1.5});

    RunOptions a;
    a.out_dir = fresh_dir("det_a");
    RunOptions b;
    b.out_dir = fresh_dir("det_b");
    b.threads = 3;

    const ExitReport ra = run_scenario(cfg, a, ".");
    const ExitReport rb = run_scenario(cfg, b, ".");
    CHECK(ra.exit_code == 0);
    CHECK(rb.exit_code == 0);
    CHECK(slurp(a.out_dir / "summary.md") == slurp(b.out_dir / "summary.md"));
    CHECK(slurp(a.out_dir / "eqfe_numeric.csv") == slurp(b.out_dir / "eqfe_numeric.csv"));
}

TEST_CASE("seed-0 eta output matches the frozen golden file") {
    const double theta = 2.0 * std::acos(-1.0) / 3.0;
    json cfg;
    cfg["scenario"] = "eta";
    cfg["model"] = json{{"cyclic", 3}, {"weights", json::array({0, 1})}, {"alpha", theta}};
    cfg["D"] = json::parse("[[1,0],[0,-1]]");
    RunOptions opts;
    opts.out_dir = fresh_dir("golden");
    run_scenario(cfg, opts, ".");

    const std::filesystem::path golden =
        std::filesystem::path(ETAFORGE_GOLDEN_DIR) / "eta_seed0.csv";
    CHECK(slurp(opts.out_dir / "eta.csv") == slurp(golden));
}

TEST_CASE("empty result tables refuse to serialize") {
    CsvTable t{"empty", {"a", "b"}, {}};
    CHECK_THROWS_AS(write_csv(fresh_dir("csv") / "empty.csv", t), IoError);
    CsvTable no_cols{"none", {}, {}};
    CHECK_THROWS_AS(write_csv(fresh_dir("csv") / "none.csv", no_cols), IoError);
    CHECK_THROWS_AS(t.add_row({"1"}), IoError);
}

TEST_CASE("seventeen significant digits round-trip") {
    for (double x : {0.1, 1.0, -3.0714285714285712, 1e-300, 6.02e23, 0.0}) {
        const std::string s = format_sig(x);
        CHECK(std::strtod(s.c_str(), nullptr) == x);
    }
    CHECK(format_sig(0.0) == "0");
    CHECK(format_sig(-0.0) == "0");
    CHECK(format_sig(0.1) == "0.10000000000000001");
}

TEST_CASE("every bounded scenario runs a stock config") {
    const json id2 = identity_model(2);
    const json d_gap = json::parse("[[1.0,0.3],[0.3,-1.0]]");
    const json c_small = json::parse("[[0.5,0.2],[0.2,-0.1]]");

    std::vector<json> cfgs;
    {
        json j;
        j["scenario"] = "eta-gap";
        j["model"] = id2;
        j["D"] = json::parse("[[1.5,0],[0,0]]");
        cfgs.push_back(j);
    }
    {
        json j;
        j["scenario"] = "stability";
        j["model"] = id2;
        j["D0"] = d_gap;
        j["D1"] = json::parse("[[1.2,0.3],[0.3,-0.8]]");
        j["r_grid"] = json::array({0.0, 0.5, 1.0});
        cfgs.push_back(j);
    }
    {
        json j;
        j["scenario"] = "rho";
        j["model"] = id2;
        j["D1"] = d_gap;
        j["D2"] = json::parse("[[0.9,0],[0,0]]");
        cfgs.push_back(j);
    }
    {
        json j;
        j["scenario"] = "volterra";
        j["D"] = d_gap;
        j["C"] = c_small;
        j["t_grid"] = json::array({0.1, 1.0});
        cfgs.push_back(j);
    }
    {
        json j;
        j["scenario"] = "mckean-singer";
        j["a_plus"] = json::parse("[[0.7,0.1,0],[0,1.1,0.2]]");
        cfgs.push_back(j);
    }
    {
        json j;
        j["scenario"] = "key-lemma";
        j["model"] = id2;
        j["D"] = d_gap;
        j["C"] = c_small;
        j["grid"] = json{{"t", 48}, {"lambda", 48}};
        j["tol"] = 0.05;
        cfgs.push_back(j);
    }
    {
        json j;
        j["scenario"] = "eqfe-numeric";
        j["model"] = id2;
        j["D"] = d_gap;
        j["C"] = c_small;
        j["t_grid"] = json::array({0.5, 1.0});
        j["lambda_grid"] = json::array({0.0, 1.0});
        cfgs.push_back(j);
    }
    {
        json j;
        j["scenario"] = "zeta";
        j["model"] = id2;
        j["D"] = d_gap;
        j["C"] = c_small;
        j["r_grid"] = json::array({0.0, 1.0});
        j["grid"] = json{{"t", 48}, {"lambda", 48}};
        j["tol"] = 0.05;
        cfgs.push_back(j);
    }
    {
        json j;
        j["scenario"] = "decay";
        j["D"] = d_gap;
        j["C"] = c_small;
        j["t_grid"] = json::array({0.5, 2.0});
        cfgs.push_back(j);
    }
    {
        json j;
        j["scenario"] = "small-time";
        j["K"] = json::parse("[[0.4,0.1],[0.1,-0.3]]");
        j["D"] = d_gap;
        j["C"] = c_small;
        cfgs.push_back(j);
    }

    int idx = 0;
    for (const json& cfg : cfgs) {
        RunOptions opts;
        opts.out_dir = fresh_dir("stock_" + std::to_string(idx++));
        const ExitReport rep = run_scenario(cfg, opts, ".");
        INFO(cfg.at("scenario").get<std::string>());
        for (const CheckRow& c : rep.checks) {
            INFO(c.id << ": " << c.detail);
            CHECK(c.pass);
        }
        CHECK(rep.exit_code == 0);
        CHECK(std::filesystem::exists(opts.out_dir / "summary.md"));
    }
}

TEST_CASE("config file round trip resolves relative model paths") {
    const auto dir = fresh_dir("cfg_round");
    {
        std::ofstream m(dir / "model.json");
        m << identity_model(2).dump();
    }
    json cfg;
    cfg["scenario"] = "eta";
    cfg["model_path"] = "model.json";
    cfg["D"] = json::parse("[[2,0],[0,-1]]");
    cfg["out_dir"] = (dir / "out").string();
    {
        std::ofstream c(dir / "cfg.json");
        c << cfg.dump();
    }
    RunOptions opts;
    const ExitReport rep = run_config(dir / "cfg.json", opts);
    CHECK(rep.exit_code == 0);
    CHECK(std::filesystem::exists(dir / "out" / "eta.csv"));

    CHECK_THROWS_AS(run_config(dir / "missing.json", opts), ConfigError);
}

} // TEST_SUITE
