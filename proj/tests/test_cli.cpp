// End-to-end tests for the command line tool, driven through subprocesses.
// argv[1]: path to the binary under test.
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

namespace {

std::string g_cli;

struct RunResult {
    int exit_code;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

RunResult run(const std::string& args) {
    const std::string out = "/tmp/smatrix_cli_test_out.txt";
    const std::string err = "/tmp/smatrix_cli_test_err.txt";
    const std::string cmd = "\"" + g_cli + "\" " + args + " > " + out + " 2> " + err;
    const int status = std::system(cmd.c_str());
    int code = -1;
    if (status != -1 && WIFEXITED(status)) code = WEXITSTATUS(status);
    return {code, slurp(out), slurp(err)};
}

std::string write_config(const std::string& name, const std::string& body) {
    const std::string path = "/tmp/smatrix_cli_" + name + ".json";
    std::ofstream(path) << body;
    return path;
}

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

// CSV data rows as doubles, skipping the schema comment and the header.
std::vector<std::vector<double>> csv_rows(const std::string& out) {
    std::vector<std::vector<double>> rows;
    std::istringstream is(out);
    std::string line;
    bool header_seen = false;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        std::vector<double> row;
        std::istringstream ls(line);
        std::string tok;
        while (std::getline(ls, tok, ',')) row.push_back(std::strtod(tok.c_str(), nullptr));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

TEST_CASE("wt emits the expected single-point row") {
    const auto cfg = write_config(
        "zero", R"({"model": {"a": {"re": 0.0, "im": 0.0}, "profile": {"kind": "zero"}}})");
    const auto r = run("wt --config " + cfg + " --grid 0:0:1,-1:-1:1");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "# schema: smatrix-lab/1"));
    CHECK(contains(r.out, "re_z,im_z,re_W,im_W,re_Wp,im_Wp"));
    CHECK(contains(r.out, "0,-1,-2,0,1,"));  // W = -2, W' = 1 at z = -i
}

TEST_CASE("wt knows the degree-zero closed form") {
    const auto cfg = write_config(
        "pe8i",
        R"({"model": {"a": {"re": 0.0, "im": 0.0},
            "profile": {"kind": "poly_exp", "coeffs": [{"re": 0.0, "im": 8.0}]}}})");
    const auto r = run("wt --config " + cfg + " --grid 0:0:1,-1:-1:1");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "0,-1,14,"));  // W(-1) = 14 for M = 8i
}

TEST_CASE("malformed configuration exits with code 2") {
    const auto bad = write_config("bad", "{ not json");
    CHECK(run("wt --config " + bad + " --grid 0:0:1,-1:-1:1").exit_code == 2);

    const auto unknown = write_config(
        "unknown", R"({"model": {"a": {"re": 0.0, "im": 0.0}, "profile": {"kind": "zero"},
                       "extra": 1}})");
    const auto r = run("wt --config " + unknown + " --grid 0:0:1,-1:-1:1");
    CHECK(r.exit_code == 2);
    CHECK(contains(r.err, "unknown field"));

    CHECK(run("wt --config /nonexistent.json --grid 0:0:1,-1:-1:1").exit_code == 2);
    const auto cfg = write_config(
        "zero", R"({"model": {"a": {"re": 0.0, "im": 0.0}, "profile": {"kind": "zero"}}})");
    CHECK(run("wt --config " + cfg + " --grid nonsense").exit_code == 2);
    CHECK(run("wt --config " + cfg).exit_code == 2);  // missing grid
}

TEST_CASE("smat rows for the flip matrix and pole flagging") {
    const auto cfg = write_config(
        "zero", R"({"model": {"a": {"re": 0.0, "im": 0.0}, "profile": {"kind": "zero"}}})");
    const auto r = run("smat --config " + cfg + " --grid 1:1:1,-1:-1:1 --route closed");
    CHECK(r.exit_code == 0);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 1);
    REQUIRE(rows[0].size() == 13);
    CHECK(rows[0][4] == doctest::Approx(-1.0).epsilon(1e-12));   // re s12
    CHECK(rows[0][10] == doctest::Approx(1.0).epsilon(1e-12));   // sigma1
    CHECK(rows[0][11] == doctest::Approx(1.0).epsilon(1e-12));   // sigma2
    CHECK(rows[0][12] == 0.0);                                   // pole flag

    // a = -2 puts a pole at z = -i inside the grid; the row is flagged, not fatal
    const auto cfgp = write_config(
        "zm2", R"({"model": {"a": {"re": -2.0, "im": 0.0}, "profile": {"kind": "zero"}}})");
    const auto rp = run("smat --config " + cfgp + " --grid 0:0:1,-1:-1:1 --route kn");
    CHECK(rp.exit_code == 0);
    CHECK(contains(rp.out, "nan,nan"));
    CHECK(contains(rp.out, ",1\n"));
}

TEST_CASE("smat with infinite coupling is diagonal") {
    const auto cfg = write_config(
        "inf",
        R"({"model": {"a": "inf", "profile": {"kind": "even_box", "M": {"re": 1.0, "im": 1.0},
            "rho": 1.0}}})");
    const auto r = run("smat --config " + cfg + " --grid 1:1:1,-1:-1:1 --route kn --format json");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "\"schema\": \"smatrix-lab/1\""));
    // off-diagonal entries are exactly zero
    CHECK(contains(r.out, "\"0\""));
}

TEST_CASE("rt matches hand values for the zero profile") {
    const auto cfg = write_config(
        "zero", R"({"model": {"a": {"re": 0.0, "im": 0.0}, "profile": {"kind": "zero"}}})");
    const auto r = run("rt --config " + cfg + " --grid 1:1:1,-1:-1:1");
    CHECK(r.exit_code == 0);
    const auto rows = csv_rows(r.out);
    REQUIRE(rows.size() == 1);
    REQUIRE(rows[0].size() == 11);
    // at z = 1 - i, a = 0: R = -1/2 + i/2, T = 1/2 + i/2
    CHECK(rows[0][2] == doctest::Approx(-0.5).epsilon(1e-7));
    CHECK(rows[0][3] == doctest::Approx(0.5).epsilon(1e-7));
    CHECK(rows[0][4] == doctest::Approx(0.5).epsilon(1e-7));
    CHECK(rows[0][5] == doctest::Approx(0.5).epsilon(1e-7));
}

TEST_CASE("poles reports the axis pole with its residue") {
    const auto cfg = write_config(
        "zm2", R"({"model": {"a": {"re": -2.0, "im": 0.0}, "profile": {"kind": "zero"}}})");
    const auto r = run("poles --config " + cfg + " --rect \" -2:2,-2:-0.01\"");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "\"minus_axis\""));
    CHECK(contains(r.out, "\"simple\""));
    CHECK(contains(r.out, "\"consistent\": true"));
}

TEST_CASE("poles of a positive coupling come back empty") {
    const auto cfg = write_config(
        "zp1", R"({"model": {"a": {"re": 1.0, "im": 0.0}, "profile": {"kind": "zero"}}})");
    const auto r = run("poles --config " + cfg + " --rect \" -2:2,-2:-0.01\"");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "\"poles\": []"));
}

TEST_CASE("verify passes on a self-adjoint zero model") {
    const auto cfg = write_config(
        "z2", R"({"model": {"a": {"re": 2.0, "im": 0.0}, "profile": {"kind": "zero"}}})");
    const auto r = run("verify --config " + cfg);
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "\"pass\": true"));
}

TEST_CASE("verify reports a non-self-adjoint box model without failing") {
    const auto cfg = write_config(
        "eb",
        R"({"model": {"a": {"re": 3.0, "im": -2.0},
            "profile": {"kind": "even_box", "M": {"re": 1.0, "im": 1.0}, "rho": 1.0}}})");
    const auto r = run("verify --config " + cfg);
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "\"self_adjoint\": false"));
}

TEST_CASE("sweep with an empty path emits an empty trajectory") {
    const auto cfg = write_config(
        "zero", R"({"model": {"a": {"re": 0.0, "im": 0.0}, "profile": {"kind": "zero"}}})");
    const auto r = run("sweep --config " + cfg + " --rect \" -2:2,-2:-0.01\" --param a");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "\"steps\": []"));
}

TEST_CASE("sweep tracks the axis pole as the coupling weakens") {
    const auto cfg = write_config(
        "zero", R"({"model": {"a": {"re": 0.0, "im": 0.0}, "profile": {"kind": "zero"}}})");
    const auto r = run("sweep --config " + cfg +
                       " --rect \" -1:1,-2:-0.01\" --param a --points \"-2,0;-1,0;-0.4,0\"");
    CHECK(r.exit_code == 0);
    const auto j = nlohmann::json::parse(r.out);
    // z = i a / 2: poles at -i, -i/2, -0.2i
    REQUIRE(j["steps"].size() == 3);
    const auto& last = j["steps"][2]["poles"];
    REQUIRE(last.size() == 1);
    CHECK(last[0]["z"]["re"].get<double>() == doctest::Approx(0.0).epsilon(1e-8));
    CHECK(last[0]["z"]["im"].get<double>() == doctest::Approx(-0.2).epsilon(1e-8));
    CHECK(last[0]["prev_index"].get<int>() == 0);
}

TEST_CASE("identical invocations give byte-identical output") {
    const auto cfg = write_config(
        "eb",
        R"({"model": {"a": {"re": 3.0, "im": -2.0},
            "profile": {"kind": "even_box", "M": {"re": 1.0, "im": 1.0}, "rho": 1.0}}})");
    const auto r1 = run("smat --config " + cfg + " --grid \" -2:2:4,-2:-0.3:4\" --route kn");
    const auto r2 = run("smat --config " + cfg + " --grid \" -2:2:4,-2:-0.3:4\" --route kn");
    CHECK(r1.exit_code == 0);
    CHECK(r1.out == r2.out);
}

TEST_CASE("output lands in the requested file") {
    const auto cfg = write_config(
        "zero", R"({"model": {"a": {"re": 0.0, "im": 0.0}, "profile": {"kind": "zero"}}})");
    const std::string path = "/tmp/smatrix_cli_artifact.csv";
    std::remove(path.c_str());
    const auto r = run("wt --config " + cfg + " --grid 0:0:1,-1:-1:1 --out " + path);
    CHECK(r.exit_code == 0);
    CHECK(contains(slurp(path), "re_z,im_z"));
}

int main(int argc, char** argv) {
    if (argc < 2) {
        std::fprintf(stderr, "usage: test_cli <path-to-cli> [source-dir]\n");
        return 1;
    }
    g_cli = argv[1];
    doctest::Context ctx;
    return ctx.run();
}
