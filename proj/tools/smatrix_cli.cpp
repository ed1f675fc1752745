// smatrix-lab command line front end.
//
// Subcommands: wt, smat, rt, poles, verify, sweep. All numeric output is
// printed with 17 significant digits in a fixed column order so identical
// configs produce byte-identical artifacts. Exit codes: 0 success,
// 1 verification failure, 2 configuration error, 3 numerical failure.

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "smatrix/io.hpp"
#include "smatrix/poles.hpp"
#include "smatrix/smatrix.hpp"

namespace {

using namespace smx;

constexpr const char* kSchema = "smatrix-lab/1";

struct GridSpec {
    double re_min, re_max;
    int n_re;
    double im_min, im_max;
    int n_im;

    std::vector<Cplx> points() const {
        std::vector<Cplx> out;
        out.reserve(static_cast<std::size_t>(n_re) * n_im);
        for (int i = 0; i < n_im; ++i) {
            const double im = n_im == 1 ? im_min : im_min + (im_max - im_min) * i / (n_im - 1.0);
            for (int r = 0; r < n_re; ++r) {
                const double re = n_re == 1 ? re_min : re_min + (re_max - re_min) * r / (n_re - 1.0);
                out.emplace_back(re, im);
            }
        }
        return out;
    }
};

GridSpec parse_grid(const std::string& s) {
    GridSpec g{};
    char c1, c2, c3, c4, c5;
    std::istringstream is(s);
    if (!(is >> g.re_min >> c1 >> g.re_max >> c2 >> g.n_re >> c3 >> g.im_min >> c4 >> g.im_max >>
          c5 >> g.n_im) ||
        c1 != ':' || c2 != ':' || c3 != ',' || c4 != ':' || c5 != ':')
        throw ConfigError("--grid: expected re_min:re_max:n,im_min:im_max:n");
    if (g.n_re < 1 || g.n_im < 1) throw ConfigError("--grid: grid counts must be >= 1");
    if (!(g.im_max < 0.0)) throw ConfigError("--grid: grid must lie in the lower half-plane");
    return g;
}

SearchRect parse_rect(const std::string& s) {
    double a, b, c, d;
    char c1, c2, c3;
    std::istringstream is(s);
    if (!(is >> a >> c1 >> b >> c2 >> c >> c3 >> d) || c1 != ':' || c2 != ',' || c3 != ':')
        throw ConfigError("--rect: expected re_min:re_max,im_min:im_max");
    return SearchRect(a, b, c, d);
}

int thread_budget() {
    int n = static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* env = std::getenv("SMATRIX_THREADS")) {
        const int cap = std::atoi(env);
        if (cap >= 1) n = std::min(n, cap);
    }
    return n;
}

// Run body(i) for i in [0, n) across the thread budget; callers index into
// preallocated result slots so output order stays deterministic.
void parallel_for(int n, const std::function<void(int)>& body) {
    const int workers = std::min(thread_budget(), n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
        });
    for (auto& t : pool) t.join();
}

struct OutSink {
    std::ofstream file;
    std::ostream* os = &std::cout;

    explicit OutSink(const std::string& path) {
        if (!path.empty()) {
            file.open(path);
            if (!file) throw ConfigError("--out: cannot open " + path);
            os = &file;
        }
    }
    std::ostream& stream() { return *os; }
};

void emit_table(OutSink& sink, const std::string& format, const std::vector<std::string>& cols,
                const std::vector<std::vector<std::string>>& rows) {
    std::ostream& os = sink.stream();
    if (format == "csv") {
        os << "# schema: " << kSchema << "\n";
        for (std::size_t c = 0; c < cols.size(); ++c) os << (c ? "," : "") << cols[c];
        os << "\n";
        for (const auto& row : rows) {
            for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << row[c];
            os << "\n";
        }
    } else {
        json j;
        j["schema"] = kSchema;
        j["columns"] = cols;
        j["rows"] = json::array();
        for (const auto& row : rows) j["rows"].push_back(row);
        os << j.dump(2) << "\n";
    }
}

int cmd_wt(const RunConfig& cfg, const GridSpec& grid, const std::string& format,
           const std::string& out) {
    const auto zs = grid.points();
    std::vector<std::vector<std::string>> rows(zs.size());
    std::atomic<bool> failed{false};
    std::string fail_msg;
    std::mutex fail_mu;
    parallel_for(static_cast<int>(zs.size()), [&](int i) {
        try {
            const Cplx z = zs[static_cast<std::size_t>(i)];
            const Cplx w = weyl_titchmarsh(cfg.model.profile, z, Path::Auto, cfg.quad);
            const Cplx wp = weyl_titchmarsh_deriv(cfg.model.profile, z, Path::Auto, cfg.quad);
            rows[static_cast<std::size_t>(i)] = {fmt_num(z.real()), fmt_num(z.imag()),
                                                 fmt_num(w.real()), fmt_num(w.imag()),
                                                 fmt_num(wp.real()), fmt_num(wp.imag())};
        } catch (const std::exception& e) {
            failed = true;
            std::lock_guard<std::mutex> lk(fail_mu);
            fail_msg = e.what();
        }
    });
    if (failed) {
        std::cerr << "wt: " << fail_msg << "\n";
        return 3;
    }
    OutSink sink(out);
    emit_table(sink, format, {"re_z", "im_z", "re_W", "im_W", "re_Wp", "im_Wp"}, rows);
    return 0;
}

SMat2 s_by_route(const Model& model, const Cplx& z, const std::string& route,
                 const QuadConfig& quad) {
    if (route == "kn") return s_matrix(model, z, Path::Auto, quad);
    if (route == "rt") return s_matrix_rt(model, z, Path::Auto, quad);
    if (route == "closed") return s_matrix_closed(model, z);
    throw ConfigError("--route: must be kn, rt, or closed");
}

int cmd_smat(const RunConfig& cfg, const GridSpec& grid, const std::string& route,
             const std::string& format, const std::string& out) {
    const auto zs = grid.points();
    std::vector<std::vector<std::string>> rows(zs.size());
    std::atomic<bool> failed{false};
    std::string fail_msg;
    std::mutex fail_mu;
    parallel_for(static_cast<int>(zs.size()), [&](int i) {
        const Cplx z = zs[static_cast<std::size_t>(i)];
        auto& row = rows[static_cast<std::size_t>(i)];
        row = {fmt_num(z.real()), fmt_num(z.imag())};
        try {
            const SMat2 s = s_by_route(cfg.model, z, route, cfg.quad);
            const auto sv = singular_values(s);
            for (const Cplx& e : {s.s11, s.s12, s.s21, s.s22}) {
                row.push_back(fmt_num(e.real()));
                row.push_back(fmt_num(e.imag()));
            }
            row.push_back(fmt_num(sv[0]));
            row.push_back(fmt_num(sv[1]));
            row.push_back("0");
        } catch (const AtPole&) {
            // a pole inside a sweep is a result, not an error
            for (int k = 0; k < 10; ++k) row.push_back("nan");
            row.push_back("1");
        } catch (const std::exception& e) {
            failed = true;
            std::lock_guard<std::mutex> lk(fail_mu);
            fail_msg = e.what();
        }
    });
    if (failed) {
        std::cerr << "smat: " << fail_msg << "\n";
        return 3;
    }
    OutSink sink(out);
    emit_table(sink, format,
               {"re_z", "im_z", "re_s11", "im_s11", "re_s12", "im_s12", "re_s21", "im_s21",
                "re_s22", "im_s22", "sigma1", "sigma2", "pole"},
               rows);
    return 0;
}

int cmd_rt(const RunConfig& cfg, const GridSpec& grid, const std::string& format,
           const std::string& out) {
    const auto zs = grid.points();
    std::vector<std::vector<std::string>> rows(zs.size());
    std::atomic<bool> failed{false};
    std::string fail_msg;
    std::mutex fail_mu;
    parallel_for(static_cast<int>(zs.size()), [&](int i) {
        const Cplx z = zs[static_cast<std::size_t>(i)];
        auto& row = rows[static_cast<std::size_t>(i)];
        row = {fmt_num(z.real()), fmt_num(z.imag())};
        try {
            const RTCoeffs rt = rt_coefficients(cfg.model, z, Path::Auto, cfg.quad);
            for (const Cplx& e : {rt.r1, rt.t1, rt.r2, rt.t2}) {
                row.push_back(fmt_num(e.real()));
                row.push_back(fmt_num(e.imag()));
            }
            row.push_back("0");
        } catch (const AtPole&) {
            for (int k = 0; k < 8; ++k) row.push_back("nan");
            row.push_back("1");
        } catch (const std::exception& e) {
            failed = true;
            std::lock_guard<std::mutex> lk(fail_mu);
            fail_msg = e.what();
        }
    });
    if (failed) {
        std::cerr << "rt: " << fail_msg << "\n";
        return 3;
    }
    OutSink sink(out);
    emit_table(sink, format,
               {"re_z", "im_z", "re_r1", "im_r1", "re_t1", "im_t1", "re_r2", "im_r2", "re_t2",
                "im_t2", "pole"},
               rows);
    return 0;
}

json pole_report_json(const PoleReport& p) {
    json j;
    j["z"] = cplx_json(p.z);
    j["lambda"] = cplx_json(p.lambda);
    j["order"] = p.order;
    j["classification"] = pole_class_name(p.classification);
    j["region"] = region_name(p.region);
    j["residue"] = json{{"s11", cplx_json(p.residue.s11)},
                        {"s12", cplx_json(p.residue.s12)},
                        {"s21", cplx_json(p.residue.s21)},
                        {"s22", cplx_json(p.residue.s22)}};
    return j;
}

int cmd_poles(const RunConfig& cfg, const SearchRect& rect, const std::string& out) {
    std::vector<PoleReport> poles;
    try {
        poles = find_poles(cfg.model, rect, cfg.poles);
    } catch (const std::exception& e) {
        std::cerr << "poles: " << e.what() << "\n";
        return 3;
    }
    const RegionConsistency verdict = region_consistency(cfg.model, poles);
    json j;
    j["schema"] = kSchema;
    j["poles"] = json::array();
    for (const auto& p : poles) j["poles"].push_back(pole_report_json(p));
    j["consistent"] = verdict.consistent;
    j["violations"] = verdict.violations;
    OutSink sink(out);
    sink.stream() << j.dump(2) << "\n";
    return 0;
}

// Deterministic off-axis sample points in the lower half-plane.
std::vector<Cplx> verify_samples(int n, unsigned seed = 20260823u) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> re(-3.0, 3.0);
    std::uniform_real_distribution<double> im(-2.5, -0.2);
    std::vector<Cplx> out;
    while (static_cast<int>(out.size()) < n) {
        Cplx z{re(rng), im(rng)};
        if (std::abs(z.real()) < 0.15) continue;
        out.push_back(z);
    }
    return out;
}

int cmd_verify(const RunConfig& cfg, const std::string& out) {
    const Model& model = cfg.model;
    json suites = json::array();
    bool hard_fail = false;
    auto record = [&](const std::string& name, bool pass, double metric, bool hard) {
        suites.push_back(json{{"suite", name}, {"pass", pass}, {"metric", metric}, {"hard", hard}});
        if (hard && !pass) hard_fail = true;
    };

    const auto zs = verify_samples(12);

    // route equivalence: kn vs rt
    if (!model.a.infinite) {
        double worst = 0.0;
        bool ok = true;
        try {
            for (const Cplx& z : zs) {
                const SMat2 a = s_matrix(model, z, Path::Auto, cfg.quad);
                const SMat2 b = s_matrix_rt(model, z, Path::Auto, cfg.quad);
                worst = std::max(worst, max_entry_diff(a, b));
            }
            ok = worst < 1e-6;
        } catch (const std::exception&) {
            ok = false;
        }
        record("route_equivalence", ok, worst, true);
    }

    // oracle agreement where a closed form exists
    bool have_closed = true;
    try {
        s_matrix_closed(model, zs[0]);
    } catch (const UnsupportedFamily&) {
        have_closed = false;
    } catch (const std::exception&) {
    }
    if (have_closed) {
        double worst = 0.0;
        bool ok = true;
        try {
            for (const Cplx& z : zs)
                worst = std::max(
                    worst, max_entry_diff(s_matrix(model, z, Path::Auto, cfg.quad),
                                          s_matrix_closed(model, z)));
            ok = worst < 1e-7;
        } catch (const std::exception&) {
            ok = false;
        }
        record("oracle_agreement", ok, worst, true);
    }

    // adjoint relation
    if (!model.a.infinite) {
        double worst = 0.0;
        bool ok = true;
        const Model adj{Coupling::finite(std::conj(model.a.value)), model.profile};
        try {
            for (const Cplx& z : zs) {
                const SMat2 lhs = s_matrix(model, z, Path::Auto, cfg.quad).adjoint();
                const SMat2 rhs = s_matrix(adj, -std::conj(z), Path::Auto, cfg.quad);
                worst = std::max(worst, max_entry_diff(lhs, rhs));
            }
            ok = worst < 1e-8;
        } catch (const std::exception&) {
            ok = false;
        }
        record("adjoint_relation", ok, worst, true);

        // self-adjoint criterion: report only
        const bool sa = std::abs(model.a.value.imag()) < 1e-12;
        double sa_worst = 0.0;
        try {
            for (const Cplx& z : zs) {
                const SMat2 lhs = s_matrix(model, z, Path::Auto, cfg.quad).adjoint();
                const SMat2 rhs = s_matrix(model, -std::conj(z), Path::Auto, cfg.quad);
                sa_worst = std::max(sa_worst, max_entry_diff(lhs, rhs));
            }
        } catch (const std::exception&) {
        }
        suites.push_back(json{{"suite", "self_adjoint_criterion"},
                              {"self_adjoint", sa && sa_worst < 1e-8},
                              {"metric", sa_worst},
                              {"hard", false}});
    }

    // Herglotz sign of W
    {
        double worst = 1.0;
        bool ok = true;
        try {
            for (const Cplx& z : zs) {
                const Cplx w = weyl_titchmarsh(model.profile, z, Path::Auto, cfg.quad);
                const Cplx lam = z * z;
                if (std::abs(lam.imag()) < 1e-12) continue;
                worst = std::min(worst, w.imag() / lam.imag());
            }
            ok = worst > 0.0;
        } catch (const std::exception&) {
            ok = false;
        }
        record("herglotz", ok, worst, true);
    }

    // Psi contraction: diagnostic for non-Zero profiles, hard for Zero
    {
        double sigma_max = 0.0;
        bool ok = true;
        try {
            for (const Cplx& z : zs) {
                const SMat2 s = s_matrix(model, z, Path::Auto, cfg.quad);
                sigma_max = std::max(sigma_max, singular_values(s)[0]);
            }
        } catch (const AtPole&) {
        } catch (const std::exception&) {
            ok = false;
        }
        const bool hard = model.profile.is_zero() && !model.a.infinite &&
                          std::abs(model.a.value.imag()) < 1e-12 && model.a.value.real() >= 0.0;
        record("contraction", ok && (!hard || sigma_max <= 1.0 + 1e-12), sigma_max, hard);
    }

    // boundary mean of the eigenfunction
    {
        double worst = 0.0;
        bool ok = true;
        try {
            for (const Cplx& z : zs) {
                const PairFn u = eigenfunction_u(model.profile, z, Path::Auto, cfg.quad);
                worst = std::max(worst, std::abs(boundary_mean(u) - Cplx{1.0, 0.0}));
            }
            ok = worst < 1e-8;
        } catch (const std::exception&) {
            ok = false;
        }
        record("boundary_mean", ok, worst, true);
    }

    json j;
    j["schema"] = kSchema;
    j["suites"] = suites;
    j["pass"] = !hard_fail;
    OutSink sink(out);
    sink.stream() << j.dump(2) << "\n";
    return hard_fail ? 1 : 0;
}

std::vector<Cplx> parse_points(const std::string& s) {
    std::vector<Cplx> out;
    if (s.empty()) return out;
    std::istringstream is(s);
    std::string tok;
    while (std::getline(is, tok, ';')) {
        double re, im;
        char comma;
        std::istringstream ts(tok);
        if (!(ts >> re >> comma >> im) || comma != ',')
            throw ConfigError("--points: expected re,im;re,im;...");
        out.emplace_back(re, im);
    }
    return out;
}

int cmd_sweep(const RunConfig& cfg, const SearchRect& rect, const std::string& param,
              const std::vector<Cplx>& points, const std::string& out) {
    if (param != "a" && param != "M") throw ConfigError("--param: must be a or M");
    json steps = json::array();
    std::vector<PoleReport> prev;
    for (std::size_t step = 0; step < points.size(); ++step) {
        Model m = cfg.model;
        if (param == "a") {
            m.a = Coupling::finite(points[step]);
        } else {
            if (auto* eb = std::get_if<EvenBoxProfile>(&m.profile.v)) {
                eb->M = points[step];
            } else if (auto* ob = std::get_if<OddBoxProfile>(&m.profile.v)) {
                ob->M = points[step];
            } else if (auto* pe = std::get_if<PolyExpProfile>(&m.profile.v)) {
                pe->coeffs[0] = points[step];
            } else {
                throw ConfigError("sweep: parameter M requires a box or poly_exp profile");
            }
        }
        std::vector<PoleReport> poles;
        try {
            poles = find_poles(m, rect, cfg.poles);
        } catch (const std::exception& e) {
            std::cerr << "sweep: step " << step << ": " << e.what() << "\n";
            return 3;
        }
        json jstep;
        jstep["value"] = cplx_json(points[step]);
        jstep["poles"] = json::array();
        for (std::size_t k = 0; k < poles.size(); ++k) {
            json jp = pole_report_json(poles[k]);
            // nearest-neighbor link to the previous step's pole set
            int link = -1;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t q = 0; q < prev.size(); ++q) {
                const double d = std::abs(poles[k].z - prev[q].z);
                if (d < best) {
                    best = d;
                    link = static_cast<int>(q);
                }
            }
            jp["prev_index"] = link;
            jstep["poles"].push_back(jp);
        }
        steps.push_back(jstep);
        prev = std::move(poles);
    }
    json j;
    j["schema"] = kSchema;
    j["parameter"] = param;
    j["steps"] = steps;
    OutSink sink(out);
    sink.stream() << j.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"smatrix-lab: S-matrices of Schrodinger operators with nonlocal delta-interaction"};
    app.require_subcommand(1);

    std::string config_path, grid_str, rect_str, out_path, format, route = "kn", param = "a",
                             points_str;

    auto add_common = [&](CLI::App* sub, bool needs_grid, bool needs_rect) {
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        if (needs_grid) sub->add_option("--grid", grid_str, "re_min:re_max:n,im_min:im_max:n");
        if (needs_rect) sub->add_option("--rect", rect_str, "re_min:re_max,im_min:im_max");
        sub->add_option("--out", out_path, "output path (default stdout)");
        sub->add_option("--format", format, "csv|json");
    };

    auto* wt = app.add_subcommand("wt", "Weyl-Titchmarsh function on a grid");
    add_common(wt, true, false);
    auto* smat = app.add_subcommand("smat", "S-matrix entries and singular values on a grid");
    add_common(smat, true, false);
    smat->add_option("--route", route, "kn|rt|closed");
    auto* rt = app.add_subcommand("rt", "reflection/transmission coefficients on a grid");
    add_common(rt, true, false);
    auto* poles = app.add_subcommand("poles", "pole search in a rectangle");
    add_common(poles, false, true);
    auto* verify = app.add_subcommand("verify", "invariant suites for the configured model");
    add_common(verify, false, false);
    auto* sweep = app.add_subcommand("sweep", "pole trajectories along a parameter path");
    add_common(sweep, false, true);
    sweep->add_option("--param", param, "a|M");
    sweep->add_option("--points", points_str, "re,im;re,im;... parameter path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        RunConfig cfg = load_run_config(config_path);
        if (!format.empty()) {
            if (format != "csv" && format != "json") throw ConfigError("--format: must be csv or json");
            cfg.format = format;
        }
        const std::string out = out_path.empty() ? cfg.out_path : out_path;

        if (wt->parsed() || smat->parsed() || rt->parsed()) {
            if (grid_str.empty()) throw ConfigError("--grid is required for this subcommand");
            const GridSpec grid = parse_grid(grid_str);
            if (wt->parsed()) return cmd_wt(cfg, grid, cfg.format, out);
            if (smat->parsed()) return cmd_smat(cfg, grid, route, cfg.format, out);
            return cmd_rt(cfg, grid, cfg.format, out);
        }
        if (poles->parsed() || sweep->parsed()) {
            if (rect_str.empty()) throw ConfigError("--rect is required for this subcommand");
            const SearchRect rect = parse_rect(rect_str);
            if (poles->parsed()) return cmd_poles(cfg, rect, out);
            return cmd_sweep(cfg, rect, param, parse_points(points_str), out);
        }
        return cmd_verify(cfg, out);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
