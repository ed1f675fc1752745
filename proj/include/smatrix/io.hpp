#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "smatrix/model.hpp"
#include "smatrix/poles.hpp"

namespace smx {

using nlohmann::json;

namespace detail {

inline void reject_unknown(const json& obj, std::initializer_list<const char*> allowed,
                           const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed)
            if (it.key() == a) ok = true;
        if (!ok) throw ConfigError(where + ": unknown field \"" + it.key() + "\"");
    }
}

inline double get_num(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw ConfigError(where + ": missing field \"" + key + "\"");
    if (!obj[key].is_number()) throw ConfigError(where + ": field \"" + key + "\" must be a number");
    return obj[key].get<double>();
}

inline Cplx get_cplx(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw ConfigError(where + ": missing field \"" + key + "\"");
    const json& v = obj[key];
    if (!v.is_object()) throw ConfigError(where + ": field \"" + key + "\" must be {re, im}");
    reject_unknown(v, {"re", "im"}, where + "." + key);
    return {get_num(v, "re", where + "." + key), get_num(v, "im", where + "." + key)};
}

inline InnerFn parse_inner(const json& v, const std::string& where) {
    if (!v.is_object()) throw ConfigError(where + ": inner function must be an object");
    reject_unknown(v, {"kind", "rho", "k"}, where);
    if (!v.contains("kind")) throw ConfigError(where + ": missing field \"kind\"");
    const std::string kind = v["kind"].get<std::string>();
    if (kind == "one") return InnerFn::one();
    if (kind == "shift") return InnerFn::shift(get_num(v, "rho", where));
    if (kind == "blaschke_pow") return InnerFn::blaschke_pow(static_cast<int>(get_num(v, "k", where)));
    throw ConfigError(where + ": unknown inner function kind \"" + kind + "\"");
}

}  // namespace detail

inline Profile parse_profile(const json& p) {
    if (!p.is_object()) throw ConfigError("profile: must be an object");
    if (!p.contains("kind")) throw ConfigError("profile: missing field \"kind\"");
    const std::string kind = p["kind"].get<std::string>();
    if (kind == "zero") {
        detail::reject_unknown(p, {"kind"}, "profile");
        return Profile::zero();
    }
    if (kind == "even_box" || kind == "odd_box") {
        detail::reject_unknown(p, {"kind", "M", "rho"}, "profile");
        const Cplx M = detail::get_cplx(p, "M", "profile");
        const double rho = detail::get_num(p, "rho", "profile");
        return kind == "even_box" ? Profile::even_box(M, rho) : Profile::odd_box(M, rho);
    }
    if (kind == "poly_exp") {
        detail::reject_unknown(p, {"kind", "coeffs"}, "profile");
        if (!p.contains("coeffs") || !p["coeffs"].is_array())
            throw ConfigError("profile: poly_exp requires array field \"coeffs\"");
        std::vector<Cplx> coeffs;
        for (std::size_t i = 0; i < p["coeffs"].size(); ++i) {
            const json& c = p["coeffs"][i];
            detail::reject_unknown(c, {"re", "im"}, "profile.coeffs");
            coeffs.emplace_back(detail::get_num(c, "re", "profile.coeffs"),
                                detail::get_num(c, "im", "profile.coeffs"));
        }
        return Profile::poly_exp(std::move(coeffs));
    }
    if (kind == "numeric") {
        detail::reject_unknown(p, {"kind", "grid", "q1", "q2", "psi1", "psi2"}, "profile");
        for (const char* key : {"grid", "q1", "q2"})
            if (!p.contains(key) || !p[key].is_array())
                throw ConfigError(std::string("profile: numeric requires array field \"") + key + "\"");
        std::vector<double> grid = p["grid"].get<std::vector<double>>();
        auto parse_samples = [&](const char* key) {
            std::vector<Cplx> out;
            for (const json& c : p[key]) {
                detail::reject_unknown(c, {"re", "im"}, std::string("profile.") + key);
                out.emplace_back(detail::get_num(c, "re", "profile"), detail::get_num(c, "im", "profile"));
            }
            return out;
        };
        if (!p.contains("psi1") || !p.contains("psi2"))
            throw ConfigError("profile: numeric requires declared psi1 and psi2");
        return Profile::numeric(std::move(grid), parse_samples("q1"), parse_samples("q2"),
                                detail::parse_inner(p["psi1"], "profile.psi1"),
                                detail::parse_inner(p["psi2"], "profile.psi2"));
    }
    throw ConfigError("profile: unknown kind \"" + kind + "\"");
}

inline Model parse_model(const json& m) {
    if (!m.is_object()) throw ConfigError("model: must be an object");
    detail::reject_unknown(m, {"a", "profile"}, "model");
    if (!m.contains("a")) throw ConfigError("model: missing field \"a\"");
    if (!m.contains("profile")) throw ConfigError("model: missing field \"profile\"");
    Coupling a;
    if (m["a"].is_string()) {
        if (m["a"].get<std::string>() != "inf")
            throw ConfigError("model: \"a\" string value must be \"inf\"");
        a = Coupling::infinity();
    } else {
        const json& av = m["a"];
        if (!av.is_object()) throw ConfigError("model: \"a\" must be {re, im} or \"inf\"");
        detail::reject_unknown(av, {"re", "im"}, "model.a");
        a = Coupling::finite({detail::get_num(av, "re", "model.a"), detail::get_num(av, "im", "model.a")});
    }
    return Model{a, parse_profile(m["profile"])};
}

struct RunConfig {
    Model model{Coupling::finite({0.0, 0.0}), Profile::zero()};
    QuadConfig quad;
    PoleConfig poles;
    std::string format = "csv";  // csv | json
    std::string out_path;        // empty: stdout
};

inline RunConfig parse_run_config(const json& j) {
    if (!j.is_object()) throw ConfigError("config: must be an object");
    detail::reject_unknown(j, {"model", "quad", "poles", "format", "out"}, "config");
    if (!j.contains("model")) throw ConfigError("config: missing field \"model\"");
    RunConfig cfg;
    cfg.model = parse_model(j["model"]);
    if (j.contains("quad")) {
        const json& q = j["quad"];
        detail::reject_unknown(q, {"abs_tol", "rel_tol", "max_subdivisions", "tail_cutoff_tol"},
                               "config.quad");
        if (q.contains("abs_tol")) cfg.quad.abs_tol = q["abs_tol"].get<double>();
        if (q.contains("rel_tol")) cfg.quad.rel_tol = q["rel_tol"].get<double>();
        if (q.contains("max_subdivisions")) cfg.quad.max_subdivisions = q["max_subdivisions"].get<int>();
        if (q.contains("tail_cutoff_tol")) cfg.quad.tail_cutoff_tol = q["tail_cutoff_tol"].get<double>();
        if (!(cfg.quad.abs_tol > 0.0) || !(cfg.quad.rel_tol > 0.0) ||
            cfg.quad.max_subdivisions < 1 || !(cfg.quad.tail_cutoff_tol > 0.0))
            throw ConfigError("config.quad: tolerances must be positive, max_subdivisions >= 1");
    }
    if (j.contains("poles")) {
        const json& q = j["poles"];
        detail::reject_unknown(
            q, {"refine_tol", "wprime_tol", "silent_tol", "cluster_tol", "n_res", "r_res"},
            "config.poles");
        if (q.contains("refine_tol")) cfg.poles.refine_tol = q["refine_tol"].get<double>();
        if (q.contains("wprime_tol")) cfg.poles.wprime_tol = q["wprime_tol"].get<double>();
        if (q.contains("silent_tol")) cfg.poles.silent_tol = q["silent_tol"].get<double>();
        if (q.contains("cluster_tol")) cfg.poles.cluster_tol = q["cluster_tol"].get<double>();
        if (q.contains("n_res")) cfg.poles.n_res = q["n_res"].get<int>();
        if (q.contains("r_res")) cfg.poles.r_res = q["r_res"].get<double>();
    }
    if (j.contains("format")) {
        cfg.format = j["format"].get<std::string>();
        if (cfg.format != "csv" && cfg.format != "json")
            throw ConfigError("config: format must be \"csv\" or \"json\"");
    }
    if (j.contains("out")) cfg.out_path = j["out"].get<std::string>();
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: JSON parse error: ") + e.what());
    }
    return parse_run_config(j);
}

// Fixed 17-significant-digit formatting so identical configs give
// byte-identical output.
inline std::string fmt_num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

inline json cplx_json(const Cplx& v) { return json{{"re", v.real()}, {"im", v.imag()}}; }

}  // namespace smx
