#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "normflow/error.hpp"
#include "normflow/flow.hpp"
#include "normflow/majorant.hpp"
#include "normflow/resonance.hpp"
#include "normflow/series.hpp"
#include "normflow/siegel.hpp"

namespace normflow {

using Json = nlohmann::ordered_json;

/// Vector field document: n, lambda as [re, im] pairs, terms {m (1-based), k, re, im},
/// degree_cap, and optional rho, norm_hint, resonance_tolerance.
struct FieldDocument {
    FormalVectorField field;
    std::optional<double> rho;
    std::optional<double> norm_hint;
    std::optional<double> resonance_tolerance;

    Spectrum spectrum() const { return Spectrum(field.lambda(), resonance_tolerance.value_or(-1.0)); }
};

namespace detail {

inline double parse_number(const Json& j, const std::string& where)
{
    if (!j.is_number()) throw ParseError(where + ": expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ParseError(where + ": non-finite number");
    return v;
}

inline int parse_int(const Json& j, const std::string& where)
{
    if (!j.is_number_integer()) throw ParseError(where + ": expected an integer");
    const auto v = j.get<long long>();
    if (v < -1'000'000'000LL || v > 1'000'000'000LL) throw ParseError(where + ": integer out of range");
    return static_cast<int>(v);
}

inline const Json& member(const Json& obj, const char* key, const std::string& where)
{
    if (!obj.contains(key)) throw ParseError(where + ": missing field '" + key + "'");
    return obj.at(key);
}

inline std::optional<double> optional_number(const Json& obj, const char* key)
{
    if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
    return parse_number(obj.at(key), key);
}

} // namespace detail

inline FieldDocument parse_document(const Json& doc)
{
    if (!doc.is_object()) throw ParseError("document: expected a JSON object");
    const int n = detail::parse_int(detail::member(doc, "n", "document"), "n");
    if (n < 1 || n > MultiIndex::kMaxDim) throw ParseError("n: must be in [1, 8]");
    const int cap = detail::parse_int(detail::member(doc, "degree_cap", "document"), "degree_cap");
    if (cap < 2 || cap > MultiIndex::kMaxExponent) throw ParseError("degree_cap: must be in [2, 255]");

    const Json& lam = detail::member(doc, "lambda", "document");
    if (!lam.is_array() || static_cast<int>(lam.size()) != n) throw ParseError("lambda: expected an array of n [re, im] pairs");
    std::vector<Complex> lambda;
    for (std::size_t j = 0; j < lam.size(); ++j) {
        const std::string where = "lambda[" + std::to_string(j) + "]";
        if (!lam[j].is_array() || lam[j].size() != 2) throw ParseError(where + ": expected [re, im]");
        lambda.emplace_back(detail::parse_number(lam[j][0], where + "[0]"), detail::parse_number(lam[j][1], where + "[1]"));
    }

    FieldDocument out;
    out.field = FormalVectorField(lambda, cap);
    const Json& terms = detail::member(doc, "terms", "document");
    if (!terms.is_array()) throw ParseError("terms: expected an array");
    std::set<std::pair<int, MultiIndex>> seen;
    for (std::size_t t = 0; t < terms.size(); ++t) {
        const std::string where = "terms[" + std::to_string(t) + "]";
        const Json& term = terms[t];
        if (!term.is_object()) throw ParseError(where + ": expected an object");
        const int m = detail::parse_int(detail::member(term, "m", where), where + ".m");
        if (m < 1 || m > n) throw ParseError(where + ".m: component must be in [1, n]");
        const Json& k = detail::member(term, "k", where);
        if (!k.is_array() || static_cast<int>(k.size()) != n) throw ParseError(where + ".k: expected n exponents");
        std::vector<int> exps;
        for (std::size_t j = 0; j < k.size(); ++j) {
            const int e = detail::parse_int(k[j], where + ".k[" + std::to_string(j) + "]");
            if (e < 0) throw ParseError(where + ".k[" + std::to_string(j) + "]: negative exponent");
            if (e > MultiIndex::kMaxExponent) throw ParseError(where + ".k[" + std::to_string(j) + "]: exponent too large");
            exps.push_back(e);
        }
        const MultiIndex mk(exps);
        if (mk.order() < 2) throw ParseError(where + ".k: nonlinear terms need |k| >= 2");
        if (mk.order() > cap) throw ParseError(where + ".k: degree exceeds degree_cap");
        if (!seen.emplace(m, mk).second) throw ParseError(where + ": duplicate term for (m, k)");
        const double re = detail::parse_number(detail::member(term, "re", where), where + ".re");
        const double im = detail::parse_number(detail::member(term, "im", where), where + ".im");
        out.field.set(m - 1, mk, {re, im});
    }
    out.rho = detail::optional_number(doc, "rho");
    out.norm_hint = detail::optional_number(doc, "norm_hint");
    out.resonance_tolerance = detail::optional_number(doc, "resonance_tolerance");
    if (out.rho && !(*out.rho > 0.0)) throw ParseError("rho: must be positive");
    if (out.norm_hint && *out.norm_hint < 0.0) throw ParseError("norm_hint: must be nonnegative");
    if (out.resonance_tolerance && *out.resonance_tolerance < 0.0) throw ParseError("resonance_tolerance: must be >= 0");
    return out;
}

inline FieldDocument parse_document_text(const std::string& text)
{
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("JSON syntax: ") + e.what());
    }
    return parse_document(doc);
}

inline std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open input file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline FieldDocument load_document(const std::string& path) { return parse_document_text(read_file(path)); }

inline Json complex_pair(const Complex& c) { return Json::array({c.real(), c.imag()}); }

inline Json field_terms_json(const FormalVectorField& u)
{
    Json terms = Json::array();
    u.for_each([&](int m, const MultiIndex& k, const Complex& c) {
        terms.push_back({{"m", m + 1}, {"k", k.to_vector()}, {"re", c.real()}, {"im", c.imag()}});
    });
    return terms;
}

inline Json to_json(const FieldDocument& d)
{
    Json out;
    out["n"] = d.field.dim();
    Json lam = Json::array();
    for (const auto& l : d.field.lambda()) lam.push_back(complex_pair(l));
    out["lambda"] = lam;
    out["degree_cap"] = d.field.degree_cap();
    out["terms"] = field_terms_json(d.field);
    if (d.rho) out["rho"] = *d.rho;
    if (d.norm_hint) out["norm_hint"] = *d.norm_hint;
    if (d.resonance_tolerance) out["resonance_tolerance"] = *d.resonance_tolerance;
    return out;
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

inline Json map_json(const SeriesMap& phi)
{
    Json terms = Json::array();
    phi.for_each([&](int m, const MultiIndex& k, const Complex& c) {
        terms.push_back({{"m", m + 1}, {"k", k.to_vector()}, {"re", c.real()}, {"im", c.imag()}});
    });
    return {{"n", phi.dim()}, {"degree_cap", phi.degree_cap()}, {"terms", terms}};
}

inline Json to_json(const ResonanceReport& r)
{
    Json res = Json::array();
    for (const auto& s : r.resonant) res.push_back({{"m", s.m + 1}, {"k", s.k.to_vector()}});
    Json omega = Json::array();
    for (const auto& [s, v] : r.omega) omega.push_back({{"s", s}, {"omega", v}});
    Json a = Json::array();
    Json sums = Json::array();
    for (std::size_t j = 0; j < r.brjuno.a.size(); ++j) {
        a.push_back(r.brjuno.a[j]);
        sums.push_back(r.brjuno.partial[j]);
    }
    return {{"resonant", res},
            {"omega", omega},
            {"brjuno", {{"a", a}, {"partial_sums", sums}, {"a_nondecreasing", r.brjuno.a_nondecreasing}}}};
}

inline Json to_json(const MajorantCertificate& c)
{
    Json rows = Json::array();
    for (std::size_t i = 0; i < c.deltas.size(); ++i) {
        Json row = {{"delta", c.deltas[i]},
                    {"radius_bound", c.radius_bound[i]},
                    {"zeta_disc_radius", c.radius_bound[i] * c.n},
                    {"polydisk_radius", c.radius_bound[i]}};
        if (c.sup_bound[i])
            row["sup_bound"] = *c.sup_bound[i];
        else
            row["sup_bound"] = nullptr;
        rows.push_back(row);
    }
    Json viol = Json::array();
    for (const auto& v : c.violations)
        viol.push_back({{"m", v.m + 1}, {"k", v.k.to_vector()}, {"delta", v.delta}, {"value", v.value}, {"bound", v.bound}});
    return {{"rho", c.rho}, {"norm", c.norm_u}, {"grid", rows}, {"worst_ratio", c.worst_ratio}, {"violations", viol},
            {"holds", c.holds()}};
}

inline Json to_json(const Schedule& s)
{
    Json steps = Json::array();
    for (int m = 1; m <= s.N; ++m) {
        const auto i = static_cast<std::size_t>(m - 1);
        steps.push_back({{"m", m},
                         {"r", s.r[i]},
                         {"omega_r", s.omega[i]},
                         {"epsilon", s.epsilon[i]},
                         {"epsilon_closed_form", s.epsilon_closed[i]},
                         {"epsilon_prime", s.epsilon_prime[i]},
                         {"alpha", s.alpha[i + 1]},
                         {"rho", s.rho(m)},
                         {"rho_e_alpha", s.rho_alpha_product(m)}});
    }
    return {{"c", s.c},
            {"alpha0", s.alpha0},
            {"steps", steps},
            {"sum_epsilon", s.sum_epsilon()},
            {"sum_epsilon_prime", s.sum_epsilon_prime()},
            {"epsilon1_below_1_16", s.first_step_below_sixteenth()},
            {"first_epsilon_bound_violation", s.first_epsilon_bound_violation()},
            {"first_epsilon_prime_excess", s.first_epsilon_prime_excess()},
            {"det_bracket_ok", s.det_bracket_ok()}};
}

inline Json to_json(const StepResult& st)
{
    const auto& c = st.cert;
    return {{"r", st.r},
            {"band_annihilated", st.band_annihilated},
            {"min_support_degree", st.min_support_degree},
            {"first_shell_max", st.first_shell_max},
            {"hypothesis_bound_ok", st.hypothesis_bound_ok},
            {"coefficient_bound_ok", st.coefficient_bound_ok},
            {"certificate",
             {{"epsilon", c.epsilon},
              {"epsilon_prime", c.epsilon_prime},
              {"Delta", c.delta_big},
              {"Delta_prime", c.delta_prime},
              {"omega_2r_minus_2", c.omega},
              {"rho_next", c.rho_next},
              {"det_lo", c.det_lo},
              {"det_hi", c.det_hi},
              {"dnu_minus_i_bound", c.dnu_minus_i},
              {"dnu_norm_bound", c.dnu_norm},
              {"samples", c.samples},
              {"det_abs_min", c.det_abs_min},
              {"det_abs_max", c.det_abs_max},
              {"max_dev", c.max_dev},
              {"max_norm", c.max_norm},
              {"empirical_ok", c.empirical_ok}}}};
}

inline Json to_json(const SiegelResult& r)
{
    Json steps = Json::array();
    for (const auto& s : r.steps) steps.push_back(to_json(s));
    Json b = Json::array();
    for (double v : r.b.anchors) b.push_back(v);
    return {{"schedule", to_json(r.schedule)},
            {"b_anchors", b},
            {"steps", steps},
            {"normalizer", map_json(r.F)},
            {"residual", field_terms_json(r.residual)},
            {"residual_max", r.residual_max},
            {"conjugacy_error", r.conjugacy_error},
            {"eps_exp_partial_sums", r.eps_exp_partial},
            {"nu_origin_norms", r.nu_origin},
            {"nu_origin_bound_partial_sums", r.nu_origin_bound},
            {"det_F_min", r.det_F_min},
            {"det_F_max", r.det_F_max},
            {"det_F_in_bracket", r.det_F_in_bracket}};
}

/// Log-ish grid: 0, then 8 points per decade from 1e-3 * delta_max up to delta_max.
inline std::vector<double> trace_grid(double delta_max)
{
    require(delta_max > 0.0 && std::isfinite(delta_max), "trace_grid: delta_max must be positive and finite");
    std::vector<double> g{0.0};
    for (int i = 0; i <= 24; ++i) g.push_back(delta_max * std::pow(10.0, -3.0 + i / 8.0));
    g.back() = delta_max;
    return g;
}

/// CSV rows "delta,component,k,abs,re,im" for every solved slot, original gauge.
inline std::string decay_trace_csv(const FlowState& st, const std::vector<double>& grid)
{
    std::string out = "delta,component,k,abs,re,im\n";
    char buf[256];
    for (double d : grid) {
        for (const auto& [slot, s] : st.slots()) {
            const Complex v = FlowState::slot_value(s, d);
            std::snprintf(buf, sizeof buf, "%.17g,%d,%s,%.17g,%.17g,%.17g\n", d, slot.first + 1,
                          slot.second.dashed().c_str(), std::abs(v), v.real(), v.imag());
            out += buf;
        }
    }
    return out;
}

/// FNV-1a 64-bit digest, hex.
inline std::string content_digest(const std::string& bytes)
{
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace normflow
