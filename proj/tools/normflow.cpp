#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "normflow/normflow.hpp"

namespace fs = std::filesystem;
using namespace normflow;

namespace {

#ifndef NORMFLOW_DATA_DIR
#define NORMFLOW_DATA_DIR "data"
#endif

struct Outputs {
    std::vector<std::string> files;

    void write(const std::string& path, const std::string& text)
    {
        if (path.empty() || path == "-") {
            std::cout << text;
            return;
        }
        std::ofstream out(path, std::ios::binary);
        if (!out) throw PreconditionError("cannot write output file '" + path + "'");
        out << text;
        files.push_back(path);
    }
};

double parse_delta(const std::string& s)
{
    if (s == "inf" || s == "+inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw ParseError("--delta: expected a nonnegative number or 'inf', got '" + s + "'");
    }
    if (used != s.size() || !(v >= 0.0)) throw ParseError("--delta: expected a nonnegative number or 'inf', got '" + s + "'");
    return v;
}

std::vector<double> parse_grid(const std::string& s)
{
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const double v = parse_delta(item);
        if (std::isinf(v)) throw ParseError("--delta-grid: values must be finite");
        out.push_back(v);
    }
    if (out.empty()) throw ParseError("--delta-grid: empty grid");
    return out;
}

// ---------------------------------------------------------------------------

struct ResonancesArgs {
    std::string input, output;
    int max_degree = 0;
    int brjuno_depth = 10;
};

void cmd_resonances(const ResonancesArgs& a, Outputs& out)
{
    const FieldDocument doc = load_document(a.input);
    const int D = a.max_degree > 0 ? a.max_degree : doc.field.degree_cap();
    const ResonanceReport r = resonance_report(doc.spectrum(), D, a.brjuno_depth);
    Json j = to_json(r);
    j["max_degree"] = D;
    out.write(a.output, dump(j));
}

struct NormalizeArgs {
    std::string input, output, delta = "1", trace;
    int cap = 0;
    double trace_max = 10.0;
};

void cmd_normalize(const NormalizeArgs& a, Outputs& out)
{
    const FieldDocument doc = load_document(a.input);
    const int cap = a.cap > 0 ? a.cap : doc.field.degree_cap();
    require(cap >= 2 && cap <= MultiIndex::kMaxExponent, "--cap: must be in [2, 255]");
    const double delta = parse_delta(a.delta);
    const FlowState st = normalize_exact(doc.field, doc.spectrum(), cap);
    FieldDocument res;
    res.field = std::isinf(delta) ? normal_form_limit(st) : st.at(delta);
    res.resonance_tolerance = doc.resonance_tolerance;
    if (delta == 0.0) {
        res.rho = doc.rho;
        res.norm_hint = doc.norm_hint;
    }
    if (!a.trace.empty()) {
        const double top = std::isinf(delta) ? a.trace_max : (delta > 0.0 ? delta : a.trace_max);
        out.write(a.trace, decay_trace_csv(st, trace_grid(top)));
    }
    out.write(a.output, dump(to_json(res)));
}

struct RadiusArgs {
    std::string input, output, grid = "0,0.5,1,2,10";
    std::optional<double> rho;
    bool verify = false;
    int cap = 0;
};

void cmd_radius(const RadiusArgs& a, Outputs& out)
{
    const FieldDocument doc = load_document(a.input);
    const double rho = a.rho ? *a.rho : doc.rho.value_or(1.0);
    require(rho > 0.0, "--rho: must be positive");
    const std::vector<double> grid = parse_grid(a.grid);
    const int n = doc.field.dim();
    const double norm = doc.norm_hint ? *doc.norm_hint : sup_norm_bound(doc.field, rho);
    require(norm >= sup_norm_bound(doc.field, rho) * (1.0 - 1e-15), "norm_hint: below the coefficient-sum bound at rho");

    Json rows = Json::array();
    for (double d : grid) {
        const double r = radius_lower_bound(rho, norm, n, d);
        Json row = {{"delta", d}, {"radius_bound", r}, {"zeta_disc_radius", r * n}, {"polydisk_radius", r}};
        if (d > 0.0) {
            row["sup_bound"] = sup_bound(rho, norm, n, d);
        } else {
            row["sup_bound"] = nullptr;
            row["sup_bound_caveat"] = "the sup bound diverges as delta -> 0; no finite value at delta = 0";
        }
        rows.push_back(row);
    }
    Json j = {{"rho", rho}, {"norm", norm}, {"n", n}, {"grid", rows}};
    if (a.verify) {
        const int cap = a.cap > 0 ? a.cap : doc.field.degree_cap();
        const MajorantCertificate cert = verify_majorant_chain(doc.field, doc.spectrum(), cap, rho, grid, norm);
        j["verification"] = {{"cap", cap},
                             {"worst_ratio", cert.worst_ratio},
                             {"violations", to_json(cert)["violations"]},
                             {"holds", cert.holds()}};
        out.write(a.output, dump(j));
        ensure(cert.holds(), "majorant chain violated at " + std::to_string(cert.violations.size()) + " slot(s)");
        return;
    }
    out.write(a.output, dump(j));
}

struct SiegelArgs {
    std::string input, output;
    int cap = 0;
    std::optional<double> c, alpha0;
    bool auto_calibrate = false;
    int samples = 10;
};

void cmd_siegel(const SiegelArgs& a, Outputs& out)
{
    const FieldDocument doc = load_document(a.input);
    const int cap = a.cap > 0 ? a.cap : doc.field.degree_cap();
    const Spectrum spec = doc.spectrum();
    for (const auto& slot : resonant_set(spec, cap))
        throw PreconditionError("resonance found at (k, m) = (" + slot.k.dashed() + ", " + std::to_string(slot.m + 1) + ")");
    const int N = siegel_step_count(cap);
    const BSequence b = build_b_sequence(spec, N + 2);
    Json cal_json;
    double c = 0.0, alpha0 = 0.0;
    if (a.auto_calibrate || !a.c) {
        require(!a.c && !a.alpha0, "--auto-calibrate excludes --c and --alpha0");
        const Calibration cal = calibrate(doc.field, b, doc.rho.value_or(1.0));
        c = cal.c;
        alpha0 = cal.alpha0;
        cal_json = {{"c_hat", cal.c_hat}, {"alpha_hat", cal.alpha_hat}, {"c", cal.c}, {"alpha0", cal.alpha0}};
    } else {
        require(a.alpha0.has_value(), "--c requires --alpha0");
        c = *a.c;
        alpha0 = *a.alpha0;
    }
    const SiegelResult r = siegel_pipeline(doc.field, spec, c, alpha0, cap, &b, a.samples);
    Json j = to_json(r);
    if (!cal_json.is_null()) j["calibration"] = cal_json;
    std::vector<std::string> failed;
    for (const auto& s : r.steps) {
        const std::string tag = "step r=" + std::to_string(s.r) + ": ";
        if (!s.band_annihilated) failed.push_back(tag + "band not annihilated");
        if (!s.cert.empirical_ok) failed.push_back(tag + "Jacobian certificate violated");
    }
    if (!r.schedule.first_step_below_sixteenth()) failed.push_back("schedule: eps_1 >= 1/16");
    if (const int m = r.schedule.first_epsilon_bound_violation()) failed.push_back("schedule: eps_" + std::to_string(m) + " above 2^{-m-2}");
    if (!r.schedule.det_bracket_ok()) failed.push_back("schedule: determinant bracket");
    if (!r.det_F_in_bracket) failed.push_back("normalizer determinant outside the bracket");
    j["failures"] = failed;
    out.write(a.output, dump(j));
    if (!failed.empty()) throw InvariantError("siegel: " + failed.front());
}

// ---------------------------------------------------------------------------
// Self test over the bundled corpus.

struct SelfTest {
    std::vector<std::string> lines;
    int passed = 0;
    int failed = 0;

    template <class F>
    void check(const std::string& name, F&& body)
    {
        std::string detail;
        bool ok = false;
        try {
            ok = body(detail);
        } catch (const std::exception& e) {
            detail = e.what();
        }
        (ok ? passed : failed)++;
        lines.push_back(std::string(ok ? "PASS " : "FAIL ") + name + (detail.empty() ? "" : " (" + detail + ")"));
    }
};

Json golden_of(const FieldDocument& doc)
{
    const FlowState st = normalize_exact(doc.field, doc.spectrum(), doc.field.degree_cap());
    FieldDocument at1, limit;
    at1.field = st.at(1.0);
    limit.field = normal_form_limit(st);
    return {{"delta_1", to_json(at1)}, {"limit", to_json(limit)}};
}

double field_distance(const FormalVectorField& a, const FormalVectorField& b)
{
    double scale = 1.0;
    a.for_each([&](int, const MultiIndex&, const Complex& c) { scale = std::max(scale, std::abs(c)); });
    return max_abs_difference(a, b) / scale;
}

int cmd_selftest(const std::string& data_dir, bool write_golden)
{
    const fs::path corpus = fs::path(data_dir) / "corpus";
    const fs::path golden = fs::path(data_dir) / "golden";
    std::vector<fs::path> seeds;
    if (fs::is_directory(corpus))
        for (const auto& e : fs::directory_iterator(corpus))
            if (e.path().extension() == ".json") seeds.push_back(e.path());
    std::sort(seeds.begin(), seeds.end());

    SelfTest t;
    t.check("corpus/present", [&](std::string& d) {
        d = std::to_string(seeds.size()) + " seeds";
        return !seeds.empty();
    });
    for (const auto& path : seeds) {
        const std::string name = path.stem().string();
        std::optional<FieldDocument> doc;
        t.check(name + "/parse-roundtrip", [&](std::string&) {
            doc = load_document(path.string());
            const std::string once = dump(to_json(*doc));
            return dump(to_json(parse_document_text(once))) == once;
        });
        if (!doc) continue;
        const Spectrum spec = doc->spectrum();
        const int cap = doc->field.degree_cap();
        std::optional<FlowState> st;
        t.check(name + "/exact-vs-rk4", [&](std::string& d) {
            st.emplace(normalize_exact(doc->field, spec, cap));
            const NumericTrajectory tr = normalize_numeric(doc->field, spec, cap, 1.0, 1.0 / 128);
            double err = 0.0;
            for (std::size_t i = 0; i < tr.slots.size(); ++i) {
                const auto& [m, k] = tr.slots[i];
                err = std::max(err, std::abs(tr.reduced.back()[i] - st->reduced_value(m, k, 1.0)));
            }
            char buf[64];
            std::snprintf(buf, sizeof buf, "max error %.3g", err);
            d = buf;
            return err < 1e-6;
        });
        if (!st) continue;
        t.check(name + "/normal-form-support", [&](std::string&) {
            normal_form_limit(*st);
            return true;
        });
        t.check(name + "/conjugacy", [&](std::string& d) {
            double worst = 0.0;
            for (double delta : {1.0, std::numeric_limits<double>::infinity()}) {
                const SeriesMap g = change_of_variables(*st, delta, cap);
                worst = std::max(worst, max_abs_difference(pushforward(g, doc->field, cap), st->at(delta)));
            }
            char buf[64];
            std::snprintf(buf, sizeof buf, "max error %.3g", worst);
            d = buf;
            return worst < 1e-9;
        });
        if (doc->rho) {
            t.check(name + "/majorant-chain", [&](std::string&) {
                return verify_majorant_chain(doc->field, spec, cap, *doc->rho, {0.0, 0.5, 1.0, 2.0, 10.0}, doc->norm_hint)
                    .holds();
            });
        }
        const fs::path gpath = golden / (name + ".json");
        if (write_golden) {
            fs::create_directories(golden);
            std::ofstream(gpath, std::ios::binary) << dump(golden_of(*doc));
        }
        t.check(name + "/golden", [&](std::string& d) {
            const Json g = Json::parse(read_file(gpath.string()));
            const Json now = golden_of(*doc);
            double worst = 0.0;
            for (const char* key : {"delta_1", "limit"}) {
                if (!g.contains(key)) throw ParseError(std::string("golden: missing '") + key + "'");
                const FieldDocument want = parse_document(g.at(key));
                const FieldDocument have = parse_document(now.at(key));
                worst = std::max(worst, field_distance(want.field, have.field));
            }
            char buf[64];
            std::snprintf(buf, sizeof buf, "relative deviation %.3g", worst);
            d = buf;
            return worst <= 1e-12;
        });
    }
    for (const auto& l : t.lines) std::cout << l << "\n";
    std::cout << "selftest: " << (t.passed + t.failed) << " checks, " << t.passed << " passed, " << t.failed << " failed\n";
    return t.failed == 0 ? 0 : 4;
}

void write_manifest(const std::string& path, const std::string& command, const std::vector<std::string>& args,
                    const std::string& input, const Outputs& outs, double seconds)
{
    Json j;
    j["command"] = command;
    j["arguments"] = args;
    j["input"] = input;
    j["input_digest"] = input.empty() ? std::string() : "fnv1a64:" + content_digest(read_file(input));
    j["threads"] = thread_count();
    j["library_version"] = library_version();
    j["wall_time_seconds"] = seconds;
    j["outputs"] = outs.files;
    std::ofstream(path, std::ios::binary) << dump(j);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Normal forms of vector fields by continuous averaging"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(library_version()));
    int threads = -1;
    std::string manifest;
    app.add_option("--threads", threads, "worker threads (default: NORMFLOW_THREADS or 1)")->check(CLI::NonNegativeNumber);
    app.add_option("--manifest", manifest, "write a run manifest JSON to this path");

    ResonancesArgs ra;
    auto* res = app.add_subcommand("resonances", "resonant slots, Omega table and Brjuno partial sums");
    res->add_option("input", ra.input, "field document (JSON)")->required();
    res->add_option("--max-degree", ra.max_degree, "largest |k| (default: degree_cap)");
    res->add_option("--brjuno-depth", ra.brjuno_depth, "number of dyadic Brjuno terms")->check(CLI::Range(1, 24));
    res->add_option("-o,--output", ra.output, "output path (default: stdout)");

    NormalizeArgs na;
    auto* nor = app.add_subcommand("normalize", "flow the field to delta (or to the normal form at inf)");
    nor->add_option("input", na.input, "field document (JSON)")->required();
    nor->add_option("--delta", na.delta, "flow time: a nonnegative number or 'inf'");
    nor->add_option("--cap", na.cap, "degree cap (default: degree_cap)");
    nor->add_option("--trace", na.trace, "decay-trace CSV path");
    nor->add_option("--trace-max", na.trace_max, "last trace delta when --delta is 0 or inf")->check(CLI::PositiveNumber);
    nor->add_option("-o,--output", na.output, "output path (default: stdout)");

    RadiusArgs rda;
    auto* rad = app.add_subcommand("radius", "analyticity radius and sup bounds along the flow");
    rad->add_option("input", rda.input, "field document (JSON)")->required();
    rad->add_option("--rho", rda.rho, "polydisk radius of the seed (default: document rho, else 1)");
    rad->add_option("--delta-grid", rda.grid, "comma-separated flow times");
    rad->add_flag("--verify", rda.verify, "check every slot against the majorant chain");
    rad->add_option("--cap", rda.cap, "degree cap for --verify (default: degree_cap)");
    rad->add_option("-o,--output", rda.output, "output path (default: stdout)");

    SiegelArgs sa;
    auto* sie = app.add_subcommand("siegel", "iterated band normalization with certificates");
    sie->add_option("input", sa.input, "field document (JSON)")->required();
    sie->add_option("--cap", sa.cap, "degree cap (default: degree_cap)");
    auto* copt = sie->add_option("--c", sa.c, "schedule constant c");
    auto* aopt = sie->add_option("--alpha0", sa.alpha0, "schedule exponent alpha_0");
    auto* auto_opt = sie->add_flag("--auto-calibrate", sa.auto_calibrate, "derive (c, alpha_0) from the seed");
    auto_opt->excludes(copt)->excludes(aopt);
    sie->add_option("--samples", sa.samples, "sample points per Jacobian certificate")->check(CLI::Range(1, 1000));
    sie->add_option("-o,--output", sa.output, "output path (default: stdout)");

    std::string data_dir = std::getenv("NORMFLOW_DATA") ? std::getenv("NORMFLOW_DATA") : NORMFLOW_DATA_DIR;
    bool write_golden = false;
    auto* st = app.add_subcommand("selftest", "run the bundled corpus through the invariant suites");
    st->add_option("--data-dir", data_dir, "directory holding corpus/ and golden/");
    st->add_flag("--write-golden", write_golden, "regenerate golden files before checking");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (threads >= 0) set_thread_count(threads);
    const auto t0 = std::chrono::steady_clock::now();
    Outputs outs;
    std::string command, input;
    int code = 0;
    try {
        if (*res) {
            command = "resonances";
            input = ra.input;
            cmd_resonances(ra, outs);
        } else if (*nor) {
            command = "normalize";
            input = na.input;
            cmd_normalize(na, outs);
        } else if (*rad) {
            command = "radius";
            input = rda.input;
            cmd_radius(rda, outs);
        } else if (*sie) {
            command = "siegel";
            input = sa.input;
            cmd_siegel(sa, outs);
        } else {
            command = "selftest";
            code = cmd_selftest(data_dir, write_golden);
        }
    } catch (const Error& e) {
        std::cerr << "normflow " << command << ": " << e.what() << "\n";
        code = e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "normflow " << command << ": internal error: " << e.what() << "\n";
        code = 4;
    }
    if (!manifest.empty()) {
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::vector<std::string> args(argv + 1, argv + argc);
        try {
            write_manifest(manifest, command, args, input, outs, secs);
        } catch (const Error& e) {
            std::cerr << "normflow: manifest: " << e.what() << "\n";
        }
    }
    return code;
}
