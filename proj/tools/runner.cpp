#include "runner.hpp"

#include "pec/errors.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace pec::cli {

using nlohmann::json;

// ---- parsing helpers ----------------------------------------------------------------------

namespace {

double parse_number(const std::string &s) {
    size_t used = 0;
    double v = 0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception &) {
        throw UsageError("not a number: '" + s + "'");
    }
    if (used != s.size() || !std::isfinite(v)) throw UsageError("not a number: '" + s + "'");
    return v;
}

std::string trim(const std::string &s) {
    auto b = s.find_first_not_of(" \t"), e = s.find_last_not_of(" \t");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

std::string fmt(const char *f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

} // namespace

double parse_neg_log2_eps(const std::string &raw) {
    std::string s = trim(raw);
    if (s.rfind("2^", 0) == 0) {
        double k = -parse_number(s.substr(2));
        if (!(k > 0)) throw UsageError("epsilon must lie in (0,1): '" + raw + "'");
        return k;
    }
    double v = parse_number(s);
    if (!(v > 0 && v < 1)) throw UsageError("epsilon must lie in (0,1): '" + raw + "'");
    return -std::log2(v);
}

std::vector<double> parse_list(const std::string &s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_number(trim(item)));
    if (out.empty()) throw UsageError("empty list");
    return out;
}

std::vector<double> parse_grid(const std::string &s) {
    std::vector<double> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(parse_number(trim(item)));
    if (parts.size() != 3 || !(parts[2] > 0) || parts[1] < parts[0])
        throw UsageError("grid must be a:b:step with a <= b and step > 0: '" + s + "'");
    long count = std::lround(std::floor((parts[1] - parts[0]) / parts[2] + 1e-9)) + 1;
    if (count > 100000) throw UsageError("grid too long");
    std::vector<double> out;
    // points as a + i*step so 0:0.06:0.005 prints 0.035, not 0.034999...
    for (long i = 0; i < count; ++i) out.push_back(std::stod(fmt("%.12g", parts[0] + i * parts[2])));
    return out;
}

void parallel_for(int n, int threads, const std::function<void(int)> &f) {
    if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) {
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard<std::mutex> g(mu);
                    if (!first) first = std::current_exception();
                }
            }
        });
    for (auto &th : pool) th.join();
    if (first) std::rethrow_exception(first);
}

// ---- output -------------------------------------------------------------------------------

std::string keyrate_csv(const std::vector<KeyrateRow> &rows) {
    bool flagged = false;
    for (const auto &r : rows) flagged = flagged || !r.error.empty();
    std::string out = kKeyrateHeader;
    if (flagged) out += ",flag";
    out += '\n';
    for (const auto &r : rows) {
        const auto &k = r.result;
        bool bad = !r.error.empty();
        double n = r.point.nTot;
        out += (n == std::floor(n) && n < 1e18 ? fmt("%.0f", n) : fmt("%.10g", n)) + ',' + fmt("%.10g", r.point.p) + ',' + to_string(r.point.analysis) + ',';
        out += (std::isnan(k.alpha) || bad ? std::string("nan") : fmt("%.10g", k.alpha)) + ',';
        out += fmt("%.15g", bad ? 0.0 : k.nFin) + ',' + fmt("%.15g", bad ? 0.0 : k.ecCost) + ',';
        out += fmt("%.15g", bad ? 0.0 : k.netKey) + ',' + fmt("%.15g", bad ? 0.0 : k.keyRate) + ',';
        out += (bad ? std::string("nan") : fmt("%.6e", std::exp2(k.log2EpsSec))) + ',';
        out += (bad ? std::string("nan") : fmt("%.6e", std::exp2(k.log2EpsCor))) + ',';
        out += std::to_string(r.seed);
        if (flagged) {
            std::string e = r.error;
            for (char &c : e)
                if (c == ',' || c == '\n' || c == '"') c = ' ';
            out += ',' + e;
        }
        out += '\n';
    }
    return out;
}

std::string keyrate_svg(const std::vector<KeyrateRow> &rows) {
    // one polyline per (analysis, p), log10 n_tot on x
    std::map<std::pair<std::string, double>, std::vector<std::pair<double, double>>> curves;
    double xmin = 1e300, xmax = -1e300, ymax = 0;
    for (const auto &r : rows) {
        double x = std::log10(r.point.nTot), y = r.error.empty() ? r.result.keyRate : 0.0;
        curves[{to_string(r.point.analysis), r.point.p}].push_back({x, y});
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymax = std::max(ymax, y);
    }
    if (xmax <= xmin) xmax = xmin + 1;
    if (ymax <= 0) ymax = 1;
    const double w = 640, h = 400, l = 70, r = 20, t = 20, b = 50;
    auto px = [&](double x) { return l + (x - xmin) / (xmax - xmin) * (w - l - r); };
    auto py = [&](double y) { return h - b - y / (1.05 * ymax) * (h - t - b); };
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<line x1=\"" << l << "\" y1=\"" << h - b << "\" x2=\"" << w - r << "\" y2=\"" << h - b << "\" stroke=\"black\"/>\n";
    o << "<line x1=\"" << l << "\" y1=\"" << t << "\" x2=\"" << l << "\" y2=\"" << h - b << "\" stroke=\"black\"/>\n";
    for (int e = static_cast<int>(std::ceil(xmin)); e <= static_cast<int>(std::floor(xmax)); ++e)
        o << "<text x=\"" << px(e) << "\" y=\"" << h - b + 18 << "\" font-size=\"11\" text-anchor=\"middle\">1e" << e
          << "</text>\n";
    o << "<text x=\"" << (l + w - r) / 2 << "\" y=\"" << h - 8 << "\" font-size=\"12\" text-anchor=\"middle\">n_tot</text>\n";
    o << "<text x=\"" << 12 << "\" y=\"" << t + 10 << "\" font-size=\"12\">key rate (max " << fmt("%.4g", ymax)
      << ")</text>\n";
    const char *colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
    int ci = 0, li = 0;
    for (const auto &[key, pts] : curves) {
        const char *col = colors[ci++ % 6];
        o << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\""
          << (key.first == "conventional" ? " stroke-dasharray=\"5,3\"" : "") << " points=\"";
        for (const auto &[x, y] : pts) o << fmt("%.2f", px(x)) << ',' << fmt("%.2f", py(y)) << ' ';
        o << "\"/>\n";
        o << "<text x=\"" << w - r - 150 << "\" y=\"" << t + 14 * ++li << "\" font-size=\"11\" fill=\"" << col << "\">"
          << key.first << " p=" << fmt("%g", key.second) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

json error_report_json(const ErrorReport &r) {
    json curve = json::array();
    for (const auto &[a, e] : r.exponentCurve) curve.push_back({a, e});
    return {{"exactPerr", r.exactPerr}, {"stdErr", r.stdErr},       {"boundPerr", r.boundPerr},
            {"exponentCurve", curve},   {"members", r.members},     {"exact", r.exact},
            {"withinBound", r.withinBound}};
}

// ---- subcommands --------------------------------------------------------------------------

namespace {

struct Common {
    std::string config, out, logLevel = "info";
    std::uint64_t seed = 1;
};

void add_common(CLI::App *sc, Common &c, bool seed = true) {
    sc->add_option("--config", c.config, "JSON file mirroring the flags; flags win");
    sc->add_option("--out", c.out, "output file (default stdout)");
    sc->add_option("--log-level", c.logLevel, "info or debug")->check(CLI::IsMember({"info", "debug"}));
    if (seed) sc->add_option("--seed", c.seed, "64-bit seed");
}

// Fill options not given on the command line from the JSON document.
void apply_config(CLI::App *sc, const std::string &path) {
    if (path.empty()) return;
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error &e) {
        throw UsageError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw UsageError("config must be a JSON object");
    for (const auto &[key, val] : doc.items()) {
        CLI::Option *opt = key == "config" ? nullptr : sc->get_option_no_throw("--" + key);
        if (!opt) throw UsageError("unknown config key '" + key + "'");
        if (opt->count() > 0) continue;
        auto scalar = [&](const json &v) -> std::string {
            if (v.is_string()) return v.get<std::string>();
            if (v.is_number_integer()) return std::to_string(v.get<long long>());
            if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
            if (v.is_number()) return fmt("%.17g", v.get<double>());
            if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
            throw UsageError("config key '" + key + "' has an unsupported type");
        };
        std::vector<std::string> vals;
        if (val.is_array()) {
            std::string joined;
            for (const auto &v : val) joined += (joined.empty() ? "" : ",") + scalar(v);
            // list options take one comma-separated string; vector options take each element
            if (opt->get_items_expected_max() > 1)
                for (const auto &v : val) vals.push_back(scalar(v));
            else
                vals.push_back(joined);
        } else {
            vals.push_back(scalar(val));
        }
        try {
            for (const auto &v : vals) opt->add_result(v);
            opt->run_callback();
        } catch (const CLI::Error &e) {
            throw UsageError("config key '" + key + "': " + e.what());
        }
    }
}

void write_output(const std::string &path, const std::string &text, std::ostream &out) {
    if (path.empty() || path == "-") {
        out << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw UsageError("cannot write " + path);
    f << text;
}

struct CompressArgs {
    Common c;
    int n = 2, alphabet = 2, d = 2, trials = 0;
    double binsLog = 1;
    std::string decoder = "partial", family = "exact";
};

int cmd_compress(const CompressArgs &a, std::ostream &out) {
    if (a.n < 1 || a.alphabet < 2 || a.d < 1 || a.trials < 0) throw UsageError("n >= 1, alphabet >= 2, d >= 1 required");
    std::mt19937_64 rng(a.c.seed);
    CompressionExperiment e{random_source(a.alphabet, a.d, rng),
                            a.n,
                            a.binsLog,
                            a.decoder == "full" ? DecoderKind::FullyUniversal : DecoderKind::PartiallyUniversal,
                            a.family == "toeplitz" ? HashFamilySpec::Kind::Toeplitz : HashFamilySpec::Kind::AllSurjective,
                            a.family == "toeplitz" ? std::max(a.trials, 1) : a.trials,
                            a.c.seed};
    ErrorReport r = run_experiment(e);
    json rep = error_report_json(r);
    rep["config"] = {{"n", a.n},           {"alphabet", a.alphabet}, {"d", a.d},          {"bins-log", a.binsLog},
                     {"decoder", a.decoder}, {"family", a.family},     {"trials", a.trials}};
    rep["seed"] = a.c.seed;
    rep["source"] = {{"probs", e.source.probs}};
    write_output(a.c.out, rep.dump(2) + "\n", out);
    return r.withinBound ? kOk : kInvariant;
}

struct KeyrateArgs {
    Common c;
    std::string analysis = "both", depol = "0.045", ntot = "1e8,1e10,1e12", epsSec = "2^-50", epsCor = "2^-50";
    std::string alpha, stats = "expected", svg;
    double amp = 0.38;
    bool halfRange = false;
    int gammaEvals = 8, threads = 0;
};

B92Config b92_config(double amp, const std::string &epsSec, const std::string &epsCor) {
    B92Config cfg;
    cfg.amp = amp;
    cfg.negLog2EpsSec = parse_neg_log2_eps(epsSec);
    cfg.negLog2EpsCor = parse_neg_log2_eps(epsCor);
    return cfg;
}

int cmd_keyrate(const KeyrateArgs &a, std::ostream &out, std::ostream &err) {
    B92Config cfg = b92_config(a.amp, a.epsSec, a.epsCor);
    if (!a.alpha.empty()) cfg.alphaRenyi = parse_number(a.alpha);
    cfg.alphaHalfRange = a.halfRange;
    cfg.gammaEvals = a.gammaEvals;
    cfg.validate();
    std::vector<Analysis> kinds;
    if (a.analysis != "universal") kinds.push_back(Analysis::Conventional);
    if (a.analysis != "conventional") kinds.push_back(Analysis::Universal);
    std::vector<KeyrateRow> rows;
    for (double p : parse_list(a.depol)) {
        if (!(p >= 0 && p <= 1)) throw UsageError("depolarizing probability outside [0,1]");
        for (double n : parse_list(a.ntot)) {
            if (!(n >= 3)) throw UsageError("n_tot must be at least 3");
            for (Analysis k : kinds) {
                KeyrateRow r;
                r.point = {n, p, k};
                r.seed = a.stats == "sampled" ? a.c.seed + rows.size() * 0x9E3779B97F4A7C15ULL : a.c.seed;
                rows.push_back(r);
            }
        }
    }
    bool debug = a.c.logLevel == "debug";
    std::mutex logMu;
    parallel_for(static_cast<int>(rows.size()), a.threads, [&](int i) {
        auto &r = rows[i];
        auto t0 = std::chrono::steady_clock::now();
        std::optional<std::uint64_t> s;
        if (a.stats == "sampled") s = r.seed;
        try {
            r.result = finite_key(cfg, r.point.analysis, r.point.p, r.point.nTot, s);
        } catch (const InfeasibleError &e) {
            r.error = std::string("infeasible: ") + e.what();
        } catch (const DomainError &e) {
            r.error = std::string("failed: ") + e.what();
        }
        if (debug) {
            std::lock_guard<std::mutex> g(logMu);
            err << "[debug] " << to_string(r.point.analysis) << " p=" << r.point.p << " n_tot=" << r.point.nTot << " "
                << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() << " s\n";
        }
    });
    write_output(a.c.out, keyrate_csv(rows), out);
    if (!a.svg.empty()) write_output(a.svg, keyrate_svg(rows), out);
    return kOk;
}

struct AsymptoticArgs {
    Common c;
    std::string grid, depol;
    double amp = 0.38;
    int threads = 0;
};

int cmd_asymptotic(const AsymptoticArgs &a, std::ostream &out, std::ostream &err) {
    std::vector<double> ps;
    if (!a.grid.empty()) ps = parse_grid(a.grid);
    if (!a.depol.empty())
        for (double p : parse_list(a.depol)) ps.push_back(p);
    if (ps.empty()) ps = parse_grid("0:0.06:0.005");
    for (double p : ps)
        if (!(p >= 0 && p <= 1)) throw UsageError("depolarizing probability outside [0,1]");
    B92Config cfg;
    cfg.amp = a.amp;
    cfg.validate();
    std::vector<AsymptoticRates> res(ps.size());
    bool debug = a.c.logLevel == "debug";
    std::mutex logMu;
    parallel_for(static_cast<int>(ps.size()), a.threads, [&](int i) {
        res[i] = asymptotic_rates(cfg, ps[i]);
        if (debug) {
            std::lock_guard<std::mutex> g(logMu);
            err << "[debug] p=" << ps[i] << " done\n";
        }
    });
    std::string csv = std::string(kAsymptoticHeader) + "\n";
    bool ordered = true;
    for (size_t i = 0; i < ps.size(); ++i) {
        const auto &r = res[i];
        ordered = ordered && r.conventional <= r.universal + 1e-9;
        csv += fmt("%.10g", ps[i]) + ',' + fmt("%.15g", r.conventional) + ',' + fmt("%.15g", r.universal) + ',' +
               fmt("%.15g", r.devetakWinter) + ',' + fmt("%.15g", r.maxHphBit - r.maxHxab) + '\n';
    }
    write_output(a.c.out, csv, out);
    if (!ordered) err << "conventional rate exceeds universal rate\n";
    return ordered ? kOk : kInvariant;
}

struct SelftestArgs {
    Common c;
    std::vector<std::string> only;
    bool quick = false;
};

int cmd_selftest(const SelftestArgs &a, std::ostream &out) {
    std::vector<selftest::Suite> suites = selftest::builtin_suites();
    suites.push_back(cli_suite());
    auto results = selftest::run(suites, {a.only, a.quick});
    std::ostringstream o;
    long total = 0, failed = 0;
    double secs = 0;
    for (const auto &r : results) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%-22s %s %6ld assertions %4ld failed %8.2f s\n", r.name.c_str(),
                      r.failures ? "FAIL" : "PASS", r.assertions, r.failures, r.seconds);
        o << buf;
        for (const auto &m : r.messages) o << "    " << m << '\n';
        total += r.assertions;
        failed += r.failures;
        secs += r.seconds;
    }
    o << "total " << total << " assertions, " << failed << " failed, " << fmt("%.2f", secs) << " s\n";
    write_output(a.c.out, o.str(), out);
    return failed ? kInvariant : kOk;
}

} // namespace

int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Finite-size key rates, universal source compression and their self checks", "pec"};
    app.require_subcommand(1);

    CompressArgs ca;
    auto *cs = app.add_subcommand("compress-sim", "exact error of hashing-based source compression");
    add_common(cs, ca.c);
    cs->add_option("--n", ca.n, "block length");
    cs->add_option("--alphabet", ca.alphabet, "source alphabet size");
    cs->add_option("--d", ca.d, "side-information dimension");
    cs->add_option("--bins-log", ca.binsLog, "log2 of the number of bins");
    cs->add_option("--decoder", ca.decoder, "full or partial")->check(CLI::IsMember({"full", "partial"}));
    cs->add_option("--family", ca.family, "exact or toeplitz")->check(CLI::IsMember({"exact", "toeplitz"}));
    cs->add_option("--trials", ca.trials, "sampled members (toeplitz)");

    KeyrateArgs ka;
    auto *ks = app.add_subcommand("keyrate", "finite-size key rates on an (n_tot, p) grid");
    add_common(ks, ka.c);
    ks->add_option("--analysis", ka.analysis, "conventional, universal or both")
        ->check(CLI::IsMember({"conventional", "universal", "both"}));
    ks->add_option("--depol", ka.depol, "comma-separated depolarizing probabilities");
    ks->add_option("--ntot", ka.ntot, "comma-separated total pulse counts");
    ks->add_option("--eps-sec", ka.epsSec, "secrecy target, e.g. 2^-50");
    ks->add_option("--eps-cor", ka.epsCor, "correctness target");
    ks->add_option("--amp", ka.amp, "signal amplitude alpha");
    ks->add_option("--alpha", ka.alpha, "fixed Renyi parameter (default: optimized)");
    ks->add_flag("--alpha-half-range", ka.halfRange, "search the Renyi parameter in [1/2, 1)");
    ks->add_option("--gamma-evals", ka.gammaEvals, "simplex budget for the conventional halfspace direction");
    ks->add_option("--stats", ka.stats, "expected or sampled")->check(CLI::IsMember({"expected", "sampled"}));
    ks->add_option("--threads", ka.threads, "worker threads (0 = logical cores)");
    ks->add_option("--svg", ka.svg, "also write a log-x chart");

    AsymptoticArgs aa;
    auto *as = app.add_subcommand("keyrate-asymptotic", "asymptotic rates on a p grid");
    add_common(as, aa.c);
    as->add_option("--depol-grid", aa.grid, "a:b:step");
    as->add_option("--depol", aa.depol, "comma-separated probabilities");
    as->add_option("--amp", aa.amp, "signal amplitude alpha");
    as->add_option("--threads", aa.threads, "worker threads (0 = logical cores)");

    SelftestArgs sa;
    auto *ss = app.add_subcommand("selftest", "run the invariant suites");
    add_common(ss, sa.c, false);
    ss->add_option("--only", sa.only, "suite names")->delimiter(',');
    ss->add_flag("--quick", sa.quick, "skip the largest symmetric-group cases");

    std::vector<std::string> argv_s{"pec"};
    argv_s.insert(argv_s.end(), args.begin(), args.end());
    std::vector<const char *> argv;
    for (const auto &s : argv_s) argv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e, out, err);
        if (code == 0) return kOk;
        auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return kUsage;
    }
    try {
        if (cs->parsed()) {
            apply_config(cs, ca.c.config);
            return cmd_compress(ca, out);
        }
        if (ks->parsed()) {
            apply_config(ks, ka.c.config);
            return cmd_keyrate(ka, out, err);
        }
        if (as->parsed()) {
            apply_config(as, aa.c.config);
            return cmd_asymptotic(aa, out, err);
        }
        apply_config(ss, sa.c.config);
        return cmd_selftest(sa, out);
    } catch (const UsageError &e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return kUsage;
    } catch (const CapacityError &e) {
        err << "capacity exceeded: " << e.what() << "\n";
        return kCapacity;
    } catch (const DomainError &e) {
        err << "invalid argument: " << e.what() << "\n";
        return kUsage;
    }
}

// ---- runner self checks -------------------------------------------------------------------

selftest::Suite cli_suite() {
    return {"cli-runner", [](selftest::Checker &c) {
                c.check(parse_neg_log2_eps("2^-50") == 50.0, "2^-k literal is exact");
                c.check(parse_neg_log2_eps("2^-400") == 400.0, "2^-k literal far below double range of eps^2");
                c.near(parse_neg_log2_eps("0.125"), 3.0, 1e-15, "decimal epsilon");
                bool threw = false;
                try {
                    parse_neg_log2_eps("2^3");
                } catch (const UsageError &) {
                    threw = true;
                }
                c.check(threw, "epsilon >= 1 rejected");
                c.check(parse_list("1e8, 1e10,1e12") == std::vector<double>{1e8, 1e10, 1e12}, "list parsing");
                auto g = parse_grid("0:0.06:0.005");
                c.check(g.size() == 13 && g.front() == 0 && g.back() == 0.06 && g[7] == 0.035, "grid parsing");

                KeyrateRow r;
                r.point = {1e10, 0.045, Analysis::Universal};
                r.result.alpha = 0.25;
                r.result.nFin = 123.5;
                r.result.keyRate = 0.01;
                r.result.log2EpsSec = -50;
                r.result.log2EpsCor = -50;
                r.seed = 7;
                std::string csv = keyrate_csv({r});
                c.check(csv.substr(0, csv.find('\n')) == kKeyrateHeader, "CSV header");
                c.check(csv == keyrate_csv({r}), "CSV formatting is deterministic");
                KeyrateRow bad = r;
                bad.error = "infeasible: x";
                std::string csv2 = keyrate_csv({r, bad});
                c.check(csv2.substr(0, csv2.find('\n')) == std::string(kKeyrateHeader) + ",flag", "flag column");

                ErrorReport er;
                er.exactPerr = 0.125;
                er.boundPerr = 0.75;
                er.exponentCurve = {{0.1, 0.01}, {0.2, 0.03}};
                json j = json::parse(error_report_json(er).dump());
                c.check(j == error_report_json(er), "report JSON round trip");
                c.check(j["exponentCurve"][1][1].get<double>() == 0.03, "exponent curve survives");

                std::vector<int> hits(100, 0);
                parallel_for(100, 3, [&](int i) { hits[i] += 1; });
                c.check(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }), "worker pool visits each point once");

                std::ostringstream o, e;
                c.check(run({"compress-sim", "--bogus"}, o, e) == kUsage, "malformed flag exits 64");
                c.check(run({"compress-sim", "--n", "1", "--bins-log", "1", "--seed", "3"}, o, e) == kOk, "compress-sim runs");
            }};
}

} // namespace pec::cli
