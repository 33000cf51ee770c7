#pragma once

#include "pec/b92.hpp"
#include "pec/compression.hpp"
#include "pec/selftest.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace pec::cli {

enum ExitCode { kOk = 0, kInvariant = 2, kCapacity = 3, kUsage = 64 };

// Whole command line without the program name. Returns the process exit code.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

// "2^-50" (exact) or a plain decimal in (0,1); returns -log2(eps).
double parse_neg_log2_eps(const std::string &s);
// "1e8,1e10" -> {1e8, 1e10}
std::vector<double> parse_list(const std::string &s);
// "a:b:step", inclusive of b up to rounding
std::vector<double> parse_grid(const std::string &s);

inline constexpr const char *kKeyrateHeader =
    "n_tot,p,analysis,alpha_renyi,n_fin,ec_cost,net_key,key_rate,eps_sec,eps_cor,seed";
inline constexpr const char *kAsymptoticHeader = "p,conventional,universal,devetak_winter,discord_gap";

struct KeyratePoint {
    double nTot = 0, p = 0;
    Analysis analysis = Analysis::Universal;
};

struct KeyrateRow {
    KeyratePoint point;
    KeyLengthResult result;
    std::uint64_t seed = 0;
    std::string error; // infeasible or failed point: key_rate reported as 0
};

std::string keyrate_csv(const std::vector<KeyrateRow> &rows);
std::string keyrate_svg(const std::vector<KeyrateRow> &rows);

// Runs f(i) for i in [0, n) on at most `threads` workers.
void parallel_for(int n, int threads, const std::function<void(int)> &f);

// Suites that exercise the runner itself.
selftest::Suite cli_suite();

nlohmann::json error_report_json(const ErrorReport &r);

} // namespace pec::cli
