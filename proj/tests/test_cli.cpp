#include <doctest.h>

#include "pec/errors.hpp"
#include "runner.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

using namespace pec;
using namespace pec::cli;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run call(const std::vector<std::string> &args) {
    std::ostringstream o, e;
    int c = run(args, o, e);
    return {c, o.str(), e.str()};
}

std::string temp_file(const std::string &name, const std::string &content) {
    std::string path = "/tmp/pec_test_" + name;
    std::ofstream(path) << content;
    return path;
}

int count_lines(const std::string &s) {
    int n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

} // namespace

TEST_CASE("epsilon literals") {
    CHECK(parse_neg_log2_eps("2^-50") == 50.0);
    CHECK(parse_neg_log2_eps(" 2^-0.5 ") == 0.5);
    CHECK(parse_neg_log2_eps("1e-3") == doctest::Approx(9.965784284662087));
    CHECK_THROWS_AS(parse_neg_log2_eps("2^0"), UsageError);
    CHECK_THROWS_AS(parse_neg_log2_eps("1.5"), UsageError);
    CHECK_THROWS_AS(parse_neg_log2_eps("2^-x"), UsageError);
    CHECK(parse_grid("0:0.06:0.005").size() == 13);
    CHECK(parse_grid("0.01:0.01:1") == std::vector<double>{0.01});
    CHECK_THROWS_AS(parse_grid("0:1"), UsageError);
    CHECK_THROWS_AS(parse_list("1e8,,x"), UsageError);
}

TEST_CASE("compress-sim report and exit codes") {
    auto r = call({"compress-sim", "--n", "2", "--alphabet", "2", "--d", "2", "--bins-log", "1", "--decoder", "partial",
                   "--seed", "1"});
    REQUIRE(r.code == kOk);
    auto j = nlohmann::json::parse(r.out);
    CHECK(j["exactPerr"].get<double>() <= j["boundPerr"].get<double>());
    CHECK(j["seed"] == 1);
    CHECK(j["config"]["decoder"] == "partial");

    auto inj = call({"compress-sim", "--n", "1", "--bins-log", "1"});
    CHECK(std::abs(nlohmann::json::parse(inj.out)["exactPerr"].get<double>()) < 1e-12);

    auto bad = call({"compress-sim", "--n"});
    CHECK(bad.code == kUsage);
    CHECK(bad.err.find("Usage") != std::string::npos);
    CHECK(call({"compress-sim", "--decoder", "maybe"}).code == kUsage);
    CHECK(call({"nonsense"}).code == kUsage);
    CHECK(call({}).code == kUsage);
    CHECK(call({"compress-sim", "--n", "9"}).code == kCapacity);
    CHECK(call({"--help"}).code == kOk);
}

TEST_CASE("config file: flags win, unknown keys rejected") {
    auto cfg = temp_file("cfg1.json", R"({"n": 1, "bins-log": 1, "seed": 5, "decoder": "full"})");
    auto a = call({"compress-sim", "--config", cfg});
    REQUIRE(a.code == kOk);
    auto ja = nlohmann::json::parse(a.out);
    CHECK(ja["config"]["n"] == 1);
    CHECK(ja["seed"] == 5);
    CHECK(ja["config"]["decoder"] == "full");
    auto b = call({"compress-sim", "--config", cfg, "--n", "2"});
    REQUIRE(b.code == kOk);
    CHECK(nlohmann::json::parse(b.out)["config"]["n"] == 2);

    CHECK(call({"compress-sim", "--config", temp_file("cfg2.json", R"({"nn": 1})")}).code == kUsage);
    CHECK(call({"compress-sim", "--config", temp_file("cfg3.json", R"({"n": "two"})")}).code == kUsage);
    CHECK(call({"compress-sim", "--config", temp_file("cfg4.json", R"({"decoder": "maybe"})")}).code == kUsage);
    CHECK(call({"compress-sim", "--config", temp_file("cfg5.json", "{not json")}).code == kUsage);
    CHECK(call({"compress-sim", "--config", "/nonexistent/x.json"}).code == kUsage);
    auto lst = temp_file("cfg6.json", R"({"only": ["cli-runner"], "quick": true})");
    auto st = call({"selftest", "--config", lst});
    CHECK(st.code == kOk);
    CHECK(st.out.find("cli-runner") != std::string::npos);
    CHECK(st.out.find("field-weyl") == std::string::npos);
}

TEST_CASE("keyrate grid, schema and determinism") {
    std::vector<std::string> args{"keyrate", "--analysis", "both", "--depol", "0.045", "--ntot", "1e8,1e10,1e12",
                                  "--eps-sec", "2^-50", "--eps-cor", "2^-50", "--alpha", "0.05", "--gamma-evals", "1",
                                  "--threads", "2"};
    auto a = call(args);
    REQUIRE(a.code == kOk);
    CHECK(a.out.substr(0, a.out.find('\n')) == kKeyrateHeader);
    CHECK(count_lines(a.out) == 7);
    auto b = call(args);
    CHECK(a.out == b.out);

    auto path = std::string("/tmp/pec_test_rates.csv"), svg = std::string("/tmp/pec_test_rates.svg");
    auto args2 = args;
    args2.insert(args2.end(), {"--out", path, "--svg", svg, "--stats", "sampled", "--seed", "9"});
    REQUIRE(call(args2).code == kOk);
    std::ifstream f(path), g(svg);
    std::stringstream fs, gs;
    fs << f.rdbuf();
    gs << g.rdbuf();
    CHECK(count_lines(fs.str()) == 7);
    CHECK(gs.str().rfind("<svg", 0) == 0);
    REQUIRE(call(args2).code == kOk);
    std::ifstream f2(path);
    std::stringstream fs2;
    fs2 << f2.rdbuf();
    CHECK(fs.str() == fs2.str());

    CHECK(call({"keyrate", "--eps-sec", "2^1"}).code == kUsage);
    CHECK(call({"keyrate", "--depol", "1.5"}).code == kUsage);
}

TEST_CASE("selftest options") {
    auto r = call({"selftest", "--only", "field-weyl"});
    CHECK(r.code == kOk);
    CHECK(count_lines(r.out) == 2);
    CHECK(call({"selftest", "--only", "no-such-suite"}).code == kUsage);

    auto full = selftest::run(selftest::builtin_suites(), {{"schur-weyl-types", "field-weyl", "linear-hashing"}, false});
    auto quick = selftest::run(selftest::builtin_suites(), {{"schur-weyl-types", "field-weyl", "linear-hashing"}, true});
    long nf = 0, nq = 0;
    for (auto &r : full) nf += r.assertions;
    for (auto &r : quick) nq += r.assertions;
    CHECK(nq < nf);
    CHECK(nq >= 0.9 * nf);
}
