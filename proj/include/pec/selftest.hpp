#pragma once

#include <functional>
#include <string>
#include <vector>

namespace pec::selftest {

// Counts assertions; keeps the first few failure messages.
class Checker {
  public:
    explicit Checker(bool quick = false) : quick_(quick) {}

    bool check(bool ok, const std::string &what);
    // |a - b| <= tol
    bool near(double a, double b, double tol, const std::string &what);
    bool quick() const { return quick_; }

    long assertions() const { return passed_ + failed_; }
    long failures() const { return failed_; }
    const std::vector<std::string> &messages() const { return messages_; }

  private:
    bool quick_;
    long passed_ = 0, failed_ = 0;
    std::vector<std::string> messages_;
};

struct Suite {
    std::string name;
    std::function<void(Checker &)> run;
};

// field-weyl, linear-hashing, schur-weyl-types, entropy-kernels, compression-simulator,
// convex-optimizer, b92-analysis
const std::vector<Suite> &builtin_suites();

struct SuiteResult {
    std::string name;
    long assertions = 0;
    long failures = 0;
    double seconds = 0;
    std::vector<std::string> messages; // failures, or the exception that aborted the suite
};

struct Options {
    std::vector<std::string> only; // empty: everything
    bool quick = false;
};

// UsageError when a name in `only` matches no suite.
std::vector<SuiteResult> run(const std::vector<Suite> &suites, const Options &opt);

} // namespace pec::selftest
