#pragma once
// Property suites over the whole library. Each check records the measured
// worst case next to its tolerance.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

namespace torusma {

struct CheckResult {
    std::string suite;
    std::string name;
    std::string statement;
    double value = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

struct VerifyOptions {
    std::uint64_t seed = 1;
    int kmax = 64;  // largest k in the zero-temperature sequence
};

// ctransform, detperm, mgf, lipschitz, duality
const std::vector<std::string>& suite_names();

// "all" runs every suite in order. Unknown names throw InvalidInput.
std::vector<CheckResult> run_suite(const std::string& suite, const VerifyOptions& opts);

bool all_passed(const std::vector<CheckResult>& results);
nlohmann::json verify_report_json(const std::vector<CheckResult>& results, const std::string& suite,
                                  const VerifyOptions& opts);

}  // namespace torusma
