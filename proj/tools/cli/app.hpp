#pragma once

#include <string>
#include <vector>

namespace rbising::cli {

inline constexpr const char* artifact_version = "1.0.0";
inline constexpr const char* output_root_env = "RBISING_OUTPUT_ROOT";

enum ExitCode { exit_ok = 0, exit_suite_failure = 1, exit_config_error = 2 };

int run_cli(int argc, char** argv);
int run_cli(const std::vector<std::string>& args);

// Named invariant suites run by `verify`.
std::vector<std::string> suite_names();

struct SuiteResult {
    std::string name;
    bool pass = false;
    std::vector<std::string> failures;
};

SuiteResult run_suite(const std::string& name, const std::string& inject_fault = {});

} // namespace rbising::cli
