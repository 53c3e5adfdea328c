#pragma once

#include <string>

namespace cohevo::cli {

/// Entry point behind the cohevo binary. Commands: run, verify, study.
/// Exit codes: 0 success, 1 configuration or artifact error, 2 non-converged
/// step in strict mode, 3 verification failure.
int main(int argc, const char* const* argv);

}  // namespace cohevo::cli
