#pragma once

// Command-line front end. run() never calls exit(); it returns the process
// exit code so tests can drive it in-process.

#include <iosfwd>
#include <string>
#include <vector>

namespace qcbound::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitViolation = 3;

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string sha256_hex_file(const std::string& path);

} // namespace qcbound::cli
