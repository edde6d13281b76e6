#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace quadmesh {

// Exit codes of run_cli.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitNumeric = 2;

// `args` excludes the program name. Errors are reported on `err` as a single
// line "quadmesh: error[<category>]: <message>" with category one of usage,
// input, io, numeric.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args);

}  // namespace quadmesh
