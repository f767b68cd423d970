#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace debater::cli {

// args[0] is the program name. Returns 0 on success, 1 on a runtime error
// (message on `err`), 2 on a usage error (message and usage on `err`).
// `in` backs "-" as an input path.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace debater::cli
