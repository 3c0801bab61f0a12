#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace trusthmd {

/// Entry point of the `trusthmd` command line tool. `args` excludes the
/// program name. Returns 0 on success, 2 on bad usage (usage text on `err`)
/// and 1 on any other failure (diagnostic on `err`).
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int cli_main(int argc, const char* const* argv);

}  // namespace trusthmd
