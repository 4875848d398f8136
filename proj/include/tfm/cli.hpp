#pragma once

#include <iosfwd>

namespace tfm {

/// Entry point of the `tfmlab` tool. Returns 0 on success, 1 on a usage
/// error and 2 when the requested work fails.
int cli_main(int argc, char const *const *argv, std::ostream &out, std::ostream &err);

}  // namespace tfm
