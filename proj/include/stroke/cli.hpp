#pragma once

#include <string>
#include <vector>

namespace stroke {

// Entry point behind the strokebench binary; also called directly by tests.
// argv[0] is the program name. Returns 0 on success, 1 on a domain error,
// 2 on a usage error.
int run_command(const std::vector<std::string>& argv);

} // namespace stroke
