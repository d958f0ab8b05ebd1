#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace faillite {

// Entry point of the faillite command; returns the process exit status.
// 0 on success, 1 for invalid input or failed validation, 2 for internal faults.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace faillite
