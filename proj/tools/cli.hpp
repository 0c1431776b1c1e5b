#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace spectral_causal {

inline constexpr const char* kToolVersion = "0.1.0";

// Exit codes: 0 ok, 1 unexpected, 2 input, 3 I/O, 4 numerical, 5 inadmissible.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace spectral_causal
