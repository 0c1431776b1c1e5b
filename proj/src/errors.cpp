#include "spectral_causal/errors.hpp"

namespace spectral_causal {

std::string join_bins(const std::vector<std::size_t>& bins) {
  std::string out;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(bins[i]);
  }
  return out;
}

}  // namespace spectral_causal
