#pragma once

#include <json.hpp>
#include <string>
#include <string_view>

#include "spectral_causal/bench.hpp"
#include "spectral_causal/bounds.hpp"
#include "spectral_causal/discovery.hpp"
#include "spectral_causal/effects.hpp"
#include "spectral_causal/graph.hpp"
#include "spectral_causal/model.hpp"
#include "spectral_causal/simulate.hpp"
#include "spectral_causal/wiener.hpp"

namespace spectral_causal {

using Json = nlohmann::json;

// 64-bit FNV-1a as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);
Json read_json_file(const std::string& path);
// `source` names the input in the error message.
Json parse_json_text(const std::string& text, const std::string& source);
void write_json_file(const std::string& path, const Json& j);

// %.17g
std::string format_double(double v);

// {"n", "self_lags", "cross_gains", "noise_std"}
Json to_json(const ArSpec& spec);
ArSpec ar_spec_from_json(const Json& j);
// {"n", "num_bins", "h": [bin][row][col] = {"re", "im"}, "noise": [node][bin] or a scalar}
Json to_json(const LdimSpec& spec);
LdimSpec ldim_from_json(const Json& j);
bool is_ldim_json(const Json& j);

Json to_json(const CausalGraph& g);
CausalGraph graph_from_json(const Json& j);
Json to_json(const Cpdag& g);
Cpdag cpdag_from_json(const Json& j);
Json to_json(const PhaseResult& r);
Json to_json(const PcResult& r);

Json to_json(const WienerField& f);
Json to_json(const DirectEffectEstimate& e);
Json to_json(const AdjustedDensity& d);
Json to_json(const InterventionContrast& c);
Json to_json(const BoundParams& p);
Json to_json(const ScalingReport& r);

// Header segment,t,node_0..; streaming panels use segment 0. Layout and seed go to <path>.meta.json.
void write_panel_csv(const std::string& path, const TimeSeriesPanel& panel);
TimeSeriesPanel read_panel_csv(const std::string& path);

}  // namespace spectral_causal
