#pragma once

#include "reslat/action.hpp"
#include "reslat/quantize.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace reslat {

using Json = nlohmann::ordered_json;

// Fixed float formatting used by the CSV emitters: 17 significant digits.
std::string fmt17(double x);

Json to_json(const HypothesisReport& rep);
Json to_json(const ActionModel& model);
Json to_json(const ResonanceLattice& lat);

// Round-trip for caching action models between runs.
ActionModel action_model_from_json(const Json& j);

// CSV with the documented column order: m, k1..kd, re_e, im_e, residual, iters.
std::string lattice_csv(const ResonanceLattice& lat);

// Scatter data per h: columns h, re_e, im_e.
std::string plotdata_csv(const std::vector<ResonanceLattice>& lattices);

// Deterministic file emission (text mode, fixed formatting).
void emit_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace reslat
