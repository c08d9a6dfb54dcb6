#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "mmlimit/approx.hpp"
#include "mmlimit/category.hpp"
#include "mmlimit/family.hpp"
#include "mmlimit/space.hpp"

namespace mmlimit {

// Space documents:
//   { "n": int, "labels": [str]?, "dist": [[float]] | {"generator": name, "params": {...}},
//     "weight": [float], "base": int }
// Generators: "linf_scaled_basis" {group, radial, scale?} and "line_grid" {coords, scale?};
// symbolic backends round-trip exactly, dense output materializes the scale.
nlohmann::json space_to_json(const PointedSpace& s);
PointedSpace space_from_json(const nlohmann::json& j);

nlohmann::json measure_to_json(const Measure& m);
Measure measure_from_json(const nlohmann::json& j);

nlohmann::json weak_approx_to_json(const WeakApprox& w);
WeakApprox weak_approx_from_json(const nlohmann::json& j);

nlohmann::json family_to_json(const TestFamily& fam, std::uint64_t host_hash);
TestFamily family_from_json(const nlohmann::json& j);

PointedSpace read_space_file(const std::string& path);
void write_json_file(const nlohmann::json& j, const std::string& path);
nlohmann::json read_json_file(const std::string& path);

/// System manifest: {"kind": "direct"|"inverse", "spaces": [file...],
/// "bonds": [{"img": [...]}, ...]}; space paths resolve relative to the
/// manifest location.
SystemOfSpaces read_system_manifest(const std::string& path);

/// Sequence manifest: {"spaces": [file...]}.
std::vector<PointedSpace> read_sequence_manifest(const std::string& path);

std::uint64_t file_hash(const std::string& path);

}  // namespace mmlimit
