#pragma once

#include "droopstab/equilibrium.hpp"
#include "droopstab/grid_model.hpp"

#include "json.hpp"

#include <string>

namespace droopstab {

using Json = nlohmann::ordered_json;

/// Parses a grid spec document. Unknown keys, missing keys and wrong types
/// raise ParseError with the JSON path of the offending entry. The result
/// is validated.
GridSpec spec_from_json(const Json& j);
GridSpec parse_spec(const std::string& text);
GridSpec load_spec(const std::string& path);

Json spec_to_json(const GridSpec& spec);
void save_spec(const std::string& path, const GridSpec& spec);

/// Equilibrium documents hold the state blocks plus residual and spec hash.
Json equilibrium_to_json(const EquilibriumResult& eq, std::uint64_t spec_hash);
/// Reads the state; checks sizes against (n, m).
OperatingPoint equilibrium_from_json(const Json& j, int n, int m);
OperatingPoint load_equilibrium(const std::string& path, int n, int m);

}  // namespace droopstab
