#pragma once

#include "droopstab/conditions.hpp"
#include "droopstab/spec_io.hpp"

#include <string>

namespace droopstab {

/// Structured report: conditions, constants, residuals, verdicts, seed.
/// Non-finite scalars serialize as null.
Json report_to_json(const StabilityReport& r);

/// Fixed-width human-readable summary of the same content.
std::string report_table(const StabilityReport& r);

}  // namespace droopstab
