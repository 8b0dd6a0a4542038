#pragma once

#include "tbsim/sim.hpp"

#include <string>

namespace tbsim {

/// CSV writer: one `# key: value` metadata block, one header line of
/// name[unit] columns, values at 17 significant digits (exact double
/// round-trip).
void write_log(const std::string& path, const TrajectoryLog& log);

/// Reads a trajectory CSV. Columns are matched by name, so reordered columns
/// from foreign tools are accepted; a missing schema column raises
/// SchemaError naming it. Unsupported schema versions raise SchemaError.
TrajectoryLog read_log(const std::string& path);

}  // namespace tbsim
