#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "sokl/kinetic.hpp"

namespace sokl {

/// Shortest round-trippable decimal form (17 significant digits).
std::string format_g17(double v);

/// Writes a CSV file: optional '#' comment lines, one header line, then the
/// data rows with 17-significant-digit values. Content is fully determined by
/// the arguments (no timestamps), so identical calls produce identical bytes.
void write_csv(const std::string& path, const std::vector<std::string>& comments,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);

/// Kinetic snapshot: one '#' metadata line (time, shape, parameters, mode),
/// then one row of angle samples per spatial cell.
void write_snapshot_csv(const std::string& path, const KineticField& field, double t);

struct SnapshotData {
  KineticField field;
  double t = 0.0;
};

SnapshotData read_snapshot_csv(const std::string& path);

/// Output directory: the CLI flag wins, then the SOKL_OUTPUT_DIR environment
/// variable, then "./sokl_out". The directory is created if missing.
std::string resolve_output_dir(const std::string& cli_flag);

/// Toolchain and dependency version identifiers.
nlohmann::json version_info();

/// Run manifest: configuration echo, produced files, versions, wall time.
void write_manifest(const std::string& path, const nlohmann::json& config_echo,
                    const std::vector<std::string>& outputs, double wall_seconds);

}  // namespace sokl
