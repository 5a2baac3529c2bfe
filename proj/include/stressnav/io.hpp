#pragma once

// Line-oriented file formats. Every file starts with a record carrying
// "format_version"; readers reject other versions.

#include "stressnav/classifier.hpp"
#include "stressnav/path.hpp"
#include "stressnav/pattern.hpp"
#include "stressnav/vessel.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace stressnav::io {

constexpr int kFormatVersion = 1;

using nlohmann::json;

json to_json(const vessel::VesselSpec& v);
vessel::VesselSpec vessel_from_json(const json& j);

json to_json(const path::ScenarioSpec& s);
path::ScenarioSpec scenario_from_json(const json& j);

// Header object, then one numeric array per sample:
// t_ms, x_um, y_um, theta_rad, vx, vy, omega, 26 coefficients, contact.
void write_path(const std::filesystem::path& file, const path::PathRecord& rec);
path::PathRecord read_path(const std::filesystem::path& file);

struct ManifestEntry {
  std::string id;
  std::string file;  // relative to the corpus directory
  path::Label label = path::Label::Branch;
  std::string split;  // "train" or "test"
  std::uint64_t seed = 0;
  path::TerminalReason terminal_reason = path::TerminalReason::ReachedOutlet;
  double transit_ms = 0.0;
};

struct Manifest {
  json config;  // generation settings
  std::vector<ManifestEntry> entries;
};

void write_manifest(const std::filesystem::path& file, const Manifest& m);
Manifest read_manifest(const std::filesystem::path& file);

void write_pca(const std::filesystem::path& file, const features::PcaModel& m);
features::PcaModel read_pca(const std::filesystem::path& file);

void write_params(const std::filesystem::path& file, const classifier::RegressionParams& p, double dt_corr);
classifier::RegressionParams read_params(const std::filesystem::path& file, double* dt_corr = nullptr);

// Tab-separated table preceded by "# format_version N" and a header row.
void write_table(const std::filesystem::path& file, const std::vector<std::string>& columns,
                 const std::vector<std::vector<double>>& rows);
std::vector<std::vector<double>> read_table(const std::filesystem::path& file, std::vector<std::string>* columns = nullptr);

// Round-trip decimal text for a double.
std::string format_number(double v);

}  // namespace stressnav::io
