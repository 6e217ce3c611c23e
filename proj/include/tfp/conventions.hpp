#pragma once

// Project template and the service-file -> test-script naming convention.
//
//   <root>/TFP/
//     Critical/<ServiceName>Performance.xml   one per service
//     MasterPerformance.xml                   the master suite
//     app.id                                  app_id=... / user_name=...
//     tfp.conf                                optional key=value overrides

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tfp/model.hpp"

namespace tfp {

struct ProjectLayout {
  std::filesystem::path root;
  std::string critical_dir = "TFP/Critical";
  std::string master_path = "TFP/MasterPerformance.xml";
  std::string script_suffix = "Performance.xml";
  std::string app_id_path = "TFP/app.id";

  std::filesystem::path critical_path() const { return root / critical_dir; }
  std::filesystem::path master_file() const { return root / master_path; }
  std::filesystem::path app_id_file() const { return root / app_id_path; }

  bool operator==(const ProjectLayout&) const = default;
};

inline constexpr const char* kConfigPath = "TFP/tfp.conf";

struct LoadedLayout {
  ProjectLayout layout;
  std::optional<std::string> service_url;  // the client's `service_url` key
  std::vector<std::string> warnings;       // unknown keys
};

/// Defaults merged with <root>/TFP/tfp.conf when present. Throws
/// E_BAD_CONFIG (names the line) and E_ESCAPES_ROOT.
LoadedLayout load_layout(const std::filesystem::path& root);

/// <root>/<critical_dir>/<stem><script_suffix>, where the stem is the file
/// name minus its last extension. Throws E_EMPTY_STEM.
std::filesystem::path resolve_critical(const std::string& service_file, const ProjectLayout& layout);

/// Creates the template tree with a fresh application identity. Throws
/// E_ALREADY_SCAFFOLDED, E_EMPTY_USERNAME and E_IO.
ProjectLayout scaffold_project(const std::filesystem::path& root, std::string_view user_name);

std::string format_app_id(const ApplicationIdentity& id);
/// Throws E_BAD_CONFIG for malformed contents.
ApplicationIdentity parse_app_id(std::string_view text);
/// Throws E_IO when the file cannot be read.
ApplicationIdentity read_app_id(const ProjectLayout& layout);

/// Master-suite script written at scaffold time.
std::string master_script_template();
/// Critical script written by create-test for a service.
std::string critical_script_template(std::string_view service_name);

/// Service name of a path, the stem rule above. Throws E_EMPTY_STEM.
std::string service_name_of(const std::string& service_file);

std::string read_file(const std::filesystem::path& path);
/// Writes through a temporary sibling and a rename. Throws E_IO.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

}  // namespace tfp
