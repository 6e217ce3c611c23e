#include "tfp/conventions.hpp"

#include <fstream>
#include <sstream>
#include <system_error>

#include "tfp/error.hpp"
#include "tfp/validator.hpp"

namespace tfp {

namespace fs = std::filesystem;

namespace {

/// Normalized relative form of `rel`, or E_ESCAPES_ROOT when it leaves root.
std::string contained(const std::string& key, const std::string& rel) {
  fs::path p(rel);
  if (p.is_absolute() || p.has_root_name() || p.has_root_directory())
    throw Error(ErrorCode::EscapesRoot, key + " '" + rel + "' is absolute");
  auto norm = p.lexically_normal();
  if (norm.empty() || norm == "." || *norm.begin() == "..")
    throw Error(ErrorCode::EscapesRoot, key + " '" + rel + "' resolves outside the project root");
  auto out = norm.generic_string();
  while (!out.empty() && out.back() == '/') out.pop_back();
  return out;
}

}  // namespace

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::Io, "cannot read " + path.string());
  return ss.str();
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out.flush()) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::Io, "cannot replace " + path.string());
  }
}

LoadedLayout load_layout(const fs::path& root) {
  LoadedLayout out;
  out.layout.root = root;
  auto conf = root / kConfigPath;
  std::error_code ec;
  if (!fs::exists(conf, ec)) return out;

  std::istringstream lines(read_file(conf));
  std::string line;
  int number = 0;
  while (std::getline(lines, line)) {
    ++number;
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorCode::BadConfig, "line " + std::to_string(number) + ": expected key=value");
    auto key = std::string(trim(t.substr(0, eq)));
    auto value = std::string(trim(t.substr(eq + 1)));
    if (key.empty() || value.empty())
      throw Error(ErrorCode::BadConfig, "line " + std::to_string(number) + ": empty key or value");
    if (key == "critical_dir") {
      out.layout.critical_dir = contained(key, value);
    } else if (key == "master_path") {
      out.layout.master_path = contained(key, value);
    } else if (key == "script_suffix") {
      if (value.find_first_of("/\\") != std::string::npos)
        throw Error(ErrorCode::BadConfig, "line " + std::to_string(number) + ": script_suffix must be a plain name");
      out.layout.script_suffix = value;
    } else if (key == "service_url") {
      out.service_url = value;
    } else {
      out.warnings.push_back("tfp.conf line " + std::to_string(number) + ": unknown key '" + key + "' ignored");
    }
  }
  return out;
}

std::string service_name_of(const std::string& service_file) {
  std::string generic = service_file;
  for (auto& c : generic) {
    if (c == '\\') c = '/';
  }
  auto slash = generic.rfind('/');
  auto name = slash == std::string::npos ? generic : generic.substr(slash + 1);
  auto dot = name.rfind('.');
  auto stem = dot == std::string::npos ? name : name.substr(0, dot);
  if (stem.empty()) throw Error(ErrorCode::EmptyStem, "'" + service_file + "' has no file stem");
  return stem;
}

fs::path resolve_critical(const std::string& service_file, const ProjectLayout& layout) {
  return layout.critical_path() / (service_name_of(service_file) + layout.script_suffix);
}

std::string format_app_id(const ApplicationIdentity& id) {
  return "app_id=" + id.app_id + "\nuser_name=" + id.user_name + "\n";
}

ApplicationIdentity parse_app_id(std::string_view text) {
  ApplicationIdentity id;
  bool have_id = false, have_name = false;
  std::istringstream lines{std::string(text)};
  std::string line;
  while (std::getline(lines, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::BadConfig, "app.id: expected key=value");
    auto key = trim(std::string_view(line).substr(0, eq));
    auto value = std::string(trim(std::string_view(line).substr(eq + 1)));
    if (key == "app_id") {
      id.app_id = value;
      have_id = true;
    } else if (key == "user_name") {
      id.user_name = value;
      have_name = true;
    }
  }
  if (!have_id || !have_name) throw Error(ErrorCode::BadConfig, "app.id must hold app_id and user_name");
  if (auto why = check_identity(id)) throw Error(ErrorCode::BadConfig, "app.id: " + *why);
  return id;
}

ApplicationIdentity read_app_id(const ProjectLayout& layout) { return parse_app_id(read_file(layout.app_id_file())); }

std::string master_script_template() {
  TestScript s;
  s.test_case = {"http://localhost:8080/", HttpMethod::Get, std::nullopt};
  s.criteria = {1000, 1, 8};
  s.adaptive = AdaptiveParams{};
  return render_script(s);
}

std::string critical_script_template(std::string_view service_name) {
  TestScript s;
  s.test_case = {"http://localhost:8080/" + std::string(service_name), HttpMethod::Get, std::nullopt};
  s.criteria = {1000, 1, 8};
  return render_script(s);
}

ProjectLayout scaffold_project(const fs::path& root, std::string_view user_name) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw Error(ErrorCode::Io, root.string() + " is not a directory");
  if (fs::exists(root / "TFP", ec)) throw Error(ErrorCode::AlreadyScaffolded, (root / "TFP").string() + " exists");
  auto identity = new_app_identity(user_name);

  ProjectLayout layout;
  layout.root = root;
  fs::create_directories(layout.critical_path(), ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + layout.critical_path().string() + ": " + ec.message());
  write_file_atomic(layout.master_file(), master_script_template());
  write_file_atomic(layout.app_id_file(), format_app_id(identity));
  return layout;
}

}  // namespace tfp
