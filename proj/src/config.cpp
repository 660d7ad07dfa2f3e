#include "ghostlab/config.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <set>
#include <sstream>
#include <vector>

#include "ghostlab/error.hpp"
#include "ghostlab/fileio.hpp"

namespace ghostlab {
namespace {

const std::set<std::string>& schema() {
  static const std::set<std::string> keys = [] {
    std::set<std::string> k{
        "grid_width", "grid_height", "n_frames", "seed", "coh_radius", "speckle_fwhm",
        "mean_intensity", "quantization_gain", "target_c2",
        "object_kind", "object_center_x", "object_center_y", "object_radius",
        "object_thickness", "object_slit_width", "object_slit_separation", "object_pgm",
        "bucket_region", "anchor_region", "search_radius", "search", "register_frames",
        "back_region", "obj_region", "out_dir"};
    for (const char* arm : {"arm1_", "arm2_", "arm3_"})
      for (const char* f : {"gain", "offset", "decorrelation", "read_noise", "shot_noise"})
        k.insert(std::string(arm) + f);
    return k;
  }();
  return keys;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<long> parse_ints(std::string_view text, std::size_t count, const char* what) {
  std::vector<long> out;
  std::string s(text);
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const std::string t = trim(part);
    long v = 0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || t.empty())
      throw ConfigError(std::string("invalid ") + what + " '" + s + "'");
    out.push_back(v);
  }
  if (out.size() != count)
    throw ConfigError(std::string(what) + " '" + s + "' needs " + std::to_string(count) +
                      " comma-separated integers");
  return out;
}

} // namespace

Region parse_region(std::string_view text) {
  const auto v = parse_ints(text, 4, "region");
  return Region(v[0], v[1], v[2], v[3]);
}

Displacement parse_displacement(std::string_view text) {
  const auto v = parse_ints(text, 2, "displacement");
  return {static_cast<int>(v[0]), static_cast<int>(v[1])};
}

PipelineConfig PipelineConfig::parse(std::string_view text, const std::filesystem::path& base_dir) {
  PipelineConfig cfg;
  cfg.base_dir_ = base_dir;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const std::string content = trim(raw);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line) + ": expected 'key = value'");
    const std::string key = trim(std::string_view(content).substr(0, eq));
    const std::string value = trim(std::string_view(content).substr(eq + 1));
    if (!schema().count(key))
      throw ConfigError("line " + std::to_string(line) + ": unknown key '" + key + "'");
    if (cfg.entries_.count(key))
      throw ConfigError("line " + std::to_string(line) + ": duplicate key '" + key + "'");
    if (value.empty())
      throw ConfigError("line " + std::to_string(line) + ": key '" + key + "' has no value");
    cfg.entries_[key] = Entry{value, line};
  }
  return cfg;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  auto dir = path.parent_path();
  if (dir.empty()) dir = ".";
  return parse(text, dir);
}

void PipelineConfig::set(const std::string& key, const std::string& value) {
  if (!schema().count(key)) throw ConfigError("unknown key '" + key + "'");
  entries_[key] = Entry{value, 0};
}

void PipelineConfig::fail(const std::string& key, const std::string& message) const {
  const auto it = entries_.find(key);
  const std::string where = it != entries_.end() && it->second.line > 0
                                ? "line " + std::to_string(it->second.line) + ": "
                                : "";
  throw ConfigError(where + "key '" + key + "': " + message);
}

const PipelineConfig::Entry& PipelineConfig::require(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError("missing required key '" + key + "'");
  return it->second;
}

std::string PipelineConfig::get_string(const std::string& key) const { return require(key).value; }

std::uint64_t PipelineConfig::get_u64(const std::string& key) const {
  const std::string& s = require(key).value;
  std::uint64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) fail(key, "'" + s + "' is not an unsigned integer");
  return v;
}

double PipelineConfig::get_double(const std::string& key) const {
  const std::string& s = require(key).value;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  fail(key, "'" + s + "' is not a number");
}

bool PipelineConfig::get_bool(const std::string& key) const {
  std::string s = require(key).value;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "1" || s == "true" || s == "yes" || s == "on") return true;
  if (s == "0" || s == "false" || s == "no" || s == "off") return false;
  fail(key, "'" + s + "' is not a boolean");
}

Region PipelineConfig::get_region(const std::string& key) const {
  try {
    return parse_region(require(key).value);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    fail(key, e.what());
  }
}

Displacement PipelineConfig::get_displacement(const std::string& key) const {
  try {
    return parse_displacement(require(key).value);
  } catch (const ConfigError& e) {
    fail(key, e.what());
  }
}

std::filesystem::path PipelineConfig::get_path(const std::string& key) const {
  std::filesystem::path p = require(key).value;
  return p.is_absolute() ? p : base_dir_ / p;
}

std::string PipelineConfig::get_string_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

std::uint64_t PipelineConfig::get_u64_or(const std::string& key, std::uint64_t fallback) const {
  return has(key) ? get_u64(key) : fallback;
}

double PipelineConfig::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

std::filesystem::path PipelineConfig::out_dir() const {
  return has("out_dir") ? get_path("out_dir") : base_dir_;
}

SimConfig PipelineConfig::sim_config() const {
  SimConfig cfg;
  auto& sp = cfg.speckle;
  sp.grid_width = get_u64("grid_width");
  sp.grid_height = get_u64("grid_height");
  sp.n_frames = get_u64("n_frames");
  sp.seed = get_u64("seed");
  if (has("coh_radius") && has("speckle_fwhm"))
    fail("speckle_fwhm", "give either coh_radius or speckle_fwhm, not both");
  if (has("speckle_fwhm"))
    sp.coh_radius = coh_radius_for_intensity_fwhm(get_double("speckle_fwhm"));
  else
    sp.coh_radius = get_double("coh_radius");
  sp.mean_intensity = get_double_or("mean_intensity", 1000.0);
  cfg.quantization_gain = get_double_or("quantization_gain", 1.0);

  for (std::size_t i = 0; i < 3; ++i) {
    const std::string p = "arm" + std::to_string(i + 1) + "_";
    auto& arm = cfg.arms[i];
    arm.gain = get_double_or(p + "gain", 1.0);
    if (has(p + "offset")) arm.offset = get_displacement(p + "offset");
    arm.decorrelation = get_double_or(p + "decorrelation", 0.0);
    arm.read_noise_sigma = get_double_or(p + "read_noise", 0.0);
    arm.shot_noise = has(p + "shot_noise") && get_bool(p + "shot_noise");
  }
  if (has("target_c2")) {
    for (const char* k : {"arm1_decorrelation", "arm2_decorrelation", "arm3_decorrelation"})
      if (has(k)) fail(k, "conflicts with target_c2");
    const auto& ref = cfg.arms[1];
    try {
      const double d = decorrelation_for_pairwise_c2(get_double("target_c2"), sp.mean_intensity,
                                                     ref.gain, ref.read_noise_sigma, ref.shot_noise);
      for (auto& arm : cfg.arms) arm.decorrelation = d;
    } catch (const PreconditionError& e) {
      fail("target_c2", e.what());
    }
  }

  const Extent grid{sp.grid_width, sp.grid_height};
  const MaskKind kind = parse_mask_kind(get_string_or("object_kind", "transparent"));
  MaskGeometry geom;
  geom.center_x = get_double_or("object_center_x", static_cast<double>(sp.grid_width) / 2.0);
  geom.center_y = get_double_or("object_center_y", static_cast<double>(sp.grid_height) / 2.0);
  geom.radius = get_double_or("object_radius", 0.0);
  geom.thickness = get_double_or("object_thickness", 3.0);
  geom.slit_width = get_u64_or("object_slit_width", 0);
  geom.slit_separation = get_u64_or("object_slit_separation", 0);
  if (kind == MaskKind::custom_pgm) geom.pgm_path = get_path("object_pgm");
  try {
    cfg.object = builtin_mask(kind, grid, geom);
  } catch (const GeometryError& e) {
    fail("object_kind", e.what());
  }
  cfg.validate();
  return cfg;
}

SearchWindow PipelineConfig::search_window() const {
  if (has("search") && has("search_radius")) fail("search", "give either search or search_radius");
  if (has("search")) {
    const auto v = parse_ints(get_string("search"), 4, "search window");
    SearchWindow w{static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2]),
                   static_cast<int>(v[3])};
    try {
      w.validate();
    } catch (const UsageError& e) {
      fail("search", e.what());
    }
    return w;
  }
  return SearchWindow::symmetric(static_cast<int>(get_u64_or("search_radius", 10)));
}

} // namespace ghostlab
