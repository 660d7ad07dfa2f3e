#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "ghostlab/frames.hpp"
#include "ghostlab/registration.hpp"
#include "ghostlab/specklesim.hpp"

namespace ghostlab {

/// Line-oriented "key = value" pipeline configuration with '#' comments.
/// Every key is checked against a fixed schema when parsed; relative paths
/// resolve against the directory of the config file.
class PipelineConfig {
public:
  static PipelineConfig parse(std::string_view text, const std::filesystem::path& base_dir = ".");
  static PipelineConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  /// Sets or replaces a key (flag overrides). The key must be in the schema.
  void set(const std::string& key, const std::string& value);

  std::string get_string(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  Region get_region(const std::string& key) const;
  Displacement get_displacement(const std::string& key) const;
  std::filesystem::path get_path(const std::string& key) const;

  std::string get_string_or(const std::string& key, const std::string& fallback) const;
  std::uint64_t get_u64_or(const std::string& key, std::uint64_t fallback) const;
  double get_double_or(const std::string& key, double fallback) const;

  const std::filesystem::path& base_dir() const { return base_dir_; }
  std::filesystem::path out_dir() const;

  /// Builds the simulation description; ConfigError names missing keys.
  SimConfig sim_config() const;
  SearchWindow search_window() const;

private:
  struct Entry {
    std::string value;
    std::size_t line = 0;
  };
  const Entry& require(const std::string& key) const;
  [[noreturn]] void fail(const std::string& key, const std::string& message) const;

  std::map<std::string, Entry> entries_;
  std::filesystem::path base_dir_;
};

Region parse_region(std::string_view text);
Displacement parse_displacement(std::string_view text);

} // namespace ghostlab
