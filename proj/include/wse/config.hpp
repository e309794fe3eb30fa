#pragma once

// Flat key=value run configuration. Every key has a schema entry with a
// default; a file may override defaults and command-line pairs override
// the file.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace wse {

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string help;
};

const std::vector<ConfigKey>& config_schema();

class RunConfig {
 public:
  enum class Source { kDefault, kFile, kCli };

  RunConfig();

  // "key = value" lines; '#' starts a comment.
  void load_file(const std::filesystem::path& path);
  void set(const std::string& key, const std::string& value, Source source = Source::kCli);

  const std::string& get(const std::string& key) const;
  std::int64_t get_int(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;
  std::size_t get_size(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  bool has_value(const std::string& key) const { return !get(key).empty(); }

  Source source(const std::string& key) const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, Source> sources_;
};

std::string source_name(RunConfig::Source s);

// Defaults, then the file (if any), then the overrides in order.
RunConfig resolve_config(const std::filesystem::path* file,
                         const std::vector<std::pair<std::string, std::string>>& overrides);

}  // namespace wse
