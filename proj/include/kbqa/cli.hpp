#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace kbqa::cli {

/// Bad invocation: unknown verb or flag, missing flag, bad config value.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// `--help`; the message is the help text.
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ValueType { UINT, DOUBLE, BOOL, SIZES, DOUBLES, OPTIMIZER };

struct ConfigKey {
  std::string name;
  ValueType type;
  std::string default_value;
  std::string help;
};

/// Flat key=value settings checked against a fixed schema.
class RunConfig {
 public:
  static const std::vector<ConfigKey>& schema();

  /// Throws UsageError naming the key on unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  /// `key=value` lines; `#` starts a comment.
  void merge_file(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::string get(const std::string& key) const;
  std::uint64_t get_uint(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::vector<std::size_t> get_sizes(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key) const;

  /// Every key with its effective value, one `key=value` line each.
  std::string dump() const;

 private:
  std::map<std::string, std::string> values_;
};

struct Command {
  std::string verb;
  std::map<std::string, std::string> options;  // verb flags without leading dashes
  RunConfig config;
};

inline const std::vector<std::string> kVerbs = {"build-index", "train",    "eval",     "ask",
                                                "gradcheck",   "tune",     "benchmark"};

/// Throws UsageError on any invocation problem, HelpRequested for `--help`.
Command parse_args(int argc, const char* const* argv);

/// 0 success, 1 domain failure, 2 usage failure. Never throws.
int run(const Command& command, std::ostream& out, std::ostream& err);

/// parse_args + run with the exit-code mapping applied to parse failures too.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kbqa::cli
