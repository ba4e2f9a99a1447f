#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tankseis {

/// Minimal TOML-subset document: `[section]` headers and `key = value` lines
/// where a value is a number, a quoted string or a bare word (true/false,
/// enum names). `#` starts a comment outside quotes.
class KeyValueDoc {
 public:
  static KeyValueDoc parse(const std::string& text);

  bool has(const std::string& section, const std::string& key) const;
  std::optional<std::string> get_string(const std::string& section, const std::string& key) const;
  std::optional<double> get_number(const std::string& section, const std::string& key) const;
  double number_or(const std::string& section, const std::string& key, double fallback) const;

  void set_string(const std::string& section, const std::string& key, const std::string& value);
  void set_number(const std::string& section, const std::string& key, double value);

  std::vector<std::string> sections() const;
  std::string format() const;

 private:
  struct Entry {
    std::string raw;
    bool quoted = false;
  };
  // section order preserved for stable output
  std::vector<std::string> order_;
  std::map<std::string, std::vector<std::pair<std::string, Entry>>> data_;

  const Entry* find(const std::string& section, const std::string& key) const;
  Entry& slot(const std::string& section, const std::string& key);
};

/// Shortest decimal string that parses back to the identical double.
std::string format_double(double v);
double parse_double(const std::string& s);

}  // namespace tankseis
