#include "tankseis/config.hpp"

#include <algorithm>
#include <charconv>
#include <sstream>

#include "tankseis/model.hpp"

namespace tankseis {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& line) {
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_quotes = !in_quotes;
    if (line[i] == '#' && !in_quotes) return line.substr(0, i);
  }
  return line;
}

}  // namespace

std::string format_double(double v) {
  if (v == 0.0) v = 0.0;  // drop the sign of negative zero
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  std::string s(buf, res.ptr);
  // keep a decimal marker so the value reads back as a float in TOML tools
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

double parse_double(const std::string& text) {
  const std::string s = trim(text);
  double v = 0.0;
  const char* first = s.data();
  if (!s.empty() && s[0] == '+') ++first;
  auto res = std::from_chars(first, s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw ConfigError("not a number: '" + s + "'");
  return v;
}

KeyValueDoc KeyValueDoc::parse(const std::string& text) {
  KeyValueDoc doc;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("line " + std::to_string(lineno) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (std::find(doc.order_.begin(), doc.order_.end(), section) == doc.order_.end())
        doc.order_.push_back(section);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    Entry e;
    if (!value.empty() && value.front() == '"') {
      if (value.size() < 2 || value.back() != '"')
        throw ConfigError("line " + std::to_string(lineno) + ": unterminated string");
      e.raw = value.substr(1, value.size() - 2);
      e.quoted = true;
    } else {
      e.raw = value;
    }
    if (section.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": key outside any section");
    doc.slot(section, key) = e;
  }
  return doc;
}

const KeyValueDoc::Entry* KeyValueDoc::find(const std::string& section,
                                            const std::string& key) const {
  auto it = data_.find(section);
  if (it == data_.end()) return nullptr;
  for (const auto& [k, e] : it->second)
    if (k == key) return &e;
  return nullptr;
}

KeyValueDoc::Entry& KeyValueDoc::slot(const std::string& section, const std::string& key) {
  if (std::find(order_.begin(), order_.end(), section) == order_.end()) order_.push_back(section);
  auto& entries = data_[section];
  for (auto& [k, e] : entries)
    if (k == key) return e;
  entries.emplace_back(key, Entry{});
  return entries.back().second;
}

bool KeyValueDoc::has(const std::string& section, const std::string& key) const {
  return find(section, key) != nullptr;
}

std::optional<std::string> KeyValueDoc::get_string(const std::string& section,
                                                   const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e) return std::nullopt;
  return e->raw;
}

std::optional<double> KeyValueDoc::get_number(const std::string& section,
                                              const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e) return std::nullopt;
  if (e->quoted) throw ConfigError("[" + section + "] " + key + ": expected a number");
  try {
    return parse_double(e->raw);
  } catch (const ConfigError&) {
    throw ConfigError("[" + section + "] " + key + ": not a number: '" + e->raw + "'");
  }
}

double KeyValueDoc::number_or(const std::string& section, const std::string& key,
                              double fallback) const {
  return get_number(section, key).value_or(fallback);
}

void KeyValueDoc::set_string(const std::string& section, const std::string& key,
                             const std::string& value) {
  slot(section, key) = Entry{value, true};
}

void KeyValueDoc::set_number(const std::string& section, const std::string& key, double value) {
  slot(section, key) = Entry{format_double(value), false};
}

std::vector<std::string> KeyValueDoc::sections() const { return order_; }

std::string KeyValueDoc::format() const {
  std::ostringstream out;
  bool first = true;
  for (const auto& section : order_) {
    if (!first) out << '\n';
    first = false;
    out << '[' << section << "]\n";
    auto it = data_.find(section);
    if (it == data_.end()) continue;
    for (const auto& [k, e] : it->second) {
      out << k << " = ";
      if (e.quoted)
        out << '"' << e.raw << '"';
      else
        out << e.raw;
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace tankseis
