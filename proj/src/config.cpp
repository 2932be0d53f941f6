#include "wdrc/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "wdrc/error.hpp"

namespace wdrc {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigurationError("config key '" + key + "': expected a number, got '" + text + "'");
}

long long to_integer(const std::string& key, const std::string& text) {
  long long v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end)
    throw ConfigurationError("config key '" + key + "': expected an integer, got '" + text + "'");
  return v;
}

std::string format_double(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

template <class T, class F>
std::string join(const std::vector<T>& v, F fmt) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += fmt(v[i]);
  }
  return out;
}

}  // namespace

Config Config::parse(const std::string& text, const std::string& origin) {
  Config cfg;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto where = origin + ":" + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigurationError(where + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigurationError(where + ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigurationError(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigurationError(where + ": empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    if (cfg.raw_.count(full)) throw ConfigurationError(where + ": duplicate key '" + full + "'");
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    cfg.raw_[full] = value;
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigurationError("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

void Config::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigurationError("override '" + assignment + "' is not key=value");
  const std::string key = trim(assignment.substr(0, eq));
  if (key.empty()) throw ConfigurationError("override '" + assignment + "' has an empty key");
  raw_[key] = trim(assignment.substr(eq + 1));
}

void Config::set(const std::string& key, const std::string& value) { raw_[key] = value; }

const std::string* Config::lookup(const std::string& key) {
  used_.insert(key);
  const auto it = raw_.find(key);
  return it == raw_.end() ? nullptr : &it->second;
}

double Config::get_double(const std::string& key, double fallback) {
  const std::string* s = lookup(key);
  const double v = s ? to_double(key, *s) : fallback;
  effective_[key] = format_double(v);
  return v;
}

int Config::get_int(const std::string& key, int fallback) {
  const std::string* s = lookup(key);
  long long v = s ? to_integer(key, *s) : fallback;
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw ConfigurationError("config key '" + key + "': integer out of range");
  effective_[key] = std::to_string(v);
  return static_cast<int>(v);
}

std::uint64_t Config::get_uint(const std::string& key, std::uint64_t fallback) {
  const std::string* s = lookup(key);
  std::uint64_t v = fallback;
  if (s) {
    const auto* end = s->data() + s->size();
    const auto [ptr, ec] = std::from_chars(s->data(), end, v);
    if (ec != std::errc() || ptr != end)
      throw ConfigurationError("config key '" + key + "': expected a nonnegative integer, got '" + *s + "'");
  }
  effective_[key] = std::to_string(v);
  return v;
}

bool Config::get_bool(const std::string& key, bool fallback) {
  const std::string* s = lookup(key);
  bool v = fallback;
  if (s) {
    if (*s == "true" || *s == "1" || *s == "yes") v = true;
    else if (*s == "false" || *s == "0" || *s == "no") v = false;
    else throw ConfigurationError("config key '" + key + "': expected a boolean, got '" + *s + "'");
  }
  effective_[key] = v ? "true" : "false";
  return v;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) {
  const std::string* s = lookup(key);
  std::string v = s ? *s : fallback;
  effective_[key] = v;
  return v;
}

std::vector<double> Config::get_doubles(const std::string& key, const std::vector<double>& fallback) {
  const std::string* s = lookup(key);
  std::vector<double> v = fallback;
  if (s) {
    v.clear();
    for (const auto& item : split_list(*s)) v.push_back(to_double(key, item));
  }
  effective_[key] = join(v, format_double);
  return v;
}

std::vector<int> Config::get_ints(const std::string& key, const std::vector<int>& fallback) {
  const std::string* s = lookup(key);
  std::vector<int> v = fallback;
  if (s) {
    v.clear();
    for (const auto& item : split_list(*s)) v.push_back(static_cast<int>(to_integer(key, item)));
  }
  effective_[key] = join(v, [](int x) { return std::to_string(x); });
  return v;
}

void Config::reject_unknown() const {
  for (const auto& [key, value] : raw_)
    if (!used_.count(key)) throw ConfigurationError("unknown config key '" + key + "'");
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& [key, value] : effective_) out += key + " = " + value + "\n";
  return out;
}

std::uint64_t Config::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

}  // namespace wdrc
