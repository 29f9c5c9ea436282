#include "graphflow/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace graphflow {

namespace {

struct Value {
  enum class Kind { String, Number, Bool, NumberList, StringList } kind;
  std::string s;
  double num = 0.0;
  bool b = false;
  std::vector<double> nums;
  std::vector<std::string> strs;
};

struct Entry {
  Value value;
  int line = 0;
  bool used = false;
};

// Raw "section.key" -> value store preserving line numbers, so unknown or
// ill-typed keys can be reported where they appear.
struct RawConfig {
  std::string origin;
  std::map<std::string, Entry> entries;

  [[noreturn]] void fail(int line, const std::string& what) const {
    throw ConfigError(origin + ":" + std::to_string(line) + ": " + what);
  }
};

std::string trim(const std::string& s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

// One scalar token: quoted string, boolean, or number.
Value parse_scalar(const RawConfig& raw, int line, const std::string& tok) {
  Value v;
  if (tok.size() >= 2 && tok.front() == '"' && tok.back() == '"') {
    v.kind = Value::Kind::String;
    v.s = tok.substr(1, tok.size() - 2);
    return v;
  }
  if (tok == "true" || tok == "false") {
    v.kind = Value::Kind::Bool;
    v.b = tok == "true";
    return v;
  }
  char* end = nullptr;
  v.num = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size() || tok.empty()) {
    raw.fail(line, "cannot parse value '" + tok + "'");
  }
  v.kind = Value::Kind::Number;
  return v;
}

// Splits a bracketed list on commas; quotes have no escapes in this subset.
std::vector<std::string> split_list(const RawConfig& raw, int line,
                                    const std::string& body) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char c : body) {
    if (c == '"') quoted = !quoted;
    if (c == ',' && !quoted) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  const std::string last = trim(cur);
  if (!last.empty()) out.push_back(last);
  if (quoted) raw.fail(line, "unterminated string");
  return out;
}

Value parse_value(const RawConfig& raw, int line, const std::string& text) {
  if (!text.empty() && text.front() == '[') {
    if (text.back() != ']') raw.fail(line, "unterminated array");
    const std::vector<std::string> items =
        split_list(raw, line, text.substr(1, text.size() - 2));
    Value v;
    v.kind = Value::Kind::NumberList;
    bool any_string = false;
    for (const std::string& item : items) {
      const Value sv = parse_scalar(raw, line, item);
      if (sv.kind == Value::Kind::String) {
        any_string = true;
        v.strs.push_back(sv.s);
      } else if (sv.kind == Value::Kind::Number) {
        v.nums.push_back(sv.num);
      } else {
        raw.fail(line, "arrays hold numbers or strings");
      }
    }
    if (any_string && !v.nums.empty()) {
      raw.fail(line, "arrays cannot mix numbers and strings");
    }
    if (any_string) v.kind = Value::Kind::StringList;
    return v;
  }
  return parse_scalar(raw, line, text);
}

RawConfig parse_raw(const std::string& text, const std::string& origin) {
  RawConfig raw;
  raw.origin = origin;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) {
      // Strip comments outside quotes only.
      bool quoted = false;
      for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == '#' && !quoted) {
          line = line.substr(0, i);
          break;
        }
      }
    }
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') raw.fail(lineno, "malformed section header");
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty()) raw.fail(lineno, "empty section name");
      continue;
    }
    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) raw.fail(lineno, "expected key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string val = trim(t.substr(eq + 1));
    if (key.empty()) raw.fail(lineno, "empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    if (raw.entries.count(full) != 0) {
      raw.fail(lineno, "duplicate key '" + full + "'");
    }
    Entry e;
    e.line = lineno;
    e.value = parse_value(raw, lineno, val);
    raw.entries[full] = e;
  }
  return raw;
}

// Typed getters; each marks the entry used so leftovers can be rejected.

Entry* find(RawConfig& raw, const std::string& key) {
  auto it = raw.entries.find(key);
  if (it == raw.entries.end()) return nullptr;
  it->second.used = true;
  return &it->second;
}

double get_number(RawConfig& raw, const std::string& key, double fallback) {
  Entry* e = find(raw, key);
  if (!e) return fallback;
  if (e->value.kind != Value::Kind::Number) {
    raw.fail(e->line, "'" + key + "' must be a number");
  }
  return e->value.num;
}

int get_int(RawConfig& raw, const std::string& key, int fallback) {
  Entry* e = find(raw, key);
  if (!e) return fallback;
  if (e->value.kind != Value::Kind::Number ||
      e->value.num != static_cast<double>(static_cast<int>(e->value.num))) {
    raw.fail(e->line, "'" + key + "' must be an integer");
  }
  return static_cast<int>(e->value.num);
}

bool get_bool(RawConfig& raw, const std::string& key, bool fallback) {
  Entry* e = find(raw, key);
  if (!e) return fallback;
  if (e->value.kind != Value::Kind::Bool) {
    raw.fail(e->line, "'" + key + "' must be true or false");
  }
  return e->value.b;
}

std::string get_string(RawConfig& raw, const std::string& key,
                       const std::string& fallback, bool required = false) {
  Entry* e = find(raw, key);
  if (!e) {
    if (required) throw ConfigError(raw.origin + ": missing key '" + key + "'");
    return fallback;
  }
  if (e->value.kind != Value::Kind::String) {
    raw.fail(e->line, "'" + key + "' must be a quoted string");
  }
  return e->value.s;
}

std::vector<double> get_numbers(RawConfig& raw, const std::string& key) {
  Entry* e = find(raw, key);
  if (!e) return {};
  if (e->value.kind == Value::Kind::NumberList) return e->value.nums;
  if (e->value.kind == Value::Kind::Number) return {e->value.num};
  raw.fail(e->line, "'" + key + "' must be an array of numbers");
}

std::vector<std::string> get_strings(RawConfig& raw, const std::string& key) {
  Entry* e = find(raw, key);
  if (!e) return {};
  if (e->value.kind == Value::Kind::StringList) return e->value.strs;
  if (e->value.kind == Value::Kind::String) return {e->value.s};
  if (e->value.kind == Value::Kind::NumberList && e->value.nums.empty()) {
    return {};
  }
  raw.fail(e->line, "'" + key + "' must be an array of strings");
}

FactorKind parse_kind(RawConfig& raw, const std::string& key) {
  const std::string s = get_string(raw, key, "", true);
  if (s == "flat-torus") return FactorKind::FlatTorus;
  if (s == "euclidean-chart") return FactorKind::EuclideanChart;
  if (s == "round-sphere") return FactorKind::RoundSphere;
  if (s == "hyperbolic-disk") return FactorKind::HyperbolicDisk;
  throw ConfigError(raw.origin + ": unknown factor kind '" + s + "'");
}

FactorConfig parse_factor(RawConfig& raw, const std::string& section,
                          bool with_grid) {
  FactorConfig f;
  f.kind = parse_kind(raw, section + ".kind");
  f.dim = get_int(raw, section + ".dim",
                  f.kind == FactorKind::RoundSphere ? 2 : 1);
  f.scale = get_number(raw, section + ".scale", 1.0);
  if (with_grid) {
    const std::vector<double> res = get_numbers(raw, section + ".resolution");
    for (double r : res) f.resolution.push_back(static_cast<int>(r));
    f.order = get_int(raw, section + ".order", 4);
    const std::string mask = get_string(raw, section + ".mask", "none");
    if (mask == "annulus") {
      f.mask = FactorConfig::Mask::Annulus;
      const std::vector<double> rr = get_numbers(raw, section + ".mask_radii");
      if (rr.size() != 2) {
        throw ConfigError(raw.origin + ": mask_radii needs [r0, r1]");
      }
      f.mask_r0 = rr[0];
      f.mask_r1 = rr[1];
    } else if (mask == "disk") {
      f.mask = FactorConfig::Mask::Disk;
      f.mask_r0 = get_number(raw, section + ".mask_radius", 1.0);
    } else if (mask != "none") {
      throw ConfigError(raw.origin + ": unknown mask '" + mask + "'");
    }
  }
  return f;
}

InitialConfig parse_initial(RawConfig& raw) {
  InitialConfig ini;
  const std::string preset = get_string(raw, "initial.preset", "", true);
  if (preset == "constant") {
    ini.preset = InitialPreset::Constant;
  } else if (preset == "sinusoid") {
    ini.preset = InitialPreset::Sinusoid;
  } else if (preset == "linear-wrap") {
    ini.preset = InitialPreset::LinearWrap;
  } else if (preset == "catenoid") {
    ini.preset = InitialPreset::Catenoid;
  } else if (preset == "expression") {
    ini.preset = InitialPreset::Expression;
  } else {
    throw ConfigError(raw.origin + ": unknown preset '" + preset + "'");
  }
  ini.value = get_numbers(raw, "initial.value");
  ini.amplitude = get_number(raw, "initial.amplitude", 0.0);
  ini.mode = get_int(raw, "initial.mode", 1);
  ini.slope = get_number(raw, "initial.slope", 0.0);
  ini.c = get_number(raw, "initial.c", 0.5);
  ini.exprs = get_strings(raw, "initial.f");
  return ini;
}

ScenarioConfig extract(RawConfig& raw) {
  ScenarioConfig cfg;
  cfg.sigma1 = parse_factor(raw, "sigma1", true);
  cfg.sigma2 = parse_factor(raw, "sigma2", false);
  cfg.rho = get_number(raw, "product.rho", 1.0);
  cfg.rho_auto = get_bool(raw, "product.rho_auto", false);

  cfg.initial = parse_initial(raw);

  cfg.flow.cfl = get_number(raw, "flow.cfl", cfg.flow.cfl);
  cfg.flow.t_max = get_number(raw, "flow.t_max", cfg.flow.t_max);
  cfg.flow.tol_H = get_number(raw, "flow.tol_H", cfg.flow.tol_H);
  cfg.flow.tol_osc = get_number(raw, "flow.tol_osc", cfg.flow.tol_osc);
  cfg.flow.guard_margin =
      get_number(raw, "flow.guard_margin", cfg.flow.guard_margin);
  cfg.flow.mono_slack = get_number(raw, "flow.mono_slack", cfg.flow.mono_slack);
  cfg.flow.monitor_stride =
      get_int(raw, "flow.monitor_stride", cfg.flow.monitor_stride);
  cfg.flow.checkpoint_stride =
      get_int(raw, "flow.checkpoint_stride", cfg.flow.checkpoint_stride);

  cfg.checks = get_strings(raw, "checks.names");
  cfg.margin_slack = get_number(raw, "checks.margin_slack", cfg.margin_slack);

  for (const auto& [key, entry] : raw.entries) {
    if (!entry.used) raw.fail(entry.line, "unknown key '" + key + "'");
  }
  return cfg;
}

}  // namespace

ScenarioConfig parse_scenario_text(const std::string& text,
                                   const std::string& origin) {
  RawConfig raw = parse_raw(text, origin);
  return extract(raw);
}

ScenarioConfig parse_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str(), path);
}

}  // namespace graphflow
