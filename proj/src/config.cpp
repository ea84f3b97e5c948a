#include "ssmc/config.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "ssmc/error.hpp"

namespace ssmc {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

int parse_int(std::string_view token, int line) {
  const double v = parse_number(token, line);
  if (v != std::floor(v) || std::abs(v) > 9.0e15)
    throw ConfigError("expected an integer, got '" + std::string(token) + "'", line);
  return static_cast<int>(v);
}

// Re-raises section invariant failures at the line that set the key.
template <typename F>
void at_line(int line, F&& check) {
  try {
    check();
  } catch (const ConfigError& e) {
    if (e.line() > 0) throw;
    throw ConfigError(e.what(), line);
  }
}

Load parse_load(const std::vector<std::string_view>& tok, std::size_t first, int line) {
  if (first >= tok.size()) throw ConfigError("missing load kind", line);
  const std::string_view kind = tok[first];
  const std::size_t n = tok.size() - first;
  Load load;
  if (kind == "none" && n == 1) {
    load = Load::none();
  } else if (kind == "resistive" && n == 2) {
    load = Load::resistive(parse_number(tok[first + 1], line));
  } else if (kind == "phasor" && n == 3) {
    load = Load::phasor_sink(parse_number(tok[first + 1], line), parse_number(tok[first + 2], line));
  } else {
    throw ConfigError("load must be 'none', 'resistive <ohm>' or 'phasor <W> <var>'", line);
  }
  at_line(line, [&] { load.validate(); });
  return load;
}

LoadKind load_kind_from_string(std::string_view s, int line) {
  if (s == "none") return LoadKind::kNone;
  if (s == "resistive") return LoadKind::kResistive;
  if (s == "phasor") return LoadKind::kPhasorSink;
  throw ConfigError("unknown load kind '" + std::string(s) + "'", line);
}

std::string_view to_string(LoadKind k) {
  switch (k) {
    case LoadKind::kNone:
      return "none";
    case LoadKind::kResistive:
      return "resistive";
    case LoadKind::kPhasorSink:
      return "phasor";
  }
  return "none";
}

std::string load_text(const Load& l) {
  switch (l.kind) {
    case LoadKind::kNone:
      return "none";
    case LoadKind::kResistive:
      return "resistive " + format_roundtrip(l.resistance);
    case LoadKind::kPhasorSink:
      return "phasor " + format_roundtrip(l.p) + " " + format_roundtrip(l.q);
  }
  return "none";
}

/// Parse state threaded through the key handlers.
struct Builder {
  Scenario sc;
  bool load_v_n_set = false;
  bool load_f_n_set = false;
  bool load_phase_set = false;
  std::vector<std::pair<Event, int>> events;  // with source line
};

auto positive(const char* what) {
  return [what](double v) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(std::string(what) + " must be > 0");
  };
}

using Setter = std::function<void(Builder&, std::string_view, int)>;

struct KeySpec {
  Setter set;
  bool numeric;
};

template <typename F>
Setter number(F&& assign) {
  return [assign](Builder& b, std::string_view v, int line) { assign(b, parse_number(v, line), line); };
}

const std::map<std::string, KeySpec>& key_table() {
  static const std::map<std::string, KeySpec> table = [] {
    std::map<std::string, KeySpec> t;
    auto num = [&t](const std::string& key, std::function<void(Builder&, double)> assign,
                    std::function<void(const Builder&)> check) {
      t[key] = {number([assign, check](Builder& b, double v, int line) {
                  assign(b, v);
                  at_line(line, [&] { check(b); });
                }),
                true};
    };
    auto params = [](const Builder& b) { b.sc.params.validate(); };
    auto ctrl = [](const Builder& b) { b.sc.controller.validate(); };
    auto comp = [](const Builder& b) {
      if (!(b.sc.compensator.band_pass.omega0 > 0.0)) throw ConfigError("omega0 must be > 0");
      if (!(b.sc.compensator.band_pass.zeta > 0.0)) throw ConfigError("zeta must be > 0");
      if (!(b.sc.compensator.sat_limit > 0.0)) throw ConfigError("sat_limit must be > 0");
    };
    auto ref = [](const Builder& b) { b.sc.reference.validate(); };
    auto none = [](const Builder&) {};

    num("params.l_f", [](Builder& b, double v) { b.sc.params.l_f = v; }, params);
    num("params.c_f", [](Builder& b, double v) { b.sc.params.c_f = v; }, params);
    num("params.v_dc_nominal", [](Builder& b, double v) { b.sc.params.v_dc_nominal = v; }, params);
    num("params.f_n", [](Builder& b, double v) { b.sc.params.f_n = v; }, params);
    num("params.v_n_rms", [](Builder& b, double v) { b.sc.params.v_n_rms = v; }, params);

    num("controller.lambda", [](Builder& b, double v) { b.sc.controller.lambda = v; }, ctrl);
    num("controller.eta", [](Builder& b, double v) { b.sc.controller.eta = v; }, ctrl);
    num("controller.f_bound", [](Builder& b, double v) { b.sc.controller.f_bound = v; }, ctrl);
    num("controller.h", [](Builder& b, double v) { b.sc.controller.h = v; }, ctrl);
    num("controller.t_di", [](Builder& b, double v) { b.sc.controller.t_di = v; }, ctrl);
    t["controller.mode"] = {[](Builder& b, std::string_view v, int line) {
                              at_line(line, [&] { b.sc.controller.mode = control_mode_from_string(v); });
                            },
                            false};

    num("compensator.omega0", [](Builder& b, double v) { b.sc.compensator.band_pass.omega0 = v; }, comp);
    num("compensator.zeta", [](Builder& b, double v) { b.sc.compensator.band_pass.zeta = v; }, comp);
    num("compensator.sat_limit", [](Builder& b, double v) { b.sc.compensator.sat_limit = v; }, comp);
    t["compensator.input"] = {[](Builder& b, std::string_view v, int line) {
                                at_line(line, [&] { b.sc.compensator.input = filter_input_from_string(v); });
                              },
                              false};

    num("reference.amplitude", [](Builder& b, double v) { b.sc.reference.amplitude = v; }, ref);
    num("reference.frequency", [](Builder& b, double v) { b.sc.reference.frequency = v; }, ref);
    num("reference.phase", [](Builder& b, double v) { b.sc.reference.phase = v; }, ref);
    t["reference.step"] = {[](Builder& b, std::string_view v, int line) {
                             const auto tok = split_ws(v);
                             if (tok.size() != 3) throw ConfigError("step needs <time> <scale> <phase_offset>", line);
                             const double time = parse_number(tok[0], line);
                             b.events.push_back({{time, RefScale{parse_number(tok[1], line)}}, line});
                             b.events.push_back({{time, RefPhase{parse_number(tok[2], line)}}, line});
                           },
                           false};

    t["load.kind"] = {[](Builder& b, std::string_view v, int line) {
                        b.sc.load.initial.kind = load_kind_from_string(v, line);
                      },
                      false};
    num("load.resistance", [](Builder& b, double v) { b.sc.load.initial.resistance = v; },
        [](const Builder& b) {
          // inf is an open circuit and is what the echo writes for non-resistive loads.
          if (!(b.sc.load.initial.resistance > 0.0)) throw ConfigError("resistance must be > 0");
        });
    num("load.p", [](Builder& b, double v) { b.sc.load.initial.p = v; }, none);
    num("load.q", [](Builder& b, double v) { b.sc.load.initial.q = v; }, none);
    num("load.v_n_rms",
        [](Builder& b, double v) {
          b.sc.load.v_n_rms = v;
          b.load_v_n_set = true;
        },
        [](const Builder& b) { positive("v_n_rms")(b.sc.load.v_n_rms); });
    num("load.f_n",
        [](Builder& b, double v) {
          b.sc.load.f_n = v;
          b.load_f_n_set = true;
        },
        [](const Builder& b) { positive("f_n")(b.sc.load.f_n); });
    num("load.nominal_phase",
        [](Builder& b, double v) {
          b.sc.load.nominal_phase = v;
          b.load_phase_set = true;
        },
        none);
    t["load.step"] = {[](Builder& b, std::string_view v, int line) {
                        const auto tok = split_ws(v);
                        if (tok.empty()) throw ConfigError("step needs <time> <load>", line);
                        b.events.push_back({{parse_number(tok[0], line), LoadSet{parse_load(tok, 1, line)}}, line});
                      },
                      false};

    num("vdc.initial", [](Builder& b, double v) { b.sc.vdc_initial = v; },
        [](const Builder& b) { positive("vdc initial")(b.sc.vdc_initial); });
    t["vdc.step"] = {[](Builder& b, std::string_view v, int line) {
                       const auto tok = split_ws(v);
                       if (tok.size() != 2) throw ConfigError("step needs <time> <volts>", line);
                       const double volts = parse_number(tok[1], line);
                       at_line(line, [&] { positive("vdc_set")(volts); });
                       b.events.push_back({{parse_number(tok[0], line), VdcSet{volts}}, line});
                     },
                     false};

    t["events.event"] = {[](Builder& b, std::string_view v, int line) {
                           const auto tok = split_ws(v);
                           if (tok.size() < 2) throw ConfigError("event needs <time> <kind> <args>", line);
                           const double time = parse_number(tok[0], line);
                           const std::string_view kind = tok[1];
                           auto one_arg = [&]() {
                             if (tok.size() != 3) throw ConfigError(std::string(kind) + " takes one value", line);
                             return tok[2];
                           };
                           EventAction action;
                           if (kind == "vdc_set") {
                             const double volts = parse_number(one_arg(), line);
                             at_line(line, [&] { positive("vdc_set")(volts); });
                             action = VdcSet{volts};
                           } else if (kind == "ref_scale") {
                             action = RefScale{parse_number(one_arg(), line)};
                           } else if (kind == "ref_phase") {
                             action = RefPhase{parse_number(one_arg(), line)};
                           } else if (kind == "load_set") {
                             action = LoadSet{parse_load(tok, 2, line)};
                           } else if (kind == "mode_set") {
                             const auto text = one_arg();
                             ControlMode mode{};
                             at_line(line, [&] { mode = control_mode_from_string(text); });
                             action = ModeSet{mode};
                           } else {
                             throw ConfigError("unknown event kind '" + std::string(kind) + "'", line);
                           }
                           b.events.push_back({{time, action}, line});
                         },
                         false};

    num("engine.duration", [](Builder& b, double v) { b.sc.engine.duration = v; },
        [](const Builder& b) { positive("duration")(b.sc.engine.duration); });
    auto int_key = [&t](const std::string& key, std::function<void(Builder&, int)> assign, int min) {
      t[key] = {[assign, min, key](Builder& b, std::string_view v, int line) {
                  const int n = parse_int(v, line);
                  if (n < min)
                    throw ConfigError(key.substr(key.find('.') + 1) + " must be >= " + std::to_string(min), line);
                  assign(b, n);
                },
                true};
    };
    int_key("engine.substeps_per_tick", [](Builder& b, int v) { b.sc.engine.substeps_per_tick = v; }, 1);
    int_key("engine.decimation", [](Builder& b, int v) { b.sc.engine.decimation = v; }, 1);
    int_key("engine.reaching_dwell", [](Builder& b, int v) { b.sc.engine.reaching_dwell = v; }, 1);
    t["engine.max_samples"] = {[](Builder& b, std::string_view v, int line) {
                                 const double n = parse_number(v, line);
                                 if (!(n >= 1.0) || n != std::floor(n) || n > 9.0e18)
                                   throw ConfigError("max_samples must be a positive integer", line);
                                 b.sc.engine.max_samples = static_cast<std::int64_t>(n);
                               },
                               true};
    num("engine.metric_settle", [](Builder& b, double v) { b.sc.engine.metric_settle = v; },
        [](const Builder& b) {
          if (!(b.sc.engine.metric_settle >= 0.0)) throw ConfigError("metric_settle must be >= 0");
        });
    return t;
  }();
  return table;
}

bool repeatable(const std::string& key) {
  return key == "reference.step" || key == "load.step" || key == "vdc.step" || key == "events.event";
}

const std::set<std::string_view> kSections = {"params", "reference", "controller", "compensator",
                                              "load",   "vdc",       "events",     "engine"};

Scenario finish(Builder& b) {
  Scenario& sc = b.sc;
  if (!b.load_v_n_set) sc.load.v_n_rms = sc.params.v_n_rms;
  if (!b.load_f_n_set) sc.load.f_n = sc.params.f_n;
  if (!b.load_phase_set) sc.load.nominal_phase = sc.reference.phase;
  for (const auto& [event, line] : b.events) {
    if (!std::isfinite(event.time) || event.time < 0.0 || event.time > sc.engine.duration)
      throw ConfigError("event time " + format_roundtrip(event.time) + " outside [0, duration]", line);
    sc.events.push_back(event);
  }
  sc.validate();
  return sc;
}

}  // namespace

double parse_number(std::string_view token, int line) {
  token = trim(token);
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (first != last && *first == '+') ++first;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || first == last)
    throw ConfigError("expected a number, got '" + std::string(token) + "'", line);
  return v;
}

std::string format_roundtrip(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

Scenario parse_config(std::string_view text) {
  Builder b;
  std::string section;
  std::map<std::string, int> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("malformed section header", line_no);
      const std::string_view name = trim(line.substr(1, line.size() - 2));
      if (!kSections.contains(name)) throw ConfigError("unknown section [" + std::string(name) + "]", line_no);
      section = std::string(name);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", line_no);
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (section.empty()) throw ConfigError("key '" + key + "' appears before any section", line_no);
    const std::string full = section + "." + key;
    const auto& table = key_table();
    const auto it = table.find(full);
    if (it == table.end()) throw ConfigError("unknown key '" + key + "' in [" + section + "]", line_no);
    if (!repeatable(full)) {
      const auto [prev, inserted] = seen.emplace(full, line_no);
      if (!inserted)
        throw ConfigError("duplicate key '" + key + "', first set at line " + std::to_string(prev->second), line_no);
    }
    if (value.empty()) throw ConfigError("missing value for '" + key + "'", line_no);
    it->second.set(b, value, line_no);
  }
  return finish(b);
}

Scenario parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string effective_config(const Scenario& s) {
  std::ostringstream o;
  auto kv = [&o](std::string_view k, const std::string& v) { o << k << " = " << v << '\n'; };
  auto d = [](double v) { return format_roundtrip(v); };
  o << "[params]\n";
  kv("l_f", d(s.params.l_f));
  kv("c_f", d(s.params.c_f));
  kv("v_dc_nominal", d(s.params.v_dc_nominal));
  kv("f_n", d(s.params.f_n));
  kv("v_n_rms", d(s.params.v_n_rms));
  o << "\n[controller]\n";
  kv("lambda", d(s.controller.lambda));
  kv("eta", d(s.controller.eta));
  kv("f_bound", d(s.controller.f_bound));
  kv("h", d(s.controller.h));
  kv("t_di", d(s.controller.t_di));
  kv("mode", std::string(to_string(s.controller.mode)));
  o << "\n[compensator]\n";
  kv("omega0", d(s.compensator.band_pass.omega0));
  kv("zeta", d(s.compensator.band_pass.zeta));
  kv("sat_limit", d(s.compensator.sat_limit));
  kv("input", std::string(to_string(s.compensator.input)));
  o << "\n[reference]\n";
  kv("amplitude", d(s.reference.amplitude));
  kv("frequency", d(s.reference.frequency));
  kv("phase", d(s.reference.phase));
  o << "\n[load]\n";
  kv("kind", std::string(to_string(s.load.initial.kind)));
  kv("resistance", d(s.load.initial.resistance));
  kv("p", d(s.load.initial.p));
  kv("q", d(s.load.initial.q));
  kv("v_n_rms", d(s.load.v_n_rms));
  kv("f_n", d(s.load.f_n));
  kv("nominal_phase", d(s.load.nominal_phase));
  o << "\n[vdc]\n";
  kv("initial", d(s.vdc_initial));
  o << "\n[events]\n";
  for (const auto& st : s.reference.steps) {
    kv("event", d(st.time) + " ref_scale " + d(st.scale));
    kv("event", d(st.time) + " ref_phase " + d(st.phase_offset));
  }
  for (const auto& st : s.load.steps) kv("event", d(st.time) + " load_set " + load_text(st.load));
  for (const auto& e : s.events) {
    std::string body = std::visit(
        [&](const auto& a) -> std::string {
          using A = std::decay_t<decltype(a)>;
          if constexpr (std::is_same_v<A, VdcSet>) return "vdc_set " + d(a.volts);
          if constexpr (std::is_same_v<A, RefScale>) return "ref_scale " + d(a.factor);
          if constexpr (std::is_same_v<A, RefPhase>) return "ref_phase " + d(a.radians);
          if constexpr (std::is_same_v<A, LoadSet>) return "load_set " + load_text(a.load);
          if constexpr (std::is_same_v<A, ModeSet>) return "mode_set " + std::string(to_string(a.mode));
        },
        e.action);
    kv("event", d(e.time) + " " + body);
  }
  o << "\n[engine]\n";
  kv("duration", d(s.engine.duration));
  kv("substeps_per_tick", std::to_string(s.engine.substeps_per_tick));
  kv("decimation", std::to_string(s.engine.decimation));
  kv("max_samples", std::to_string(s.engine.max_samples));
  kv("metric_settle", d(s.engine.metric_settle));
  kv("reaching_dwell", std::to_string(s.engine.reaching_dwell));
  return o.str();
}

void set_config_value(Scenario& scenario, std::string_view dotted_key, std::string_view value) {
  const std::string key(dotted_key);
  const auto& table = key_table();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown key '" + key + "'");
  if (!it->second.numeric || repeatable(key)) throw ConfigError("key '" + key + "' is not a numeric scalar");
  Builder b;
  b.sc = scenario;
  // Loads keep tracking params unless they were set explicitly; keep the
  // link for the keys they are derived from.
  const bool follow_v = scenario.load.v_n_rms == scenario.params.v_n_rms;
  const bool follow_f = scenario.load.f_n == scenario.params.f_n;
  it->second.set(b, value, 0);
  if (follow_v && key == "params.v_n_rms") b.sc.load.v_n_rms = b.sc.params.v_n_rms;
  if (follow_f && key == "params.f_n") b.sc.load.f_n = b.sc.params.f_n;
  b.sc.validate();
  scenario = b.sc;
}

std::vector<std::string> sweepable_keys() {
  std::vector<std::string> out;
  for (const auto& [k, spec] : key_table())
    if (spec.numeric && !repeatable(k)) out.push_back(k);
  return out;
}

}  // namespace ssmc
