#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "ssmc/engine.hpp"

namespace ssmc {

/// Parses a sectioned key = value scenario file. Sections: [params],
/// [controller], [compensator], [reference], [load], [vdc], [events],
/// [engine]. Missing keys keep their defaults (the nominal design preset). Errors
/// carry the offending line number.
///
/// Repeatable keys, all turned into events in file order:
///   [reference] step  = <time> <scale> <phase_offset>
///   [load]      step  = <time> none | resistive <ohm> | phasor <W> <var>
///   [vdc]       step  = <time> <volts>
///   [events]    event = <time> <kind> <args...>
/// Event kinds: vdc_set <V>, ref_scale <factor>, ref_phase <rad>,
/// load_set <load>, mode_set smc|ssmc|ideal.
Scenario parse_config(std::string_view text);
Scenario parse_config_file(const std::filesystem::path& path);

/// Effective configuration with every value written out. Doubles use the
/// shortest round-trip form, so parse_config(effective_config(s)) == s for
/// any parsed scenario. Program steps set in code are written as events.
std::string effective_config(const Scenario& scenario);

/// Sets one scalar key addressed as "section.key" (e.g. "vdc.initial",
/// "controller.t_di"). Throws ConfigError for unknown or non-numeric keys.
void set_config_value(Scenario& scenario, std::string_view dotted_key, std::string_view value);

/// Keys accepted by set_config_value.
std::vector<std::string> sweepable_keys();

/// Locale-independent double parse of the whole token.
double parse_number(std::string_view token, int line = 0);

/// Shortest decimal string that parses back to the same double.
std::string format_roundtrip(double v);

}  // namespace ssmc
