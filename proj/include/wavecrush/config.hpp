#ifndef WAVECRUSH_CONFIG_HPP
#define WAVECRUSH_CONFIG_HPP

#include <string>
#include <variant>

#include "wavecrush/sim.hpp"

namespace wavecrush {

struct ConfigError {
    std::string message;  // includes line number and offending key
};

/// Parses the flat scenario config format:
///
///   duration_ms = 60000          # global keys before any section
///   [node 1]
///   kind = gateway
///   [radio]
///   links = 1-2, 1-3
///   [timing]
///   nop_wait_ms = 120
///   [attack]
///   kind = power_of_nope
///   [heartbeat]
///   interval_ms = 10000
///   [app]
///   send = 5000 2 0x25 0x01 FF   # at_ms dst class cmd [params hex]
///
/// Unknown keys and sections are hard errors.
std::variant<Scenario, ConfigError> parse_scenario(const std::string& text);

std::variant<Scenario, ConfigError> load_scenario_file(const std::string& path);

}  // namespace wavecrush

#endif
