#ifndef ECGPPG_POLICY_IO_HPP
#define ECGPPG_POLICY_IO_HPP

#include <filesystem>

#include "json.hpp"
#include "ecgppg/monitor.hpp"

namespace ecgppg {

/// Interval template: {name, start_event, end_event, bound_ms}.
/// Hand-written automaton: {name, locations, initial, sink, accepting, clocks,
/// alphabet, rearm_event?, transitions: [{from, event, guard: [{clock, op,
/// value}], reset, to}]}, with op one of "<", "<=", "==", ">=", ">".
/// Both forms throw BadPolicy on malformed input.
TimedAutomaton policy_from_json(const nlohmann::json& j);
TimedAutomaton load_policy(const std::filesystem::path& path);

/// Serializes any automaton in the hand-written form.
nlohmann::json automaton_to_json(const TimedAutomaton& a);

}  // namespace ecgppg

#endif  // ECGPPG_POLICY_IO_HPP
