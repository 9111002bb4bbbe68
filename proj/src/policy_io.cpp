#include "ecgppg/policy_io.hpp"

#include <algorithm>
#include <fstream>

#include "ecgppg/error.hpp"

namespace ecgppg {

namespace {

using nlohmann::json;

EventLabel parse_label(const json& j) {
  const auto s = j.get<std::string>();
  if (auto l = label_from_string(s)) return *l;
  throw Error(ErrorCode::BadPolicy, "unknown event symbol '" + s + "'");
}

std::size_t index_of(const std::vector<std::string>& names, const std::string& name,
                     const char* what) {
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw Error(ErrorCode::BadPolicy, std::string("unknown ") + what + " '" + name + "'");
  return static_cast<std::size_t>(it - names.begin());
}

CompareOp parse_op(const std::string& op) {
  if (op == "<") return CompareOp::Less;
  if (op == "<=") return CompareOp::LessEqual;
  if (op == "==") return CompareOp::Equal;
  if (op == ">=") return CompareOp::GreaterEqual;
  if (op == ">") return CompareOp::Greater;
  throw Error(ErrorCode::BadPolicy, "unknown comparison '" + op + "'");
}

const char* op_string(CompareOp op) {
  switch (op) {
    case CompareOp::Less: return "<";
    case CompareOp::LessEqual: return "<=";
    case CompareOp::Equal: return "==";
    case CompareOp::GreaterEqual: return ">=";
    case CompareOp::Greater: return ">";
  }
  return "?";
}

TimedAutomaton parse_automaton(const json& j) {
  TimedAutomaton a;
  a.name = j.value("name", "");
  a.locations = j.at("locations").get<std::vector<std::string>>();
  a.clocks = j.value("clocks", std::vector<std::string>{});
  a.initial = index_of(a.locations, j.at("initial").get<std::string>(), "location");
  a.sink = index_of(a.locations, j.at("sink").get<std::string>(), "location");
  for (const auto& l : j.at("accepting")) a.accepting.push_back(index_of(a.locations, l.get<std::string>(), "location"));
  for (const auto& s : j.at("alphabet")) a.alphabet.push_back(parse_label(s));
  if (j.contains("rearm_event") && !j.at("rearm_event").is_null()) a.rearm_event = parse_label(j.at("rearm_event"));
  for (const auto& t : j.at("transitions")) {
    Transition tr{};
    tr.source = index_of(a.locations, t.at("from").get<std::string>(), "location");
    tr.target = index_of(a.locations, t.at("to").get<std::string>(), "location");
    tr.event = parse_label(t.at("event"));
    for (const auto& g : t.value("guard", json::array())) {
      tr.guard.push_back({index_of(a.clocks, g.at("clock").get<std::string>(), "clock"),
                          parse_op(g.at("op").get<std::string>()), g.at("value").get<double>()});
    }
    for (const auto& c : t.value("reset", json::array()))
      tr.resets.push_back(index_of(a.clocks, c.get<std::string>(), "clock"));
    a.transitions.push_back(std::move(tr));
  }
  a.validate();
  return a;
}

}  // namespace

TimedAutomaton policy_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::BadPolicy, "policy must be a JSON object");
  try {
    if (j.contains("transitions")) return parse_automaton(j);
    return build_interval_policy(parse_label(j.at("start_event")), parse_label(j.at("end_event")),
                                 j.at("bound_ms").get<double>(), j.value("name", ""));
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::BadPolicy, ex.what());
  }
}

TimedAutomaton load_policy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::BadPolicy, path.string() + ": " + ex.what());
  }
  return policy_from_json(j);
}

json automaton_to_json(const TimedAutomaton& a) {
  json j;
  j["name"] = a.name;
  j["locations"] = a.locations;
  j["initial"] = a.locations.at(a.initial);
  j["sink"] = a.locations.at(a.sink);
  j["accepting"] = json::array();
  for (LocationId l : a.accepting) j["accepting"].push_back(a.locations.at(l));
  j["clocks"] = a.clocks;
  j["alphabet"] = json::array();
  for (EventLabel e : a.alphabet) j["alphabet"].push_back(std::string(1, to_char(e)));
  j["rearm_event"] = a.rearm_event ? json(std::string(1, to_char(*a.rearm_event))) : json(nullptr);
  j["transitions"] = json::array();
  for (const Transition& t : a.transitions) {
    json jt;
    jt["from"] = a.locations.at(t.source);
    jt["event"] = std::string(1, to_char(t.event));
    jt["guard"] = json::array();
    for (const auto& g : t.guard)
      jt["guard"].push_back({{"clock", a.clocks.at(g.clock)}, {"op", op_string(g.op)}, {"value", g.bound_ms}});
    jt["reset"] = json::array();
    for (ClockId c : t.resets) jt["reset"].push_back(a.clocks.at(c));
    jt["to"] = a.locations.at(t.target);
    j["transitions"].push_back(std::move(jt));
  }
  return j;
}

}  // namespace ecgppg
