#pragma once

// Scenario description language: a small line-oriented text format that names
// an ego maneuver, any number of additional agents, environment tags, a seed,
// and output directives.  Parsing is total (never throws on bad input; it
// returns diagnostics with line/column positions), and print_canonical is a
// fixpoint: parse(print_canonical(s)) == s for every valid spec.
//
// Grammar (one statement per line, '#' starts a comment):
//   scenario <name>
//   seed <uint>
//   env <tag> [<tag> ...]
//   ego: <function> [key=value ...]
//   agent <id>: <vehicle|pedestrian> <function> [key=value ...]
//   save [trajectories|bev|bundle|all] <path>
//
// Values: plain numbers (SI units), angles (radians, or a number with a
// 'deg' suffix such as 90deg), 2D points "(x,y)", agent references, and
// enumerated choices.  Parameter keys for one call may appear in any order;
// the canonical form sorts them.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "scenforge/common.hpp"

namespace scenforge::dsl {

enum class ParamType { kNumber, kAngle, kPoint, kAgentRef, kChoice };

struct ParamValue {
  ParamType type = ParamType::kNumber;
  double number = 0.0;   // kNumber and kAngle (always radians)
  Vec2 point{0.0, 0.0};  // kPoint
  std::string text;      // kAgentRef and kChoice
  friend bool operator==(const ParamValue&, const ParamValue&) = default;
};

// A function invocation.  Only explicitly written parameters are stored;
// defaults are applied by consumers via the registry.  std::map keeps the
// keys sorted, which is exactly the canonical parameter order.
struct ManeuverCall {
  std::string function;
  std::map<std::string, ParamValue> params;
  friend bool operator==(const ManeuverCall&, const ManeuverCall&) = default;
};

enum class SaveKind { kAll, kTrajectories, kBev, kBundle };

struct SaveDirective {
  SaveKind kind = SaveKind::kAll;
  std::string path;
  friend bool operator==(const SaveDirective&, const SaveDirective&) = default;
};

struct AgentDecl {
  std::string id;
  AgentCategory category = AgentCategory::kVehicle;
  ManeuverCall call;
  friend bool operator==(const AgentDecl&, const AgentDecl&) = default;
};

struct ScenarioSpec {
  std::string name = "unnamed";
  std::uint64_t seed = 0;
  std::set<std::string> environment;  // sorted tags, e.g. {"rain"}
  ManeuverCall ego;                   // required
  std::vector<AgentDecl> agents;      // declaration order preserved
  std::vector<SaveDirective> outputs;
  friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

// ---- registry ----

enum class FunctionKind { kVehicleManeuver, kPedestrianManeuver, kUtility };

struct ParamSpec {
  std::string name;
  ParamType type = ParamType::kNumber;
  Interval range{0.0, 0.0};  // numbers/angles; for points, per coordinate
  double default_number = 0.0;
  Vec2 default_point{0.0, 0.0};
  std::string default_text;           // kAgentRef / kChoice
  std::vector<std::string> choices;   // kChoice only
};

struct FunctionSig {
  std::string name;
  FunctionKind kind = FunctionKind::kVehicleManeuver;
  std::vector<ParamSpec> params;
  // True for maneuvers whose stepping policy is defined by this project
  // (documented in the implementation) rather than taken from the published
  // cut-in controller; the cut-in family and the utility entries are the
  // primary-source ones.
  bool reconstructed = false;
  std::string summary;
};

// All callable functions, in a fixed order (vehicle maneuvers, pedestrian
// maneuvers, then utilities).
const std::vector<FunctionSig>& registry();

// nullptr when the name is unknown.
const FunctionSig* find_function(std::string_view name);

const ParamSpec* find_param(const FunctionSig& sig, std::string_view key);

// Effective value for a key: the explicit value if present, else the default.
ParamValue param_or_default(const ManeuverCall& call, const FunctionSig& sig,
                            std::string_view key);

// ---- parsing / printing ----

struct Diagnostic {
  int line = 0;    // 1-based
  int column = 0;  // 1-based
  std::string message;
};

struct ParseResult {
  std::optional<ScenarioSpec> spec;  // set only when there are no errors
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return spec.has_value(); }
};

ParseResult parse(std::string_view text);

// Canonical form: fixed statement order (scenario, seed, env, ego, agents in
// declaration order, saves), sorted parameter keys, sorted env tags, shortest
// round-trip number spelling, radians for angles.
std::string print_canonical(const ScenarioSpec& spec);

// Human-readable one-line rendering of a diagnostic ("line L, col C: msg").
std::string to_string(const Diagnostic& d);

}  // namespace scenforge::dsl
