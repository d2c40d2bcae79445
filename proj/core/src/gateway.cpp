#include "scenforge/gateway.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <set>
#include <vector>

#include "httplib.h"
#include "json.hpp"

namespace scenforge::gateway {

namespace {

std::string describe_params(const dsl::FunctionSig& sig) {
  std::string s;
  for (std::size_t i = 0; i < sig.params.size(); ++i) {
    const auto& p = sig.params[i];
    if (i) s += ", ";
    s += p.name;
    switch (p.type) {
      case dsl::ParamType::kNumber:
        s += "=" + format_double(p.default_number) + " in [" + format_double(p.range.lo) + ", " +
             format_double(p.range.hi) + "]";
        break;
      case dsl::ParamType::kAngle:
        s += "=" + format_double(p.default_number) + " rad in [" + format_double(p.range.lo) +
             ", " + format_double(p.range.hi) + "]";
        break;
      case dsl::ParamType::kPoint:
        s += "=(" + format_double(p.default_point.x) + "," + format_double(p.default_point.y) +
             ")";
        break;
      case dsl::ParamType::kAgentRef:
        s += "=" + p.default_text + " (an agent id)";
        break;
      case dsl::ParamType::kChoice: {
        s += "=" + p.default_text + " (one of ";
        for (std::size_t k = 0; k < p.choices.size(); ++k) {
          if (k) s += "|";
          s += p.choices[k];
        }
        s += ")";
        break;
      }
    }
  }
  return s;
}

}  // namespace

PromptTemplate default_template() {
  PromptTemplate t;
  std::string& pre = t.preamble;
  pre += "You write driving scenario scripts in a small line-oriented language.\n";
  pre += "Statements: 'scenario <name>', 'seed <uint>', 'env <tag>...',\n";
  pre += "'ego: <function> key=value...', 'agent <id>: <vehicle|pedestrian> <function> "
         "key=value...', 'save all <path>'.\n";
  pre += "Angles accept a 'deg' suffix; points are written (x,y); units are SI.\n";
  pre += "Callable functions:\n";
  for (const auto& f : dsl::registry()) {
    if (f.kind == dsl::FunctionKind::kUtility) continue;
    const char* who = f.kind == dsl::FunctionKind::kVehicleManeuver ? "vehicle" : "pedestrian";
    pre += "  - " + f.name + " (" + who + "): " + f.summary;
    if (!f.params.empty()) pre += " | params: " + describe_params(f);
    pre += "\n";
  }
  t.instruction =
      "Translate the following request into one scenario document. Output only the "
      "document, no commentary.\nRequest: {USER QUERY}\n";
  return t;
}

std::string build_prompt(const PromptTemplate& tmpl, std::string_view query) {
  const std::size_t first = tmpl.instruction.find(kQueryPlaceholder);
  if (first == std::string::npos)
    throw GatewayError(GatewayErrorKind::kTemplate,
                       "prompt template is missing the query placeholder");
  if (tmpl.instruction.find(kQueryPlaceholder, first + 1) != std::string::npos)
    throw GatewayError(GatewayErrorKind::kTemplate,
                       "prompt template contains the query placeholder more than once");
  std::string out = tmpl.preamble;
  out += tmpl.instruction.substr(0, first);
  out += query;
  out += tmpl.instruction.substr(first + kQueryPlaceholder.size());
  return out;
}

GatewayConfig config_from_env() {
  GatewayConfig cfg;
  if (const char* url = std::getenv("SCENFORGE_LLM_URL")) cfg.base_url = url;
  if (const char* model = std::getenv("SCENFORGE_LLM_MODEL")) cfg.model = model;
  return cfg;
}

std::string query_remote(const GatewayConfig& cfg, std::string_view prompt) {
  if (cfg.base_url.empty())
    throw GatewayError(GatewayErrorKind::kConfig, "no endpoint configured (SCENFORGE_LLM_URL)");
  const char* token = cfg.token_env.empty() ? nullptr : std::getenv(cfg.token_env.c_str());
  if (!token || !*token)
    throw GatewayError(GatewayErrorKind::kAuth,
                       "auth token environment variable '" + cfg.token_env + "' is unset or empty");

  nlohmann::json body = {
      {"model", cfg.model},
      {"messages", {{{"role", "user"}, {"content", std::string(prompt)}}}},
  };
  const std::string payload = body.dump();

  httplib::Client cli(cfg.base_url);
  const auto timeout_ms = static_cast<int>(cfg.timeout_seconds * 1000.0);
  cli.set_connection_timeout(0, timeout_ms * 1000);
  cli.set_read_timeout(0, timeout_ms * 1000);
  cli.set_write_timeout(0, timeout_ms * 1000);
  httplib::Headers headers = {{"Authorization", std::string("Bearer ") + token}};

  std::string last_error;
  const int attempts = std::max(1, cfg.attempts);
  for (int attempt = 0; attempt < attempts; ++attempt) {
    auto res = cli.Post("/v1/chat/completions", headers, payload, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;  // transport failure: retry
    }
    if (res->status == 401 || res->status == 403)
      throw GatewayError(GatewayErrorKind::kAuth,
                         "endpoint rejected the auth token (HTTP " + std::to_string(res->status) + ")");
    if (res->status < 200 || res->status >= 300)
      throw GatewayError(GatewayErrorKind::kHttp,
                         "endpoint returned HTTP " + std::to_string(res->status));
    nlohmann::json reply = nlohmann::json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.contains("choices") || !reply["choices"].is_array() ||
        reply["choices"].empty() || !reply["choices"][0].contains("message") ||
        !reply["choices"][0]["message"].contains("content") ||
        !reply["choices"][0]["message"]["content"].is_string())
      throw GatewayError(GatewayErrorKind::kProtocol, "malformed completion response body");
    std::string content = reply["choices"][0]["message"]["content"].get<std::string>();
    if (content.empty())
      throw GatewayError(GatewayErrorKind::kEmpty, "endpoint returned an empty completion");
    return content;
  }
  throw GatewayError(GatewayErrorKind::kNetwork,
                     "could not reach " + cfg.base_url + " after " + std::to_string(attempts) +
                         " attempts (" + last_error + ")");
}

// ---------------------------------------------------------------------------
// Offline intent matching
// ---------------------------------------------------------------------------

namespace {

struct PhraseRule {
  std::string_view phrase;
  std::string_view function;  // base function; direction applied separately
};

// Matching is longest-phrase-first over the lowercased query, so the more
// specific wording always wins regardless of table order.
constexpr PhraseRule kPhrases[] = {
    {"crosses the road", "pedestrian_cross"},
    {"crossing the road", "pedestrian_cross"},
    {"cross the road", "pedestrian_cross"},
    {"crosses the street", "pedestrian_cross"},
    {"crossing the street", "pedestrian_cross"},
    {"cross the street", "pedestrian_cross"},
    {"crosses", "pedestrian_cross"},
    {"crossing", "pedestrian_cross"},
    {"changes lanes", "lane_change"},
    {"changing lanes", "lane_change"},
    {"change lanes", "lane_change"},
    {"changes lane", "lane_change"},
    {"changing lane", "lane_change"},
    {"change lane", "lane_change"},
    {"lane change", "lane_change"},
    {"lane-change", "lane_change"},
    {"cutting in", "cut_in"},
    {"cuts in", "cut_in"},
    {"cut in", "cut_in"},
    {"cut-in", "cut_in"},
    {"u-turn", "u_turn"},
    {"u turn", "u_turn"},
    {"overtaking", "overtake"},
    {"overtakes", "overtake"},
    {"overtake", "overtake"},
    {"following", "follow"},
    {"follows", "follow"},
    {"accelerating", "accelerate"},
    {"accelerates", "accelerate"},
    {"accelerate", "accelerate"},
    {"speeds up", "accelerate"},
    {"speed up", "accelerate"},
    {"braking", "brake"},
    {"brakes", "brake"},
    {"slows down", "brake"},
    {"slow down", "brake"},
    {"stopping", "stop"},
    {"stops", "stop"},
    {"turning left", "steer_left"},
    {"turns left", "steer_left"},
    {"turn left", "steer_left"},
    {"turning right", "steer_right"},
    {"turns right", "steer_right"},
    {"turn right", "steer_right"},
    {"walking", "pedestrian_walk"},
    {"walks", "pedestrian_walk"},
};

struct EnvWord {
  std::string_view word;
  std::string_view tag;
};

constexpr EnvWord kEnvWords[] = {
    {"rain", "rain"},   {"rainy", "rain"},       {"raining", "rain"},
    {"night", "night"}, {"nighttime", "night"},  {"daytime", "daytime"},
    {"sunny", "sunny"}, {"snow", "snow"},        {"snowy", "snow"},
    {"snowing", "snow"}, {"fog", "fog"},         {"foggy", "fog"},
};

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::set<std::string> words_of(const std::string& lower) {
  std::set<std::string> words;
  std::string cur;
  for (char c : lower) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
      cur += c;
    } else if (!cur.empty()) {
      words.insert(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) words.insert(cur);
  return words;
}

dsl::ManeuverCall call_of(std::string_view fn) {
  dsl::ManeuverCall c;
  c.function = std::string(fn);
  return c;
}

}  // namespace

IntentResult match_intent(std::string_view query) {
  const std::string lower = lowercase(query);
  const std::set<std::string> words = words_of(lower);

  // Environment tags: word-level matches, all collected.
  std::set<std::string> env;
  for (const auto& ew : kEnvWords)
    if (words.count(std::string(ew.word))) env.insert(std::string(ew.tag));

  // Maneuver: longest phrase found anywhere in the query wins; among equal
  // lengths the first table entry wins, keeping results deterministic.
  const PhraseRule* best = nullptr;
  for (const auto& rule : kPhrases) {
    if (lower.find(rule.phrase) == std::string::npos) continue;
    if (!best || rule.phrase.size() > best->phrase.size()) best = &rule;
  }

  const bool wants_right = words.count("right") > 0 && words.count("left") == 0;
  const bool mentions_ego = words.count("ego") > 0;

  IntentResult result;
  result.spec.name = "intent";
  result.spec.seed = 1;
  result.spec.environment = env;
  result.spec.ego = call_of("forward");

  if (!best) {
    result.recognized = false;
    return result;
  }
  result.recognized = true;
  result.matched_phrase = std::string(best->phrase);

  std::string fn(best->function);
  if (fn == "lane_change") fn = wants_right ? "lane_change_right" : "lane_change_left";

  const dsl::FunctionSig* sig = dsl::find_function(fn);
  const bool pedestrian = sig && sig->kind == dsl::FunctionKind::kPedestrianManeuver;
  // Maneuvers that act on the ego vehicle can be performed by ego itself when
  // the query says so; anything targeting ego, and every pedestrian maneuver,
  // is performed by a spawned agent.
  const bool targets_ego = fn == "cut_in" || fn == "overtake" || fn == "follow";

  dsl::ManeuverCall call = call_of(fn);
  if (fn == "pedestrian_cross" && wants_right) {
    dsl::ParamValue v;
    v.type = dsl::ParamType::kChoice;
    v.text = "right";
    call.params.emplace("direction", v);
  }

  if (!pedestrian && !targets_ego && mentions_ego) {
    result.spec.ego = std::move(call);
  } else {
    dsl::AgentDecl agent;
    agent.id = "a1";
    agent.category = pedestrian ? AgentCategory::kPedestrian : AgentCategory::kVehicle;
    agent.call = std::move(call);
    result.spec.agents.push_back(std::move(agent));
  }
  return result;
}

}  // namespace scenforge::gateway
