#pragma once

// Bridge between a free-form user query and a ScenarioSpec.  Two routes:
//  - query_remote: POST the assembled prompt to an OpenAI-style chat
//    completion endpoint and return the raw completion text (expected to be a
//    scenario document, parsed by the caller);
//  - match_intent: fully offline keyword matcher that maps a query onto one
//    of the built-in maneuvers plus environment tags.  Deterministic, no I/O.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "scenforge/dsl.hpp"

namespace scenforge::gateway {

// The placeholder the instruction text must contain exactly once; it is
// replaced verbatim by the user query.
inline constexpr std::string_view kQueryPlaceholder = "{USER QUERY}";

struct PromptTemplate {
  std::string preamble;     // function library description shown to the model
  std::string instruction;  // must contain kQueryPlaceholder exactly once
};

// Built-in template: describes the scenario language and asks for a scenario
// document answering the query.  The preamble is generated from the registry
// so it never drifts out of sync with the callable functions.
PromptTemplate default_template();

enum class GatewayErrorKind { kTemplate, kConfig, kNetwork, kAuth, kHttp, kEmpty, kProtocol };

class GatewayError : public std::runtime_error {
 public:
  GatewayError(GatewayErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  GatewayErrorKind kind() const { return kind_; }

 private:
  GatewayErrorKind kind_;
};

// Substitutes the query for the placeholder.  Throws GatewayError(kTemplate)
// when the placeholder is missing or appears more than once.  The query text
// is inserted verbatim: no escaping, no trimming.
std::string build_prompt(const PromptTemplate& tmpl, std::string_view query);

struct GatewayConfig {
  std::string base_url;           // e.g. "http://127.0.0.1:8080"
  std::string model = "default";
  std::string token_env = "SCENFORGE_LLM_KEY";  // env var holding the bearer token
  double timeout_seconds = 30.0;
  int attempts = 2;  // total tries on connect/timeout failures
};

// Reads SCENFORGE_LLM_URL and SCENFORGE_LLM_MODEL; the token stays in the
// environment (only its variable name is recorded) so it can never end up in
// logs or serialized configs.
GatewayConfig config_from_env();

// POSTs {model, messages:[{role:"user", content: prompt}]} to
// <base_url>/v1/chat/completions with a bearer token and returns
// choices[0].message.content.  Throws GatewayError on any failure:
//   kConfig   - no base_url
//   kAuth     - token env var unset/empty, or HTTP 401/403
//   kNetwork  - connection/timeout failures after all attempts
//   kHttp     - any other non-2xx status
//   kProtocol - response body is not the expected JSON shape
//   kEmpty    - completion text is empty
std::string query_remote(const GatewayConfig& cfg, std::string_view prompt);

struct IntentResult {
  dsl::ScenarioSpec spec;
  bool recognized = false;  // false: no maneuver phrase matched, fallback spec
  std::string matched_phrase;
};

// Offline keyword matcher.  Longest matching phrase wins; environment words
// are collected independently of the maneuver.  Unrecognized queries fall
// back to a plain ego-forward scene with recognized=false.
IntentResult match_intent(std::string_view query);

}  // namespace scenforge::gateway
