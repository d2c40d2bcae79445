#include "scenforge/gateway.hpp"

#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "scenforge/dsl.hpp"

using namespace scenforge;
using namespace scenforge::gateway;

TEST_CASE("build_prompt substitutes the placeholder exactly once") {
  PromptTemplate t{"preamble ", "Write a scenario for: {USER QUERY}. Thanks."};
  const std::string query = "a car cuts in";
  const std::string out = build_prompt(t, query);
  CHECK(out == "preamble Write a scenario for: a car cuts in. Thanks.");
  CHECK(out.find(std::string(kQueryPlaceholder)) == std::string::npos);
  // byte-length arithmetic: template minus placeholder plus query
  CHECK(out.size() == t.preamble.size() + t.instruction.size() -
                          kQueryPlaceholder.size() + query.size());
  PromptTemplate plain{"", "X{USER QUERY}Y"};
  CHECK(build_prompt(plain, "q") == "XqY");
  CHECK(build_prompt(plain, "") == "XY");
}

TEST_CASE("build_prompt inserts queries with braces verbatim, single pass") {
  PromptTemplate t{"", "Q: {USER QUERY}"};
  const std::string out = build_prompt(t, "keep {USER QUERY} literal");
  CHECK(out == "Q: keep {USER QUERY} literal");
}

TEST_CASE("build_prompt rejects missing or repeated placeholders") {
  CHECK_THROWS_AS((void)build_prompt({"", "no placeholder"}, "q"), GatewayError);
  CHECK_THROWS_AS((void)build_prompt({"", "{USER QUERY} and {USER QUERY}"}, "q"), GatewayError);
  try {
    (void)build_prompt({"", "nope"}, "q");
  } catch (const GatewayError& e) {
    CHECK(e.kind() == GatewayErrorKind::kTemplate);
  }
}

TEST_CASE("default template mentions every callable maneuver") {
  const auto t = default_template();
  CHECK(t.instruction.find(kQueryPlaceholder) != std::string::npos);
  for (const auto& sig : dsl::registry()) {
    if (sig.kind == dsl::FunctionKind::kUtility) continue;
    CHECK(t.preamble.find(sig.name) != std::string::npos);
  }
}

TEST_CASE("config_from_env reads the url and model variables") {
  setenv("SCENFORGE_LLM_URL", "http://127.0.0.1:59999", 1);
  setenv("SCENFORGE_LLM_MODEL", "test-model", 1);
  auto cfg = config_from_env();
  CHECK(cfg.base_url == "http://127.0.0.1:59999");
  CHECK(cfg.model == "test-model");
  unsetenv("SCENFORGE_LLM_URL");
  unsetenv("SCENFORGE_LLM_MODEL");
  auto cfg2 = config_from_env();
  CHECK(cfg2.base_url.empty());
  CHECK(cfg2.model == "default");
}

TEST_CASE("query_remote fails fast without an endpoint or token") {
  GatewayConfig cfg;  // no base_url
  try {
    (void)query_remote(cfg, "hi");
    FAIL("expected GatewayError");
  } catch (const GatewayError& e) {
    CHECK(e.kind() == GatewayErrorKind::kConfig);
  }

  cfg.base_url = "http://127.0.0.1:59998";
  cfg.token_env = "SCENFORGE_TEST_MISSING_TOKEN";
  unsetenv("SCENFORGE_TEST_MISSING_TOKEN");
  try {
    (void)query_remote(cfg, "hi");
    FAIL("expected GatewayError");
  } catch (const GatewayError& e) {
    CHECK(e.kind() == GatewayErrorKind::kAuth);  // before any network activity
  }
}

TEST_CASE("query_remote reports a network failure after the attempt budget") {
  GatewayConfig cfg;
  cfg.base_url = "http://127.0.0.1:9";  // discard port: nothing listens here
  cfg.token_env = "SCENFORGE_TEST_TOKEN";
  cfg.timeout_seconds = 0.5;
  cfg.attempts = 2;
  setenv("SCENFORGE_TEST_TOKEN", "tok", 1);
  try {
    (void)query_remote(cfg, "hi");
    FAIL("expected GatewayError");
  } catch (const GatewayError& e) {
    CHECK(e.kind() == GatewayErrorKind::kNetwork);
    CHECK(std::string(e.what()).find("2 attempts") != std::string::npos);
  }
}

namespace {

// Local chat-completion stub; counts requests and records the last body.
struct StubServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;
  std::atomic<int> hits{0};
  std::string last_body;
  std::string reply;
  int status = 200;

  explicit StubServer(std::string reply_text, int status_code = 200)
      : reply(std::move(reply_text)), status(status_code) {
    server.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                               httplib::Response& res) {
      ++hits;
      last_body = req.body;
      if (status != 200) {
        res.status = status;
        res.set_content("denied", "text/plain");
        return;
      }
      nlohmann::json body;
      body["choices"] = nlohmann::json::array();
      body["choices"].push_back({{"message", {{"role", "assistant"}, {"content", reply}}}});
      res.set_content(body.dump(), "application/json");
    });
    port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~StubServer() {
    server.stop();
    thread.join();
  }
  GatewayConfig config() const {
    GatewayConfig cfg;
    cfg.base_url = "http://127.0.0.1:" + std::to_string(port);
    cfg.token_env = "SCENFORGE_TEST_TOKEN";
    return cfg;
  }
};

}  // namespace

TEST_CASE("query_remote returns the stubbed completion byte-identical") {
  const std::string doc = "scenario remote\nseed 5\nego: forward speed=10\n";
  StubServer stub(doc);
  setenv("SCENFORGE_TEST_TOKEN", "tok", 1);
  const std::string got = query_remote(stub.config(), "make a scene");
  CHECK(got == doc);
  CHECK(stub.hits == 1);
  // the request carried the chat-completion shape with our prompt
  auto body = nlohmann::json::parse(stub.last_body);
  CHECK(body.at("model").get<std::string>() == "default");
  CHECK(body.at("messages").at(0).at("role").get<std::string>() == "user");
  CHECK(body.at("messages").at(0).at("content").get<std::string>() == "make a scene");
}

TEST_CASE("query_remote maps HTTP 401 to an auth error") {
  StubServer stub("ignored", 401);
  setenv("SCENFORGE_TEST_TOKEN", "tok", 1);
  try {
    (void)query_remote(stub.config(), "hi");
    FAIL("expected GatewayError");
  } catch (const GatewayError& e) {
    CHECK(e.kind() == GatewayErrorKind::kAuth);
  }
}

TEST_CASE("query_remote flags an empty completion") {
  StubServer stub("");
  setenv("SCENFORGE_TEST_TOKEN", "tok", 1);
  try {
    (void)query_remote(stub.config(), "hi");
    FAIL("expected GatewayError");
  } catch (const GatewayError& e) {
    CHECK(e.kind() == GatewayErrorKind::kEmpty);
  }
}

TEST_CASE("match_intent handles the three showcased prompts exactly") {
  auto r1 = match_intent("on a rainy day, there is a car cut in");
  CHECK(r1.recognized);
  REQUIRE(r1.spec.agents.size() == 1);
  CHECK(r1.spec.agents[0].call.function == "cut_in");
  CHECK(r1.spec.environment.count("rain") == 1);

  auto r2 = match_intent("a person crosses the road on a rainy day");
  CHECK(r2.recognized);
  REQUIRE(r2.spec.agents.size() == 1);
  CHECK(r2.spec.agents[0].call.function == "pedestrian_cross");
  CHECK(r2.spec.agents[0].category == AgentCategory::kPedestrian);
  CHECK(r2.spec.environment.count("rain") == 1);

  auto r3 = match_intent("the ego car changes lane during the daytime");
  CHECK(r3.recognized);
  CHECK(r3.spec.ego.function.rfind("lane_change", 0) == 0);  // ego performs it
  CHECK(r3.spec.environment.count("daytime") == 1);
}

TEST_CASE("match_intent output always parses and validates") {
  const char* prompts[] = {
      "on a rainy day, there is a car cut in",
      "a person crosses the road on a rainy day",
      "the ego car changes lane during the daytime",
      "someone overtakes me at night",
      "the car in front brakes hard",
      "a pedestrian walks along the street",
      "nothing recognizable here at all",
      "u-turn on a sunny morning",
      "follow the leader",
      "",
  };
  for (const char* p : prompts) {
    auto r = match_intent(p);
    auto pr = dsl::parse(dsl::print_canonical(r.spec));
    REQUIRE(pr.ok());
    CHECK(*pr.spec == r.spec);
  }
}

TEST_CASE("match_intent is deterministic") {
  auto a = match_intent("a car cuts in at night");
  auto b = match_intent("a car cuts in at night");
  CHECK(a.spec == b.spec);
  CHECK(a.recognized == b.recognized);
  CHECK(a.matched_phrase == b.matched_phrase);
}
