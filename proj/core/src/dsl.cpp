#include "scenforge/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <sstream>

namespace scenforge::dsl {

namespace {

constexpr double kHalfPi = kPi / 2.0;
constexpr double kRangeEps = 1e-9;

ParamSpec num(std::string name, Interval range, double def) {
  ParamSpec p;
  p.name = std::move(name);
  p.type = ParamType::kNumber;
  p.range = range;
  p.default_number = def;
  return p;
}

ParamSpec angle(std::string name, Interval range, double def) {
  ParamSpec p;
  p.name = std::move(name);
  p.type = ParamType::kAngle;
  p.range = range;
  p.default_number = def;
  return p;
}

ParamSpec point(std::string name, Interval per_coord, Vec2 def) {
  ParamSpec p;
  p.name = std::move(name);
  p.type = ParamType::kPoint;
  p.range = per_coord;
  p.default_point = def;
  return p;
}

ParamSpec agent_ref(std::string name, std::string def) {
  ParamSpec p;
  p.name = std::move(name);
  p.type = ParamType::kAgentRef;
  p.default_text = std::move(def);
  return p;
}

ParamSpec choice(std::string name, std::vector<std::string> options, std::string def) {
  ParamSpec p;
  p.name = std::move(name);
  p.type = ParamType::kChoice;
  p.choices = std::move(options);
  p.default_text = std::move(def);
  return p;
}

std::vector<FunctionSig> build_registry() {
  std::vector<FunctionSig> r;
  auto add = [&r](std::string name, FunctionKind kind, bool reconstructed,
                  std::string summary, std::vector<ParamSpec> params) {
    FunctionSig s;
    s.name = std::move(name);
    s.kind = kind;
    s.params = std::move(params);
    s.reconstructed = reconstructed;
    s.summary = std::move(summary);
    r.push_back(std::move(s));
  };
  const auto veh = FunctionKind::kVehicleManeuver;
  const auto ped = FunctionKind::kPedestrianManeuver;
  const auto util = FunctionKind::kUtility;

  add("forward", veh, true, "drive straight at a roughly constant speed",
      {num("speed", {2.0, 15.0}, 10.0)});
  add("accelerate", veh, true, "ramp speed up to target_speed at a fixed rate",
      {num("speed", {2.0, 15.0}, 5.0), num("target_speed", {2.0, 15.0}, 12.0),
       num("rate", {0.5, 4.0}, 2.5)});
  add("brake", veh, true, "ramp speed down to target_speed at a fixed rate",
      {num("speed", {2.0, 15.0}, 10.0), num("target_speed", {0.0, 15.0}, 2.0),
       num("rate", {0.5, 6.0}, 2.5)});
  add("stop", veh, true, "brake to a standstill and hold",
      {num("speed", {2.0, 15.0}, 8.0), num("rate", {0.5, 6.0}, 2.5)});
  add("steer_left", veh, true, "hold a constant left yaw rate for a duration",
      {num("speed", {2.0, 15.0}, 8.0), num("yaw_rate", {0.05, 0.5}, 0.15),
       num("duration", {0.5, 10.0}, 3.0)});
  add("steer_right", veh, true, "hold a constant right yaw rate for a duration",
      {num("speed", {2.0, 15.0}, 8.0), num("yaw_rate", {0.05, 0.5}, 0.15),
       num("duration", {0.5, 10.0}, 3.0)});
  add("lane_change_left", veh, true, "move one lane to the left and keep going",
      {num("speed", {2.0, 15.0}, 10.0), num("offset", {2.5, 4.5}, 3.5)});
  add("lane_change_right", veh, true, "move one lane to the right and keep going",
      {num("speed", {2.0, 15.0}, 10.0), num("offset", {2.5, 4.5}, 3.5)});
  add("overtake", veh, true, "pass the target on the chosen side and merge back",
      {agent_ref("target", "ego"),
       choice("side", {"left", "right"}, "left"),
       num("offset", {2.5, 4.5}, 3.5)});
  add("follow", veh, true, "trail the target with a time-gap spacing controller",
      {agent_ref("target", "ego"), num("time_gap", {0.8, 3.0}, 1.5)});
  add("u_turn", veh, true, "sweep a half circle and return along the road",
      {num("speed", {2.0, 8.0}, 5.0), num("radius", {3.0, 15.0}, 6.0)});
  add("cut_in", veh, false, "spawn beside the target, merge into its lane ahead of it",
      {agent_ref("target", "ego"), num("safe_dis", {1.0, 100.0}, 10.0)});

  add("pedestrian_walk", ped, true, "walk along a fixed heading",
      {num("speed", {0.5, 2.0}, 1.2), angle("heading", {-kPi, kPi}, kHalfPi),
       point("start", {-100.0, 100.0}, {10.0, -8.0})});
  add("pedestrian_cross", ped, true, "cross the road ahead of the ego vehicle",
      {choice("direction", {"left", "right"}, "left"),
       num("speed", {0.5, 2.0}, 1.2), num("distance_ahead", {10.0, 60.0}, 25.0)});

  add("set_seed", util, false, "surface form of the 'seed' statement",
      {num("value", {0.0, 9007199254740992.0}, 0.0)});
  add("save_trajectories", util, false, "surface form of 'save trajectories <path>'", {});
  add("save_bev", util, false, "surface form of 'save bev <path>'", {});
  add("save_bundle", util, false, "surface form of 'save bundle <path>'", {});
  return r;
}

}  // namespace

const std::vector<FunctionSig>& registry() {
  static const std::vector<FunctionSig> r = build_registry();
  return r;
}

const FunctionSig* find_function(std::string_view name) {
  for (const auto& f : registry())
    if (f.name == name) return &f;
  return nullptr;
}

const ParamSpec* find_param(const FunctionSig& sig, std::string_view key) {
  for (const auto& p : sig.params)
    if (p.name == key) return &p;
  return nullptr;
}

ParamValue param_or_default(const ManeuverCall& call, const FunctionSig& sig,
                            std::string_view key) {
  if (auto it = call.params.find(std::string(key)); it != call.params.end())
    return it->second;
  const ParamSpec* p = find_param(sig, key);
  if (!p) throw std::invalid_argument("no parameter '" + std::string(key) +
                                      "' on function '" + sig.name + "'");
  ParamValue v;
  v.type = p->type;
  v.number = p->default_number;
  v.point = p->default_point;
  v.text = p->default_text;
  return v;
}

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

namespace {

struct Tok {
  enum Kind { kIdent, kNumber, kPunct, kEnd } kind = kEnd;
  std::string text;
  int col = 0;  // 1-based
  double num = 0.0;
  bool deg = false;
  bool plain_uint = false;  // digits only: usable as a seed
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return c >= '0' && c <= '9'; }

struct Lexer {
  std::string_view line;
  int line_no;
  std::vector<Diagnostic>* diags;

  std::vector<Tok> run() {
    std::vector<Tok> out;
    std::size_t i = 0;
    while (i < line.size()) {
      char c = line[i];
      if (c == ' ' || c == '\t') {
        ++i;
        continue;
      }
      if (c == '#') break;  // comment to end of line
      int col = static_cast<int>(i) + 1;
      if (ident_start(c)) {
        std::size_t j = i;
        while (j < line.size() && ident_char(line[j])) ++j;
        out.push_back({Tok::kIdent, std::string(line.substr(i, j - i)), col});
        i = j;
        continue;
      }
      if (digit(c) || ((c == '-' || c == '+' || c == '.') && i + 1 < line.size() &&
                       (digit(line[i + 1]) ||
                        (line[i + 1] == '.' && i + 2 < line.size() && digit(line[i + 2]))))) {
        if (lex_number(i, col, out)) continue;
        return out;  // malformed number: line abandoned
      }
      if (c == ':' || c == '=' || c == '(' || c == ')' || c == ',') {
        out.push_back({Tok::kPunct, std::string(1, c), col});
        ++i;
        continue;
      }
      diags->push_back({line_no, col, std::string("unexpected character '") + c + "'"});
      ++i;
    }
    out.push_back({Tok::kEnd, "", static_cast<int>(line.size()) + 1});
    return out;
  }

  bool lex_number(std::size_t& i, int col, std::vector<Tok>& out) {
    std::size_t j = i;
    bool negative = false;
    if (line[j] == '+' || line[j] == '-') {
      negative = line[j] == '-';
      ++j;
    }
    std::size_t digits_begin = j;
    bool any_digits = false, has_dot = false, has_exp = false;
    while (j < line.size()) {
      char c = line[j];
      if (digit(c)) {
        any_digits = true;
        ++j;
      } else if (c == '.' && !has_dot && !has_exp) {
        has_dot = true;
        ++j;
      } else if ((c == 'e' || c == 'E') && any_digits && !has_exp &&
                 j + 1 < line.size() &&
                 (digit(line[j + 1]) ||
                  ((line[j + 1] == '+' || line[j + 1] == '-') && j + 2 < line.size() &&
                   digit(line[j + 2])))) {
        has_exp = true;
        ++j;
        if (line[j] == '+' || line[j] == '-') ++j;
      } else {
        break;
      }
    }
    if (!any_digits) {
      diags->push_back({line_no, col, "malformed number"});
      return false;
    }
    double value = 0.0;
    auto text = line.substr(digits_begin, j - digits_begin);
    auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
      diags->push_back({line_no, col, "malformed number"});
      return false;
    }
    if (negative) value = -value;
    Tok t{Tok::kNumber, std::string(line.substr(i, j - i)), col};
    t.num = value;
    t.plain_uint = !negative && !has_dot && !has_exp && line[i] != '+';
    // optional 'deg' suffix, attached directly to the number
    if (j + 2 < line.size() + 1 && line.substr(j, 3) == "deg" &&
        (j + 3 >= line.size() || !ident_char(line[j + 3]))) {
      t.deg = true;
      t.text += "deg";
      j += 3;
    } else if (j < line.size() && ident_start(line[j])) {
      diags->push_back({line_no, static_cast<int>(j) + 1,
                        "unexpected text after number (only a 'deg' suffix is allowed)"});
      return false;
    }
    out.push_back(std::move(t));
    i = j;
    return true;
  }
};

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

struct PendingRef {
  std::string performer;  // "ego" or agent id
  std::string key;
  std::string value;
  int line = 0, col = 0;
};

struct Parser {
  ScenarioSpec spec;
  std::vector<Diagnostic> diags;
  std::vector<PendingRef> refs;
  std::vector<std::pair<std::string, int>> agent_lines;  // id -> decl line
  bool saw_scenario = false, saw_seed = false, saw_ego = false;
  bool hard_error = false;

  void error(int line, int col, std::string msg) {
    diags.push_back({line, col, std::move(msg)});
    hard_error = true;
  }

  void parse_document(std::string_view text) {
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      std::size_t nl = text.find('\n', pos);
      std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos
                                                                            : nl - pos);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      ++line_no;
      parse_line(line, line_no);
      if (nl == std::string_view::npos) break;
      pos = nl + 1;
    }
    finish();
  }

  void parse_line(std::string_view line, int line_no) {
    // Fast check for blank/comment lines.
    std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string_view::npos || line[first] == '#') return;

    // 'save' takes a path, which is not lexable as an identifier; handle the
    // whole statement with word splitting instead.
    if (line.substr(first, 4) == "save" &&
        (first + 4 == line.size() || line[first + 4] == ' ' || line[first + 4] == '\t' ||
         line[first + 4] == '#')) {
      parse_save(line, line_no, first);
      return;
    }

    std::size_t before = diags.size();
    Lexer lx{line, line_no, &diags};
    std::vector<Tok> toks = lx.run();
    if (diags.size() != before) {
      hard_error = true;
      return;
    }
    std::size_t i = 0;
    const Tok& head = toks[i];
    if (head.kind != Tok::kIdent) {
      error(line_no, head.col, "expected a statement keyword");
      return;
    }
    if (head.text == "scenario") {
      ++i;
      if (toks[i].kind != Tok::kIdent) {
        error(line_no, toks[i].col, "expected scenario name");
        return;
      }
      if (saw_scenario) {
        error(line_no, head.col, "duplicate 'scenario' statement");
        return;
      }
      saw_scenario = true;
      spec.name = toks[i].text;
      expect_end(toks, i + 1, line_no);
    } else if (head.text == "seed") {
      ++i;
      if (toks[i].kind != Tok::kNumber || !toks[i].plain_uint) {
        error(line_no, toks[i].col, "expected a non-negative integer seed");
        return;
      }
      if (saw_seed) {
        error(line_no, head.col, "duplicate 'seed' statement");
        return;
      }
      saw_seed = true;
      std::uint64_t v = 0;
      auto res = std::from_chars(toks[i].text.data(), toks[i].text.data() + toks[i].text.size(), v);
      if (res.ec != std::errc()) {
        error(line_no, toks[i].col, "seed does not fit in 64 bits");
        return;
      }
      spec.seed = v;
      expect_end(toks, i + 1, line_no);
    } else if (head.text == "env") {
      ++i;
      if (toks[i].kind != Tok::kIdent) {
        error(line_no, toks[i].col, "expected at least one environment tag");
        return;
      }
      while (toks[i].kind == Tok::kIdent) {
        spec.environment.insert(toks[i].text);
        ++i;
      }
      expect_end(toks, i, line_no);
    } else if (head.text == "ego") {
      ++i;
      if (!expect_punct(toks, i, ":", line_no)) return;
      if (saw_ego) {
        error(line_no, head.col, "duplicate 'ego' statement");
        return;
      }
      saw_ego = true;
      ManeuverCall call;
      if (!parse_call(toks, i, line_no, "ego", FunctionKind::kVehicleManeuver, call)) return;
      spec.ego = std::move(call);
    } else if (head.text == "agent") {
      ++i;
      if (toks[i].kind != Tok::kIdent) {
        error(line_no, toks[i].col, "expected agent id");
        return;
      }
      AgentDecl decl;
      decl.id = toks[i].text;
      int id_col = toks[i].col;
      ++i;
      if (!expect_punct(toks, i, ":", line_no)) return;
      if (toks[i].kind != Tok::kIdent ||
          (toks[i].text != "vehicle" && toks[i].text != "pedestrian")) {
        error(line_no, toks[i].col, "expected agent category 'vehicle' or 'pedestrian'");
        return;
      }
      decl.category = toks[i].text == "vehicle" ? AgentCategory::kVehicle
                                                : AgentCategory::kPedestrian;
      ++i;
      if (decl.id == "ego") {
        error(line_no, id_col, "'ego' is reserved and cannot be used as an agent id");
        return;
      }
      for (const auto& [id, ln] : agent_lines) {
        if (id == decl.id) {
          error(line_no, id_col, "duplicate agent id '" + decl.id + "' (first declared on line " +
                                     std::to_string(ln) + ")");
          return;
        }
      }
      const auto want = decl.category == AgentCategory::kVehicle
                            ? FunctionKind::kVehicleManeuver
                            : FunctionKind::kPedestrianManeuver;
      if (!parse_call(toks, i, line_no, decl.id, want, decl.call)) return;
      agent_lines.emplace_back(decl.id, line_no);
      spec.agents.push_back(std::move(decl));
    } else {
      error(line_no, head.col, "unknown statement '" + head.text + "'");
    }
  }

  bool expect_punct(const std::vector<Tok>& toks, std::size_t& i, std::string_view p, int line_no) {
    if (toks[i].kind != Tok::kPunct || toks[i].text != p) {
      error(line_no, toks[i].col, "expected '" + std::string(p) + "'");
      return false;
    }
    ++i;
    return true;
  }

  void expect_end(const std::vector<Tok>& toks, std::size_t i, int line_no) {
    if (toks[i].kind != Tok::kEnd)
      error(line_no, toks[i].col, "unexpected trailing text");
  }

  bool parse_call(const std::vector<Tok>& toks, std::size_t& i, int line_no,
                  const std::string& performer, FunctionKind want, ManeuverCall& out) {
    if (toks[i].kind != Tok::kIdent) {
      error(line_no, toks[i].col, "expected function name");
      return false;
    }
    const std::string fn = toks[i].text;
    const int fn_col = toks[i].col;
    ++i;
    const FunctionSig* sig = find_function(fn);
    if (!sig) {
      error(line_no, fn_col, "unknown function '" + fn + "'");
      return false;
    }
    if (sig->kind == FunctionKind::kUtility) {
      error(line_no, fn_col, "'" + fn + "' is a directive, not callable as a maneuver");
      return false;
    }
    if (sig->kind != want) {
      const char* need = want == FunctionKind::kVehicleManeuver ? "a vehicle" : "a pedestrian";
      error(line_no, fn_col, "function '" + fn + "' cannot be performed by " +
                                 (performer == "ego" ? std::string("the ego vehicle")
                                                     : need + std::string(" agent")));
      return false;
    }
    out.function = fn;
    while (toks[i].kind == Tok::kIdent) {
      const std::string key = toks[i].text;
      const int key_col = toks[i].col;
      ++i;
      if (!expect_punct(toks, i, "=", line_no)) return false;
      const ParamSpec* ps = find_param(*sig, key);
      if (!ps) {
        error(line_no, key_col, "unknown parameter '" + key + "' for function '" + fn + "'");
        return false;
      }
      if (out.params.count(key)) {
        error(line_no, key_col, "duplicate parameter '" + key + "'");
        return false;
      }
      ParamValue val;
      if (!parse_value(toks, i, line_no, *ps, performer, key, val)) return false;
      out.params.emplace(key, std::move(val));
    }
    if (toks[i].kind != Tok::kEnd) {
      error(line_no, toks[i].col, "expected 'key=value' or end of line");
      return false;
    }
    return true;
  }

  bool parse_value(const std::vector<Tok>& toks, std::size_t& i, int line_no,
                   const ParamSpec& ps, const std::string& performer, const std::string& key,
                   ParamValue& out) {
    out.type = ps.type;
    switch (ps.type) {
      case ParamType::kNumber:
      case ParamType::kAngle: {
        if (toks[i].kind != Tok::kNumber) {
          error(line_no, toks[i].col, "parameter '" + key + "' expects a number");
          return false;
        }
        if (toks[i].deg && ps.type == ParamType::kNumber) {
          error(line_no, toks[i].col, "'deg' suffix is only valid on angle parameters");
          return false;
        }
        double v = toks[i].num;
        if (toks[i].deg) v = deg_to_rad(v);
        if (v < ps.range.lo - kRangeEps || v > ps.range.hi + kRangeEps) {
          error(line_no, toks[i].col,
                "parameter '" + key + "' value " + format_double(v) + " out of range [" +
                    format_double(ps.range.lo) + ", " + format_double(ps.range.hi) + "]");
          return false;
        }
        out.number = v;
        ++i;
        return true;
      }
      case ParamType::kPoint: {
        if (!expect_punct(toks, i, "(", line_no)) return false;
        double coords[2];
        for (int k = 0; k < 2; ++k) {
          if (toks[i].kind != Tok::kNumber || toks[i].deg) {
            error(line_no, toks[i].col, "parameter '" + key + "' expects a point '(x,y)'");
            return false;
          }
          coords[k] = toks[i].num;
          if (coords[k] < ps.range.lo - kRangeEps || coords[k] > ps.range.hi + kRangeEps) {
            error(line_no, toks[i].col,
                  "parameter '" + key + "' coordinate " + format_double(coords[k]) +
                      " out of range [" + format_double(ps.range.lo) + ", " +
                      format_double(ps.range.hi) + "]");
            return false;
          }
          ++i;
          if (k == 0 && !expect_punct(toks, i, ",", line_no)) return false;
        }
        if (!expect_punct(toks, i, ")", line_no)) return false;
        out.point = {coords[0], coords[1]};
        return true;
      }
      case ParamType::kAgentRef: {
        if (toks[i].kind != Tok::kIdent) {
          error(line_no, toks[i].col, "parameter '" + key + "' expects an agent id");
          return false;
        }
        out.text = toks[i].text;
        refs.push_back({performer, key, out.text, line_no, toks[i].col});
        ++i;
        return true;
      }
      case ParamType::kChoice: {
        if (toks[i].kind != Tok::kIdent) {
          error(line_no, toks[i].col, "parameter '" + key + "' expects one of: " + choices_list(ps));
          return false;
        }
        if (std::find(ps.choices.begin(), ps.choices.end(), toks[i].text) == ps.choices.end()) {
          error(line_no, toks[i].col, "parameter '" + key + "' value '" + toks[i].text +
                                          "' is not one of: " + choices_list(ps));
          return false;
        }
        out.text = toks[i].text;
        ++i;
        return true;
      }
    }
    return false;
  }

  static std::string choices_list(const ParamSpec& ps) {
    std::string s;
    for (std::size_t k = 0; k < ps.choices.size(); ++k) {
      if (k) s += ", ";
      s += ps.choices[k];
    }
    return s;
  }

  void parse_save(std::string_view line, int line_no, std::size_t first) {
    // word split with column tracking
    std::vector<std::pair<std::string, int>> words;
    std::size_t i = first;
    while (i < line.size()) {
      if (line[i] == ' ' || line[i] == '\t') {
        ++i;
        continue;
      }
      if (line[i] == '#') break;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '#') ++j;
      words.emplace_back(std::string(line.substr(i, j - i)), static_cast<int>(i) + 1);
      i = j;
    }
    auto kind_of = [](const std::string& w) -> std::optional<SaveKind> {
      if (w == "all") return SaveKind::kAll;
      if (w == "trajectories") return SaveKind::kTrajectories;
      if (w == "bev") return SaveKind::kBev;
      if (w == "bundle") return SaveKind::kBundle;
      return std::nullopt;
    };
    SaveDirective d;
    std::size_t path_idx = 1;
    if (words.size() >= 2) {
      if (auto k = kind_of(words[1].first)) {
        d.kind = *k;
        path_idx = 2;
      }
    }
    if (words.size() <= path_idx) {
      error(line_no, static_cast<int>(line.size()) + 1, "missing output path after 'save'");
      return;
    }
    if (words.size() > path_idx + 1) {
      error(line_no, words[path_idx + 1].second, "unexpected text after output path");
      return;
    }
    d.path = words[path_idx].first;
    spec.outputs.push_back(std::move(d));
  }

  void finish() {
    if (!saw_ego) diags.push_back({0, 0, "missing 'ego' statement"}), hard_error = true;

    auto declared = [this](const std::string& id) {
      if (id == "ego") return true;
      for (const auto& a : spec.agents)
        if (a.id == id) return true;
      return false;
    };
    for (const auto& r : refs) {
      if (!declared(r.value)) {
        diags.push_back({r.line, r.col, "unresolved target '" + r.value + "'"});
        hard_error = true;
      } else if (r.value == r.performer) {
        diags.push_back({r.line, r.col, "agent '" + r.performer + "' targets itself"});
        hard_error = true;
      }
    }
    // Effective (defaulted) targets must not be self-references either; this
    // catches 'ego: cut_in' where target defaults to ego.
    if (saw_ego && !spec.ego.function.empty()) {
      if (const FunctionSig* sig = find_function(spec.ego.function)) {
        for (const auto& ps : sig->params) {
          if (ps.type != ParamType::kAgentRef) continue;
          if (spec.ego.params.count(ps.name)) continue;  // explicit: checked above
          if (ps.default_text == "ego") {
            diags.push_back({0, 0, "ego's '" + spec.ego.function + "' needs an explicit '" +
                                       ps.name + "' (the default would target ego itself)"});
            hard_error = true;
          }
        }
      }
    }
  }
};

std::string save_kind_word(SaveKind k) {
  switch (k) {
    case SaveKind::kAll: return "all";
    case SaveKind::kTrajectories: return "trajectories";
    case SaveKind::kBev: return "bev";
    case SaveKind::kBundle: return "bundle";
  }
  return "all";
}

void print_value(std::string& out, const ParamValue& v) {
  switch (v.type) {
    case ParamType::kNumber:
    case ParamType::kAngle:
      out += format_double(v.number);
      break;
    case ParamType::kPoint:
      out += "(" + format_double(v.point.x) + "," + format_double(v.point.y) + ")";
      break;
    case ParamType::kAgentRef:
    case ParamType::kChoice:
      out += v.text;
      break;
  }
}

void print_call(std::string& out, const ManeuverCall& call) {
  out += call.function;
  for (const auto& [key, val] : call.params) {
    out += " " + key + "=";
    print_value(out, val);
  }
}

}  // namespace

ParseResult parse(std::string_view text) {
  Parser p;
  p.parse_document(text);
  ParseResult r;
  r.diagnostics = std::move(p.diags);
  if (!p.hard_error) r.spec = std::move(p.spec);
  return r;
}

std::string print_canonical(const ScenarioSpec& spec) {
  std::string out;
  out += "scenario " + spec.name + "\n";
  out += "seed " + std::to_string(spec.seed) + "\n";
  if (!spec.environment.empty()) {
    out += "env";
    for (const auto& tag : spec.environment) out += " " + tag;
    out += "\n";
  }
  out += "ego: ";
  print_call(out, spec.ego);
  out += "\n";
  for (const auto& a : spec.agents) {
    out += "agent " + a.id + ": " + std::string(scenforge::to_string(a.category)) + " ";
    print_call(out, a.call);
    out += "\n";
  }
  for (const auto& s : spec.outputs)
    out += "save " + save_kind_word(s.kind) + " " + s.path + "\n";
  return out;
}

std::string to_string(const Diagnostic& d) {
  return "line " + std::to_string(d.line) + ", col " + std::to_string(d.column) + ": " + d.message;
}

}  // namespace scenforge::dsl
