#include "scene4d/director/director.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>

#include "scene4d/core/error.hpp"
#include "scene4d/director/embedded_data.hpp"

namespace scene4d {

namespace {

using nlohmann::json;

[[noreturn]] void reject(const std::string& why) { throw InputFormatError("response rejected: " + why); }

double finite_number(const json& j, const char* key) {
  if (!j.contains(key)) reject(std::string("missing '") + key + "'");
  const json& v = j.at(key);
  if (!v.is_number()) reject(std::string("'") + key + "' is not a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) reject(std::string("'") + key + "' is not finite");
  return d;
}

Vec3 vec3(const json& j, const char* key) {
  if (!j.contains(key)) reject(std::string("missing '") + key + "'");
  const json& v = j.at(key);
  if (!v.is_array() || v.size() != 3) reject(std::string("'") + key + "' is not a 3-vector");
  Vec3 out;
  for (int i = 0; i < 3; ++i) {
    if (!v[static_cast<std::size_t>(i)].is_number()) reject(std::string("'") + key + "' has a non-numeric entry");
    out[i] = v[static_cast<std::size_t>(i)].get<double>();
    if (!std::isfinite(out[i])) reject(std::string("'") + key + "' is not finite");
  }
  return out;
}

std::string nonempty_string(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string()) reject(std::string("'") + key + "' is not a string");
  std::string s = j.at(key).get<std::string>();
  if (s.empty()) reject(std::string("'") + key + "' is empty");
  return s;
}

void only_keys(const json& j, std::initializer_list<const char*> allowed, const char* what) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; })) {
      reject(std::string("unexpected key '") + it.key() + "' in " + what);
    }
  }
}

json parse_json_object(const std::string& text) {
  const auto begin = text.find('{');
  const auto end = text.rfind('}');
  if (begin == std::string::npos || end == std::string::npos || end < begin) reject("no JSON object found");
  try {
    return json::parse(text.substr(begin, end - begin + 1));
  } catch (const json::exception& e) {
    reject(std::string("invalid JSON: ") + e.what());
  }
}

json vec_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string brief_system_prompt() {
  std::ostringstream os;
  os << "You plan short animated scenes with one or two objects. Reply with one JSON object that satisfies "
        "this JSON schema:\n"
     << scene_brief_schema()
     << "\nName each entity with a short noun and give it a standalone text prompt. Exactly one entity is the "
        "anchor; it stays at the world origin and does not move. relative_scale is each entity's size "
        "relative to the anchor, so the anchor has 1.";
  return os.str();
}

std::string trajectory_system_prompt() {
  std::ostringstream os;
  os << "You design the motion of one object relative to a fixed anchor at the world origin. +z is up and "
        "gravity is (0, 0, -9.8) m/s^2 scaled to scene units. Choose one kinematic template and reply with one "
        "JSON object that satisfies this JSON schema:\n"
     << trajectory_schema()
     << "\nconstant_velocity and projectile use initial_position, initial_velocity and acceleration "
        "(acceleration is zero for constant_velocity). circular uses center, radius, angular_velocity (rad/s) "
        "and phase, moving in the horizontal plane. Units are scene units and seconds.";
  return os.str();
}

std::string trajectory_user_prompt(const SceneBrief& brief, double anchor_extent) {
  const EntitySpec* moving = brief.moving_entity();
  std::ostringstream os;
  os << "Scene: " << brief.scene_prompt << "\nMoving entity: " << (moving ? moving->name : "") << " (relative scale "
     << (moving ? moving->relative_scale : 1.0) << ")\nAnchor: " << brief.anchor_entity << ", about "
     << anchor_extent << " scene units across, centered at the origin.";
  return os.str();
}

std::optional<TrajectoryProposal> query_trajectory(ChatClient& client, const ChatRequest& request,
                                                   const DirectorConfig& config) {
  for (int attempt = 0; attempt < config.retries; ++attempt) {
    try {
      TrajectoryProposal p = parse_trajectory_response(client.complete(request));
      p.source = "llm";
      return p;
    } catch (const InputFormatError&) {
    } catch (const NetworkError&) {
    }
  }
  return std::nullopt;
}

}  // namespace

const EntitySpec& SceneBrief::anchor() const {
  for (const auto& e : entities) {
    if (e.name == anchor_entity) return e;
  }
  throw ContractError("brief has no anchor entity");
}

const EntitySpec* SceneBrief::moving_entity() const {
  for (const auto& e : entities) {
    if (e.name != anchor_entity) return &e;
  }
  return nullptr;
}

void validate(const SceneBrief& brief) {
  if (brief.entities.empty() || brief.entities.size() > 2) throw ContractError("a brief holds one or two entities");
  std::set<std::string> names;
  int anchors = 0;
  for (const auto& e : brief.entities) {
    if (e.name.empty() || e.entity_prompt.empty()) throw ContractError("entity name and prompt must be non-empty");
    if (!names.insert(e.name).second) throw ContractError("duplicate entity '" + e.name + "'");
    if (!(e.relative_scale > 0.0) || !std::isfinite(e.relative_scale)) throw ContractError("entity scale must be positive");
    if (e.name == brief.anchor_entity) ++anchors;
  }
  if (anchors != 1) throw ContractError("exactly one anchor entity is required");
  if (brief.anchor().moving) throw ContractError("the anchor entity does not move");
}

Trajectory to_trajectory(const TrajectoryProposal& p) {
  const double t = p.duration_seconds;
  Trajectory traj;
  if (p.template_name == "constant_velocity") {
    traj = Trajectory::ballistic(p.initial_position, p.initial_velocity * t, Vec3::Zero());
  } else if (p.template_name == "projectile") {
    traj = Trajectory::ballistic(p.initial_position, p.initial_velocity * t, p.acceleration * (t * t));
  } else if (p.template_name == "circular") {
    traj = Trajectory::circular(p.center, p.radius, p.angular_velocity * t, p.phase);
  } else {
    throw ContractError("unknown trajectory template '" + p.template_name + "'");
  }
  validate(traj);
  return traj;
}

const std::map<std::string, double>& entity_scale_table() {
  static const std::map<std::string, double> table = [] {
    std::map<std::string, double> t;
    const json j = json::parse(embedded::kEntityScales);
    for (auto it = j.at("entities").begin(); it != j.at("entities").end(); ++it) t[it.key()] = it.value().get<double>();
    return t;
  }();
  return table;
}

std::vector<std::string> find_entities(const std::string& prompt) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : lowercase(prompt)) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      cur += c;
    } else if (!cur.empty()) {
      words.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(cur);

  const auto& table = entity_scale_table();
  auto lookup = [&](const std::string& w) -> std::optional<std::string> {
    if (table.count(w)) return w;
    if (w.size() > 1 && w.back() == 's' && table.count(w.substr(0, w.size() - 1))) return w.substr(0, w.size() - 1);
    if (w.size() > 2 && w.ends_with("es") && table.count(w.substr(0, w.size() - 2))) return w.substr(0, w.size() - 2);
    return std::nullopt;
  };
  std::vector<std::string> found;
  for (std::size_t i = 0; i < words.size(); ++i) {
    std::optional<std::string> hit;
    if (i + 1 < words.size()) hit = lookup(words[i] + " " + words[i + 1]);
    if (hit) {
      ++i;
    } else {
      hit = lookup(words[i]);
    }
    if (hit && std::find(found.begin(), found.end(), *hit) == found.end()) found.push_back(*hit);
  }
  return found;
}

SceneBrief offline_decompose(const std::string& scene_prompt) {
  if (scene_prompt.empty()) throw ContractError("scene prompt is empty");
  const auto names = find_entities(scene_prompt);
  if (names.empty()) throw UnresolvedEntityError("no known entity in '" + scene_prompt + "'");
  if (names.size() > 2) throw ContractError("scenes hold at most two entities");
  const auto& table = entity_scale_table();
  SceneBrief brief;
  brief.scene_prompt = scene_prompt;
  brief.anchor_entity = names.back();
  const double anchor_size = table.at(brief.anchor_entity);
  for (const auto& n : names) {
    brief.entities.push_back({n, "a " + n, table.at(n) / anchor_size, n != brief.anchor_entity});
  }
  brief.source = "offline";
  validate(brief);
  return brief;
}

SceneBrief decompose(const std::string& scene_prompt, ChatClient* client, const DirectorConfig& config) {
  if (scene_prompt.empty()) throw ContractError("scene prompt is empty");
  if (client != nullptr) {
    const ChatRequest req{brief_system_prompt(), "Scene: " + scene_prompt};
    for (int attempt = 0; attempt < config.retries; ++attempt) {
      try {
        SceneBrief b = parse_brief_response(scene_prompt, client->complete(req));
        b.source = "llm";
        return b;
      } catch (const InputFormatError&) {
      } catch (const NetworkError&) {
      }
    }
  }
  return offline_decompose(scene_prompt);
}

TrajectoryProposal offline_trajectory(double anchor_extent) {
  TrajectoryProposal p;
  p.template_name = "constant_velocity";
  p.initial_position = Vec3(-3.0, 0.0, 0.5) * anchor_extent;
  p.initial_velocity = Vec3::Zero() - p.initial_position;
  p.duration_seconds = 1.0;
  p.rationale = "straight-line approach toward the anchor";
  p.source = "offline";
  return p;
}

TrajectoryProposal propose_trajectory(const SceneBrief& brief, ChatClient* client, const DirectorConfig& config,
                                      double anchor_extent) {
  validate(brief);
  if (brief.moving_entity() == nullptr) throw ContractError("brief has no moving entity");
  if (client != nullptr) {
    const ChatRequest req{trajectory_system_prompt(), trajectory_user_prompt(brief, anchor_extent)};
    if (auto p = query_trajectory(*client, req, config)) return *p;
  }
  return offline_trajectory(anchor_extent);
}

RefineResult refine(const TrajectoryProposal& proposal, const SceneBrief& brief, const GaussianObject& moving,
                    std::span<const std::vector<Vec3>> others, ChatClient* client, const DirectorConfig& config) {
  std::optional<RefineResult> best;
  TrajectoryProposal candidate = proposal;
  int tried = 0;
  for (int round = 0; round <= config.max_requeries; ++round) {
    ++tried;
    std::optional<TruncationResult> checked;
    try {
      checked = check_and_truncate(to_trajectory(candidate), moving, others, config.collision);
    } catch (const UnrecoverablePlacementError&) {
    }
    if (checked && (!best || checked->trajectory.t_max > best->trajectory.t_max)) {
      best = RefineResult{checked->trajectory, candidate, checked->report, 0};
    }
    if (checked && !checked->report.requery_recommended) break;
    if (client == nullptr || round == config.max_requeries) break;

    std::ostringstream os;
    os << trajectory_user_prompt(brief, 1.0) << "\nThe previous proposal " << to_json(candidate).dump();
    if (checked) {
      os << " collides with the anchor at normalized time " << checked->report.first_collision_t.value_or(1.0)
         << ", leaving only " << checked->trajectory.t_max << " of the motion.";
    } else {
      os << " starts inside the anchor.";
    }
    os << " Propose a different trajectory that avoids an early collision.";
    auto next = query_trajectory(*client, {trajectory_system_prompt(), os.str()}, config);
    if (!next) break;
    candidate = *next;
  }
  if (!best) throw UnrecoverablePlacementError("every trajectory candidate collides at t = 0");
  best->candidates = tried;
  return *best;
}

SceneBrief brief_from_json(const json& j, const std::string& scene_prompt) {
  if (!j.is_object()) reject("brief is not an object");
  only_keys(j, {"entities", "anchor", "scene_prompt", "source"}, "brief");
  if (!j.contains("entities") || !j.at("entities").is_array()) reject("'entities' is not an array");
  const json& ents = j.at("entities");
  if (ents.empty() || ents.size() > 2) reject("one or two entities are required");
  SceneBrief brief;
  brief.scene_prompt = scene_prompt;
  brief.anchor_entity = nonempty_string(j, "anchor");
  for (const json& e : ents) {
    if (!e.is_object()) reject("entity is not an object");
    only_keys(e, {"name", "prompt", "relative_scale", "moving"}, "entity");
    EntitySpec spec;
    spec.name = nonempty_string(e, "name");
    spec.entity_prompt = nonempty_string(e, "prompt");
    spec.relative_scale = finite_number(e, "relative_scale");
    if (!(spec.relative_scale > 0.0)) reject("relative_scale must be positive");
    if (!e.contains("moving") || !e.at("moving").is_boolean()) reject("'moving' is not a boolean");
    spec.moving = e.at("moving").get<bool>();
    brief.entities.push_back(spec);
  }
  try {
    validate(brief);
  } catch (const ContractError& e) {
    reject(e.what());
  }
  const double anchor_scale = brief.anchor().relative_scale;
  for (auto& e : brief.entities) e.relative_scale /= anchor_scale;
  if (j.contains("source") && j.at("source").is_string()) brief.source = j.at("source").get<std::string>();
  return brief;
}

TrajectoryProposal proposal_from_json(const json& j) {
  if (!j.is_object()) reject("proposal is not an object");
  TrajectoryProposal p;
  p.template_name = nonempty_string(j, "template");
  if (!j.contains("parameters") || !j.at("parameters").is_object()) reject("'parameters' is not an object");
  const json& params = j.at("parameters");
  if (p.template_name == "constant_velocity" || p.template_name == "projectile") {
    p.initial_position = vec3(params, "initial_position");
    p.initial_velocity = vec3(params, "initial_velocity");
    if (p.template_name == "projectile") {
      p.acceleration = vec3(params, "acceleration");
    } else if (params.contains("acceleration") && !vec3(params, "acceleration").isZero(0.0)) {
      reject("constant_velocity takes no acceleration");
    }
  } else if (p.template_name == "circular") {
    p.center = vec3(params, "center");
    p.radius = finite_number(params, "radius");
    if (!(p.radius > 0.0)) reject("radius must be positive");
    p.angular_velocity = finite_number(params, "angular_velocity");
    if (params.contains("phase")) p.phase = finite_number(params, "phase");
  } else {
    reject("unknown template '" + p.template_name + "'");
  }
  p.duration_seconds = finite_number(j, "duration_seconds");
  if (!(p.duration_seconds > 0.0)) reject("duration_seconds must be positive");
  if (j.contains("rationale")) {
    if (!j.at("rationale").is_string()) reject("'rationale' is not a string");
    p.rationale = j.at("rationale").get<std::string>();
  }
  try {
    to_trajectory(p);
  } catch (const ContractError& e) {
    reject(e.what());
  }
  return p;
}

SceneBrief parse_brief_response(const std::string& scene_prompt, const std::string& text) {
  return brief_from_json(parse_json_object(text), scene_prompt);
}

TrajectoryProposal parse_trajectory_response(const std::string& text) {
  return proposal_from_json(parse_json_object(text));
}

json to_json(const SceneBrief& brief) {
  json j;
  j["scene_prompt"] = brief.scene_prompt;
  j["anchor"] = brief.anchor_entity;
  j["source"] = brief.source;
  j["entities"] = json::array();
  for (const auto& e : brief.entities) {
    j["entities"].push_back(
        {{"name", e.name}, {"prompt", e.entity_prompt}, {"relative_scale", e.relative_scale}, {"moving", e.moving}});
  }
  return j;
}

json to_json(const TrajectoryProposal& p) {
  json j;
  j["template"] = p.template_name;
  if (p.template_name == "circular") {
    j["parameters"] = {{"center", vec_json(p.center)},
                       {"radius", p.radius},
                       {"angular_velocity", p.angular_velocity},
                       {"phase", p.phase}};
  } else {
    j["parameters"] = {{"initial_position", vec_json(p.initial_position)},
                       {"initial_velocity", vec_json(p.initial_velocity)},
                       {"acceleration", vec_json(p.acceleration)}};
  }
  j["duration_seconds"] = p.duration_seconds;
  j["rationale"] = p.rationale;
  return j;
}

json to_json(const Trajectory& traj) {
  json j;
  j["template"] = traj.template_name();
  j["t_max"] = traj.t_max;
  if (const auto* b = std::get_if<BallisticMotion>(&traj.motion)) {
    j["initial_position"] = vec_json(b->initial_position);
    j["initial_velocity"] = vec_json(b->initial_velocity);
    j["acceleration"] = vec_json(b->acceleration);
  } else {
    const auto& c = std::get<CircularMotion>(traj.motion);
    j["center"] = vec_json(c.center);
    j["radius"] = c.radius;
    j["angular_velocity"] = c.angular_velocity;
    j["phase"] = c.phase;
  }
  return j;
}

Trajectory trajectory_from_json(const json& j) {
  try {
    if (!j.is_object()) reject("trajectory is not an object");
    const std::string name = nonempty_string(j, "template");
    Trajectory traj;
    if (name == "circular") {
      traj = Trajectory::circular(vec3(j, "center"), finite_number(j, "radius"), finite_number(j, "angular_velocity"),
                                  finite_number(j, "phase"), finite_number(j, "t_max"));
    } else if (name == "constant_velocity" || name == "projectile") {
      traj = Trajectory::ballistic(vec3(j, "initial_position"), vec3(j, "initial_velocity"), vec3(j, "acceleration"),
                                   finite_number(j, "t_max"));
    } else {
      reject("unknown template '" + name + "'");
    }
    validate(traj);
    return traj;
  } catch (const ContractError& e) {
    throw InputFormatError(e.what());
  }
}

const char* scene_brief_schema() { return embedded::kSceneBriefSchema; }
const char* trajectory_schema() { return embedded::kTrajectorySchema; }

}  // namespace scene4d
