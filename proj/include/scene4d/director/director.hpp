#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "scene4d/core/object.hpp"
#include "scene4d/director/client.hpp"
#include "scene4d/trajectory/collision.hpp"

namespace scene4d {

struct EntitySpec {
  std::string name;
  std::string entity_prompt;
  double relative_scale = 1.0;
  bool moving = false;
};

struct SceneBrief {
  std::string scene_prompt;
  std::vector<EntitySpec> entities;
  std::string anchor_entity;
  std::string source = "offline";  // "offline" or "llm"

  const EntitySpec& anchor() const;
  // The first non-anchor entity, or nullptr for a single-entity scene.
  const EntitySpec* moving_entity() const;
};

// Exactly one anchor, 1-2 uniquely named entities, non-empty prompts and
// positive finite scales. Throws ContractError.
void validate(const SceneBrief& brief);

struct TrajectoryProposal {
  std::string template_name = "constant_velocity";
  Vec3 initial_position = Vec3::Zero();
  Vec3 initial_velocity = Vec3::Zero();
  Vec3 acceleration = Vec3::Zero();
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
  double angular_velocity = 0.0;
  double phase = 0.0;
  double duration_seconds = 1.0;
  std::string rationale;
  std::string source = "offline";
};

// Maps the proposal's seconds onto the [0, 1] scene clock: velocities are
// multiplied by the duration and accelerations by its square.
Trajectory to_trajectory(const TrajectoryProposal& p);

struct DirectorConfig {
  int retries = 3;        // attempts per query before falling back
  int max_requeries = 2;  // extra proposals when a trajectory is cut too short
  CollisionCheckConfig collision;
};

// Commonsense sizes (meters) bundled with the library.
const std::map<std::string, double>& entity_scale_table();

// Entities named in the prompt, in order of first mention. Plurals ending
// in "s" or "es" also match.
std::vector<std::string> find_entities(const std::string& prompt);

// Table-driven brief. The last-mentioned entity is the anchor; at most two
// entities. Throws UnresolvedEntityError when no known entity is named.
SceneBrief offline_decompose(const std::string& scene_prompt);

// Asks `client` (when non-null) for a brief, with `retries` attempts, and
// falls back to offline_decompose. Scales come back normalized so the anchor is 1.
SceneBrief decompose(const std::string& scene_prompt, ChatClient* client, const DirectorConfig& config = {});

// Constant velocity from (-3, 0, 0.5) * anchor_extent to the origin over one second.
TrajectoryProposal offline_trajectory(double anchor_extent = 1.0);

TrajectoryProposal propose_trajectory(const SceneBrief& brief, ChatClient* client, const DirectorConfig& config = {},
                                      double anchor_extent = 1.0);

struct RefineResult {
  Trajectory trajectory;
  TrajectoryProposal proposal;  // the accepted candidate
  CollisionReport report;
  int candidates = 1;
};

// Collision-checks the proposal and, when the surviving domain is shorter
// than min_fraction, asks `client` for up to max_requeries replacements.
// The candidate with the longest collision-free domain wins; ties keep the
// earlier one. Throws UnrecoverablePlacementError when every candidate
// collides at t = 0.
RefineResult refine(const TrajectoryProposal& proposal, const SceneBrief& brief, const GaussianObject& moving,
                    std::span<const std::vector<Vec3>> others, ChatClient* client, const DirectorConfig& config = {});

// Response parsing. Both throw InputFormatError on any schema violation.
SceneBrief parse_brief_response(const std::string& scene_prompt, const std::string& text);
TrajectoryProposal parse_trajectory_response(const std::string& text);
// Validators over already-parsed JSON.
SceneBrief brief_from_json(const nlohmann::json& j, const std::string& scene_prompt);
TrajectoryProposal proposal_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SceneBrief& brief);
nlohmann::json to_json(const TrajectoryProposal& proposal);
nlohmann::json to_json(const Trajectory& traj);
Trajectory trajectory_from_json(const nlohmann::json& j);

const char* scene_brief_schema();
const char* trajectory_schema();

}  // namespace scene4d
