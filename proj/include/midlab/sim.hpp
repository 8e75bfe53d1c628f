#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "midlab/geometry.hpp"
#include "midlab/rng.hpp"

namespace midlab {

// ---------------------------------------------------------------------------
// Workcell geometry and dynamics constants.
//
// Two planar 3R arms face the +y half of the table, each with a prismatic
// lift and a parallel gripper. The simulation is kinematic: objects interact
// only through grasping and a supported-by rule on release.
// ---------------------------------------------------------------------------
struct WorkcellParams {
  std::array<Vec3, 2> bases{Vec3{-0.30, 0.0, 0.0}, Vec3{0.30, 0.0, 0.0}};
  std::array<double, 3> link_lengths{0.20, 0.16, 0.08};
  double joint_limit = 3.14159265358979323846;  // symmetric, radians
  double lift_max = 0.20;
  double joint_rate = 0.10;    // rad per step
  double lift_rate = 0.02;     // m per step
  double gripper_rate = 0.25;  // per step
  double grasp_xy_tol = 0.035;
  double grasp_z_tol = 0.025;
  double gripper_close = 0.4;  // grasp engages at or below
  double gripper_open = 0.6;   // release at or above
  double home_lift = 0.15;

  static const WorkcellParams& get();
};

enum class ObjectClass { peg = 0, slot, cup, pen, bowl, block, distractor };
enum class TaskKind { reach = 0, insertion, fruit_bowl, stack, handover };

const char* to_string(ObjectClass c);
const char* to_string(TaskKind k);
TaskKind task_kind_from_string(const std::string& s);

struct ArmState {
  std::array<double, 3> joints{0.0, 0.0, 0.0};
  double lift = 0.0;
  double gripper = 1.0;  // 0 closed, 1 open
};

struct SceneObject {
  int id = 0;
  ObjectClass cls = ObjectClass::block;
  double x = 0.0, y = 0.0, z = 0.0, yaw = 0.0;
  Vec3 half_extents{0.02, 0.02, 0.02};
  int grasped_by = -1;  // arm index, -1 when free
  // World-frame attachment offsets, constant while grasped.
  double grab_dx = 0.0, grab_dy = 0.0, grab_dz = 0.0, grab_dyaw = 0.0;
};

struct WorkcellState {
  std::array<ArmState, 2> arms;
  std::vector<SceneObject> objects;
  int t = 0;
};

// Absolute targets: [arm0 j0 j1 j2 lift, arm1 j0 j1 j2 lift, grip0, grip1].
struct Action {
  std::array<double, 10> v{};
};

struct Range {
  double lo = 0.0, hi = 0.0;
};

struct TaskSpec {
  TaskKind kind = TaskKind::reach;
  int horizon = 100;
  int distractors = 1;
  double tol_pos = 0.05;  // meters
  double tol_yaw = 0.25;  // radians
  Range spawn_x{-0.40, -0.12};
  Range spawn_y{0.16, 0.34};
  Range goal_x{-0.22, -0.02};  // slot / bowl / handover zone
  Range goal_y{0.16, 0.30};
  Range yaw_range{-0.6, 0.6};

  static TaskSpec defaults(TaskKind kind);
  int principal_objects() const;
  int max_objects() const { return principal_objects() + distractors; }
};

void to_json(nlohmann::json& j, const TaskSpec& t);
void from_json(const nlohmann::json& j, TaskSpec& t);

struct Episode {
  std::vector<WorkcellState> states;  // length = actions + 1
  std::vector<Action> actions;
  bool success = false;
  uint64_t seed = 0;
};

struct EpisodeDataset {
  TaskSpec task;
  std::vector<Episode> episodes;
};

// ---------------------------------------------------------------------------
// Core operations
// ---------------------------------------------------------------------------

struct EePose {
  double x = 0.0, y = 0.0, z = 0.0, yaw = 0.0;
};

EePose forward_kinematics(const ArmState& arm, int arm_index);

// Deterministic reset: object poses sampled inside the task's randomization
// ranges (rejecting overlaps, bounded retries), arms at home.
// Throws std::runtime_error if a feasible layout cannot be sampled.
WorkcellState reset(const TaskSpec& task, uint64_t seed);

// Kinematic step: joints move toward absolute targets at bounded rate,
// grasping engages/releases on gripper thresholds, grasped objects track the
// end-effector, t increments. Actions are clamped to limits; never throws.
WorkcellState step(const WorkcellState& state, const Action& action);

bool check_success(const TaskSpec& task, const WorkcellState& state);

// Waypoint-following expert. Pure function of the current state; outputs a
// hold action once the task predicate is satisfied.
Action scripted_demo(const TaskSpec& task, const WorkcellState& state);

Action hold_action(const WorkcellState& state);

// Inverse kinematics for one arm: end-effector (x, y) and yaw to joint
// angles. elbow_sign picks the branch. Returns false when out of reach.
bool inverse_kinematics(int arm_index, double x, double y, double yaw, double elbow_sign,
                        std::array<double, 3>& joints_out);

// ---------------------------------------------------------------------------
// Cameras and rendering
// ---------------------------------------------------------------------------

inline constexpr double kDepthScale = 2.0;  // meters mapped to 1.0 in the depth channel

CameraModel topdown_camera();
CameraModel front_camera();
CameraModel camera_by_name(const std::string& name);

// Channels: 0 = object-class occupancy, 1 = arm occupancy, 2 = depth/kDepthScale.
struct Image {
  int res = 0;
  std::vector<double> data;  // [v][u][channel], 3 channels

  Image() = default;
  explicit Image(int r) : res(r), data(static_cast<size_t>(r) * r * 3, 0.0) {}
  double& at(int v, int u, int c) { return data[(static_cast<size_t>(v) * res + u) * 3 + c]; }
  double at(int v, int u, int c) const {
    return data[(static_cast<size_t>(v) * res + u) * 3 + c];
  }
};

Image render(const WorkcellState& state, const CameraModel& cam, int res);

// Proprioception in action layout order (8 joint values + 2 grippers).
std::array<double, 10> proprioception(const WorkcellState& state);

// Runs one scripted-demo episode. Gaussian target noise (std per action
// dimension) is drawn from `noise` when noise_std > 0. The episode ends at
// the horizon or once the success predicate has held for 10 consecutive
// steps.
Episode run_demo_episode(const TaskSpec& task, uint64_t sim_seed, double noise_std,
                         RngStream* noise);

inline constexpr int kSuccessHold = 10;

// n successful scripted episodes; episode k uses sim seed hash(seed, k).
// Throws if the retry budget (20 attempts per requested episode) runs out.
EpisodeDataset generate_dataset(const TaskSpec& task, int n, uint64_t seed,
                                double action_noise_std);

// ---------------------------------------------------------------------------
// Dataset (de)serialization helpers — see container.hpp for the file format.
// ---------------------------------------------------------------------------
size_t state_flat_dim(const TaskSpec& task);
void flatten_state(const WorkcellState& s, double* out, const TaskSpec& task);
WorkcellState unflatten_state(const double* in, const TaskSpec& task);

}  // namespace midlab
