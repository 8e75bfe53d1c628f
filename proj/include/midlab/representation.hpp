#pragma once

#include <array>
#include <string>
#include <vector>

#include "midlab/geometry.hpp"
#include "midlab/rng.hpp"
#include "midlab/sim.hpp"

namespace midlab {

inline constexpr int kTracePoints = 10;
inline constexpr int kTraceStride = 10;

enum class RepKind {
  bbox2d = 0,
  bbox3d,
  grasp_plan,
  keypoints,
  traj2d,
  traj_pose,
  traj_depth,
  language,
};

inline constexpr std::array<RepKind, 8> kAllRepKinds = {
    RepKind::bbox2d,    RepKind::bbox3d,    RepKind::grasp_plan, RepKind::keypoints,
    RepKind::traj2d,    RepKind::traj_pose, RepKind::traj_depth, RepKind::language};

const char* to_string(RepKind k);
RepKind rep_kind_from_string(const std::string& s);

// Arm-specific kinds hold data for a single arm; scene kinds describe all
// tracked objects and ignore the arm index.
bool is_arm_specific(RepKind k);

// Length of flatten() for one representation of this kind.
size_t rep_flat_dim(RepKind k, int max_objects);

enum class LanguageDirection { left = 0, right, up, down };
const char* to_string(LanguageDirection d);

// Tagged union over the eight mid-level representation kinds. Only the
// payload matching `kind` is meaningful. flatten() produces the fixed-length
// numeric encoding (zero-padded, one-hot for language) and mask() marks
// which entries are real data versus padding.
struct Representation {
  RepKind kind = RepKind::traj2d;
  int max_objects = 0;

  struct Box2D {
    double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
  };
  struct Box3D {
    double x1 = 0, y1 = 0, z1 = 0, x2 = 0, y2 = 0, z2 = 0;
  };
  struct GraspPlan {
    double xc = 0, yc = 0, du = 0, dv = 0;
    Quat q;
    bool valid = false;
    bool stale = false;  // set when no future grasp event existed
  };
  struct PosePoint {
    double x = 0, y = 0;
    Quat q;
  };
  struct DepthPoint {
    double x = 0, y = 0, d = 0;
  };

  std::vector<Box2D> boxes2d;
  std::vector<Box3D> boxes3d;
  GraspPlan grasp;
  std::vector<std::array<double, 2>> points;  // keypoints or 2D trace
  std::vector<PosePoint> pose_trace;
  std::vector<DepthPoint> depth_trace;
  LanguageDirection language = LanguageDirection::left;

  std::vector<double> flatten() const;
  std::vector<double> mask() const;
  static Representation unflatten(RepKind kind, int max_objects, const std::vector<double>& v,
                                  const std::vector<double>& m);
};

// Oracle extraction from simulator ground truth. Traces sample the episode's
// own future end-effector path at the annotation stride, padding with the
// final state; bounding boxes and keypoints project object geometry at time
// t (object order shuffled per sample); the grasp plan comes from the next
// grasp event of `arm` (falling back, flagged, to the most recent one).
// Throws std::out_of_range for an invalid timestep.
Representation extract_oracle(RepKind kind, const Episode& ep, int t, int arm,
                              const CameraModel& cam);

// Same construction applied to an arbitrary state sequence (used at rollout
// time on virtual futures).
Representation extract_from_states(RepKind kind, const std::vector<WorkcellState>& states,
                                   uint64_t shuffle_seed, int t, int arm, const CameraModel& cam);

// Gaussian perturbation of every continuous field: quaternions are
// re-normalized, image coordinates re-clamped to [0,1], box corners
// re-ordered, padding left untouched, language returned unchanged.
Representation perturb(const Representation& rep, double sigma, RngStream& rng);

}  // namespace midlab
