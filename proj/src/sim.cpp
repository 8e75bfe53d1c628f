#include "midlab/sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace midlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

double wrap_angle(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a < 0) a += 2.0 * kPi;
  return a - kPi;
}

double move_toward(double cur, double target, double rate) {
  double d = target - cur;
  if (d > rate) return cur + rate;
  if (d < -rate) return cur - rate;
  return target;
}

double planar_dist(double ax, double ay, double bx, double by) {
  return std::hypot(ax - bx, ay - by);
}

}  // namespace

const WorkcellParams& WorkcellParams::get() {
  static const WorkcellParams p;
  return p;
}

const char* to_string(ObjectClass c) {
  switch (c) {
    case ObjectClass::peg: return "peg";
    case ObjectClass::slot: return "slot";
    case ObjectClass::cup: return "cup";
    case ObjectClass::pen: return "pen";
    case ObjectClass::bowl: return "bowl";
    case ObjectClass::block: return "block";
    case ObjectClass::distractor: return "distractor";
  }
  return "?";
}

const char* to_string(TaskKind k) {
  switch (k) {
    case TaskKind::reach: return "reach";
    case TaskKind::insertion: return "insertion";
    case TaskKind::fruit_bowl: return "fruit_bowl";
    case TaskKind::stack: return "stack";
    case TaskKind::handover: return "handover";
  }
  return "?";
}

TaskKind task_kind_from_string(const std::string& s) {
  if (s == "reach") return TaskKind::reach;
  if (s == "insertion") return TaskKind::insertion;
  if (s == "fruit_bowl") return TaskKind::fruit_bowl;
  if (s == "stack") return TaskKind::stack;
  if (s == "handover") return TaskKind::handover;
  throw std::invalid_argument("unknown task kind: " + s);
}

TaskSpec TaskSpec::defaults(TaskKind kind) {
  TaskSpec t;
  t.kind = kind;
  switch (kind) {
    case TaskKind::reach:
      t.horizon = 100;
      t.distractors = 2;
      t.tol_pos = 0.05;
      break;
    case TaskKind::insertion:
      t.horizon = 200;
      t.distractors = 1;
      t.tol_pos = 0.03;
      t.tol_yaw = 0.25;
      break;
    case TaskKind::fruit_bowl:
      t.horizon = 300;
      t.distractors = 1;
      t.tol_pos = 0.05;
      break;
    case TaskKind::stack:
      t.horizon = 200;
      t.distractors = 1;
      t.tol_pos = 0.025;
      break;
    case TaskKind::handover:
      t.horizon = 300;
      t.distractors = 1;
      t.tol_pos = 0.05;
      break;
  }
  return t;
}

int TaskSpec::principal_objects() const {
  switch (kind) {
    case TaskKind::reach: return 1;
    case TaskKind::insertion: return 2;
    case TaskKind::fruit_bowl: return 3;
    case TaskKind::stack: return 2;
    case TaskKind::handover: return 1;
  }
  return 0;
}

void to_json(nlohmann::json& j, const TaskSpec& t) {
  j = nlohmann::json{{"kind", to_string(t.kind)},
                     {"horizon", t.horizon},
                     {"distractors", t.distractors},
                     {"tol_pos", t.tol_pos},
                     {"tol_yaw", t.tol_yaw},
                     {"spawn_x", {t.spawn_x.lo, t.spawn_x.hi}},
                     {"spawn_y", {t.spawn_y.lo, t.spawn_y.hi}},
                     {"goal_x", {t.goal_x.lo, t.goal_x.hi}},
                     {"goal_y", {t.goal_y.lo, t.goal_y.hi}},
                     {"yaw_range", {t.yaw_range.lo, t.yaw_range.hi}}};
}

void from_json(const nlohmann::json& j, TaskSpec& t) {
  t.kind = task_kind_from_string(j.at("kind").get<std::string>());
  t.horizon = j.at("horizon").get<int>();
  t.distractors = j.at("distractors").get<int>();
  t.tol_pos = j.at("tol_pos").get<double>();
  t.tol_yaw = j.at("tol_yaw").get<double>();
  auto range = [&](const char* k, Range& r) {
    r.lo = j.at(k)[0].get<double>();
    r.hi = j.at(k)[1].get<double>();
  };
  range("spawn_x", t.spawn_x);
  range("spawn_y", t.spawn_y);
  range("goal_x", t.goal_x);
  range("goal_y", t.goal_y);
  range("yaw_range", t.yaw_range);
}

EePose forward_kinematics(const ArmState& arm, int arm_index) {
  const auto& p = WorkcellParams::get();
  double a = 0.0;
  double x = p.bases[arm_index].x;
  double y = p.bases[arm_index].y;
  for (int i = 0; i < 3; ++i) {
    a += arm.joints[i];
    x += p.link_lengths[i] * std::cos(a);
    y += p.link_lengths[i] * std::sin(a);
  }
  return {x, y, arm.lift, a};
}

bool inverse_kinematics(int arm_index, double x, double y, double yaw, double elbow_sign,
                        std::array<double, 3>& joints_out) {
  const auto& p = WorkcellParams::get();
  const double l1 = p.link_lengths[0], l2 = p.link_lengths[1], l3 = p.link_lengths[2];
  double wx = x - l3 * std::cos(yaw);
  double wy = y - l3 * std::sin(yaw);
  double dx = wx - p.bases[arm_index].x;
  double dy = wy - p.bases[arm_index].y;
  double r2 = dx * dx + dy * dy;
  double c2 = (r2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
  if (c2 > 1.0 || c2 < -1.0) return false;
  double q2 = elbow_sign * std::acos(std::clamp(c2, -1.0, 1.0));
  double q1 = std::atan2(dy, dx) - std::atan2(l2 * std::sin(q2), l1 + l2 * std::cos(q2));
  double q3 = yaw - q1 - q2;
  joints_out = {wrap_angle(q1), wrap_angle(q2), wrap_angle(q3)};
  return true;
}

// ---------------------------------------------------------------------------
// Reset
// ---------------------------------------------------------------------------
namespace {

struct Footprint {
  double x, y, r;
};

SceneObject make_object(int id, ObjectClass cls, double x, double y, double yaw, Vec3 he) {
  SceneObject o;
  o.id = id;
  o.cls = cls;
  o.x = x;
  o.y = y;
  o.z = he.z;
  o.yaw = yaw;
  o.half_extents = he;
  return o;
}

Vec3 extents_for(ObjectClass cls) {
  switch (cls) {
    case ObjectClass::peg: return {0.018, 0.018, 0.03};
    case ObjectClass::slot: return {0.05, 0.05, 0.02};
    case ObjectClass::cup: return {0.03, 0.03, 0.03};
    case ObjectClass::pen: return {0.05, 0.012, 0.012};
    case ObjectClass::bowl: return {0.06, 0.06, 0.025};
    case ObjectClass::block: return {0.025, 0.025, 0.02};
    case ObjectClass::distractor: return {0.015, 0.015, 0.015};
  }
  return {0.02, 0.02, 0.02};
}

}  // namespace

WorkcellState reset(const TaskSpec& task, uint64_t seed) {
  const auto& p = WorkcellParams::get();
  RngStream rng = RngStream::derive(seed, "reset");
  WorkcellState s;
  s.t = 0;
  for (int a = 0; a < 2; ++a) {
    s.arms[a].joints = {a == 0 ? kPi / 2 : kPi / 2, 0.0, 0.0};
    s.arms[a].lift = p.home_lift;
    s.arms[a].gripper = 1.0;
  }

  std::vector<Footprint> placed;
  auto sample_pose = [&](ObjectClass cls, const Range& rx, const Range& ry, int id,
                         double min_clear) -> SceneObject {
    Vec3 he = extents_for(cls);
    double rad = std::max(he.x, he.y);
    for (int attempt = 0; attempt < 500; ++attempt) {
      double x = rng.uniform(rx.lo, rx.hi);
      double y = rng.uniform(ry.lo, ry.hi);
      double yaw = rng.uniform(task.yaw_range.lo, task.yaw_range.hi);
      bool ok = true;
      for (const auto& f : placed)
        if (planar_dist(x, y, f.x, f.y) < f.r + rad + min_clear) {
          ok = false;
          break;
        }
      if (ok) {
        placed.push_back({x, y, rad});
        return make_object(id, cls, x, y, yaw, he);
      }
    }
    throw std::runtime_error("reset: infeasible randomization range (cannot place objects)");
  };

  int id = 0;
  switch (task.kind) {
    case TaskKind::reach:
      s.objects.push_back(sample_pose(ObjectClass::block, task.spawn_x, task.spawn_y, id++, 0.02));
      break;
    case TaskKind::insertion:
      s.objects.push_back(sample_pose(ObjectClass::peg, task.spawn_x, task.spawn_y, id++, 0.02));
      s.objects.push_back(sample_pose(ObjectClass::slot, task.goal_x, task.goal_y, id++, 0.02));
      break;
    case TaskKind::fruit_bowl:
      s.objects.push_back(sample_pose(ObjectClass::bowl, task.goal_x, task.goal_y, id++, 0.02));
      s.objects.push_back(sample_pose(ObjectClass::block, task.spawn_x, task.spawn_y, id++, 0.02));
      s.objects.push_back(sample_pose(ObjectClass::block, task.spawn_x, task.spawn_y, id++, 0.02));
      break;
    case TaskKind::stack:
      s.objects.push_back(sample_pose(ObjectClass::cup, task.goal_x, task.goal_y, id++, 0.02));
      s.objects.push_back(sample_pose(ObjectClass::cup, task.spawn_x, task.spawn_y, id++, 0.02));
      break;
    case TaskKind::handover:
      s.objects.push_back(sample_pose(ObjectClass::pen, task.spawn_x, task.spawn_y, id++, 0.02));
      break;
  }
  for (int d = 0; d < task.distractors; ++d)
    s.objects.push_back(
        sample_pose(ObjectClass::distractor, task.spawn_x, task.spawn_y, id++, 0.02));
  return s;
}

// ---------------------------------------------------------------------------
// Step
// ---------------------------------------------------------------------------
namespace {

// Supported height after release: table, or the top of an object under the
// center. Objects over a slot's hole fall through to the table.
void settle_object(std::vector<SceneObject>& objects, size_t idx) {
  SceneObject& o = objects[idx];
  double z = o.half_extents.z;
  for (size_t i = 0; i < objects.size(); ++i) {
    if (i == idx) continue;
    const SceneObject& u = objects[i];
    if (u.grasped_by >= 0) continue;
    double d = planar_dist(o.x, o.y, u.x, u.y);
    if (u.cls == ObjectClass::slot && d <= 0.7 * std::min(u.half_extents.x, u.half_extents.y))
      continue;  // hole
    if (d <= std::max(u.half_extents.x, u.half_extents.y))
      z = std::max(z, u.z + u.half_extents.z + o.half_extents.z);
  }
  o.z = z;
}

}  // namespace

WorkcellState step(const WorkcellState& state, const Action& action) {
  const auto& p = WorkcellParams::get();
  WorkcellState ns = state;

  for (int a = 0; a < 2; ++a) {
    ArmState& arm = ns.arms[a];
    for (int j = 0; j < 3; ++j) {
      double target = std::clamp(action.v[4 * a + j], -p.joint_limit, p.joint_limit);
      arm.joints[j] = move_toward(arm.joints[j], target, p.joint_rate);
    }
    double lift_target = std::clamp(action.v[4 * a + 3], 0.0, p.lift_max);
    arm.lift = move_toward(arm.lift, lift_target, p.lift_rate);
    double grip_target = std::clamp(action.v[8 + a], 0.0, 1.0);
    arm.gripper = move_toward(arm.gripper, grip_target, p.gripper_rate);
  }

  std::array<EePose, 2> ee{forward_kinematics(ns.arms[0], 0), forward_kinematics(ns.arms[1], 1)};

  // Release before grasp so a handover transfer within one step stays ordered.
  for (int a = 0; a < 2; ++a) {
    if (ns.arms[a].gripper >= p.gripper_open) {
      for (size_t i = 0; i < ns.objects.size(); ++i) {
        if (ns.objects[i].grasped_by == a) {
          ns.objects[i].grasped_by = -1;
          ns.objects[i].grab_dx = ns.objects[i].grab_dy = 0.0;
          ns.objects[i].grab_dz = ns.objects[i].grab_dyaw = 0.0;
          settle_object(ns.objects, i);
        }
      }
    }
  }

  for (int a = 0; a < 2; ++a) {
    double g = ns.arms[a].gripper;
    if (g > p.gripper_close) continue;
    bool holding = false;
    for (const auto& o : ns.objects)
      if (o.grasped_by == a) holding = true;
    if (holding) continue;
    bool crossing = state.arms[a].gripper > p.gripper_close;

    int best = -1;
    double best_d = 1e9;
    for (size_t i = 0; i < ns.objects.size(); ++i) {
      const SceneObject& o = ns.objects[i];
      double d = planar_dist(ee[a].x, ee[a].y, o.x, o.y);
      if (d > p.grasp_xy_tol || std::abs(ee[a].z - o.z) > p.grasp_z_tol) continue;
      bool transferable = o.grasped_by >= 0 && o.grasped_by != a && crossing;
      if (o.grasped_by == -1 || transferable) {
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(i);
        }
      }
    }
    if (best >= 0) {
      SceneObject& o = ns.objects[best];
      o.grasped_by = a;
      o.grab_dx = o.x - ee[a].x;
      o.grab_dy = o.y - ee[a].y;
      o.grab_dz = o.z - ee[a].z;
      o.grab_dyaw = o.yaw - ee[a].yaw;
    }
  }

  for (auto& o : ns.objects) {
    if (o.grasped_by >= 0) {
      const EePose& e = ee[o.grasped_by];
      o.x = e.x + o.grab_dx;
      o.y = e.y + o.grab_dy;
      o.z = e.z + o.grab_dz;
      o.yaw = e.yaw + o.grab_dyaw;
    }
  }

  ns.t = state.t + 1;
  return ns;
}

// ---------------------------------------------------------------------------
// Success predicates
// ---------------------------------------------------------------------------
bool check_success(const TaskSpec& task, const WorkcellState& s) {
  const auto& p = WorkcellParams::get();
  switch (task.kind) {
    case TaskKind::reach: {
      const SceneObject& o = s.objects[0];
      EePose ee = forward_kinematics(s.arms[0], 0);
      double d = std::sqrt((ee.x - o.x) * (ee.x - o.x) + (ee.y - o.y) * (ee.y - o.y) +
                           (ee.z - o.z) * (ee.z - o.z));
      return d <= task.tol_pos && s.arms[0].gripper <= p.gripper_close;
    }
    case TaskKind::insertion: {
      const SceneObject& peg = s.objects[0];
      const SceneObject& slot = s.objects[1];
      double d = planar_dist(peg.x, peg.y, slot.x, slot.y);
      double dyaw = std::abs(wrap_angle(peg.yaw - slot.yaw));
      double rest_z = slot.z + slot.half_extents.z + peg.half_extents.z;
      return d <= task.tol_pos && dyaw <= task.tol_yaw && peg.z <= rest_z - 0.005;
    }
    case TaskKind::fruit_bowl: {
      const SceneObject& bowl = s.objects[0];
      for (const auto& o : s.objects) {
        if (o.cls != ObjectClass::block) continue;
        if (planar_dist(o.x, o.y, bowl.x, bowl.y) > task.tol_pos) return false;
        if (o.z > 0.09) return false;
      }
      return true;
    }
    case TaskKind::stack: {
      const SceneObject& base = s.objects[0];
      const SceneObject& top = s.objects[1];
      double d = planar_dist(base.x, base.y, top.x, top.y);
      double want_z = base.z + base.half_extents.z + top.half_extents.z;
      return d <= task.tol_pos && std::abs(top.z - want_z) <= 0.015;
    }
    case TaskKind::handover: {
      const SceneObject& pen = s.objects[0];
      return pen.grasped_by == 1 && s.arms[1].gripper <= p.gripper_close;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Scripted demonstrators
// ---------------------------------------------------------------------------
namespace {

constexpr double kJointArrive = 0.02;  // rad
constexpr double kLiftArrive = 0.01;   // m

double outward_yaw(int arm_index, double x, double y) {
  const auto& b = WorkcellParams::get().bases[arm_index];
  return std::atan2(y - b.y, x - b.x);
}

bool joints_near(const ArmState& arm, const std::array<double, 3>& target, double tol) {
  for (int i = 0; i < 3; ++i)
    if (std::abs(wrap_angle(arm.joints[i] - target[i])) > tol) return false;
  return true;
}

void set_arm(Action& act, int a, const std::array<double, 3>& joints, double lift, double grip) {
  act.v[4 * a + 0] = joints[0];
  act.v[4 * a + 1] = joints[1];
  act.v[4 * a + 2] = joints[2];
  act.v[4 * a + 3] = lift;
  act.v[8 + a] = grip;
}

void hold_arm(Action& act, const WorkcellState& s, int a) {
  set_arm(act, a, s.arms[a].joints, s.arms[a].lift, s.arms[a].gripper);
}

double elbow_for(int arm_index) { return arm_index == 0 ? -1.0 : 1.0; }

// Pick `obj` with arm `a` and carry it to (px, py). When align_yaw is set the
// object's yaw is driven to `pyaw`; otherwise the end-effector approaches
// along the outward direction. place_z is the target object height.
void demo_pick_place(const WorkcellState& s, int a, const SceneObject& obj, double px, double py,
                     double pyaw, bool align_yaw, double place_z, bool release, Action& act) {
  const auto& p = WorkcellParams::get();
  const ArmState& arm = s.arms[a];
  if (obj.grasped_by != a) {
    std::array<double, 3> ikj;
    double gyaw = outward_yaw(a, obj.x, obj.y);
    if (!inverse_kinematics(a, obj.x, obj.y, gyaw, elbow_for(a), ikj)) {
      hold_arm(act, s, a);
      return;
    }
    if (!joints_near(arm, ikj, kJointArrive)) {
      set_arm(act, a, ikj, p.home_lift, 1.0);
    } else if (arm.lift > obj.z + kLiftArrive) {
      set_arm(act, a, ikj, obj.z, 1.0);
    } else {
      set_arm(act, a, ikj, obj.z, 0.0);
    }
    return;
  }

  // Carrying: raise, rotate to the place waypoint, descend, then release/hold.
  double ee_yaw_target;
  if (align_yaw) {
    EePose ee = forward_kinematics(arm, a);
    double dyaw = obj.yaw - ee.yaw;
    ee_yaw_target = wrap_angle(pyaw - dyaw);
  } else {
    ee_yaw_target = outward_yaw(a, px, py);
  }
  std::array<double, 3> ikp;
  if (!inverse_kinematics(a, px - obj.grab_dx, py - obj.grab_dy, ee_yaw_target, elbow_for(a),
                          ikp)) {
    hold_arm(act, s, a);
    return;
  }
  double lift_down = std::clamp(place_z - obj.grab_dz, 0.0, p.lift_max);
  if (!joints_near(arm, ikp, kJointArrive)) {
    if (arm.lift < p.home_lift - kLiftArrive) {
      set_arm(act, a, arm.joints, p.home_lift, 0.0);  // raise before swinging
    } else {
      set_arm(act, a, ikp, p.home_lift, 0.0);
    }
  } else if (arm.lift > lift_down + kLiftArrive) {
    set_arm(act, a, ikp, lift_down, 0.0);
  } else {
    set_arm(act, a, ikp, lift_down, release ? 1.0 : 0.0);
  }
}

}  // namespace

Action hold_action(const WorkcellState& s) {
  Action act;
  hold_arm(act, s, 0);
  hold_arm(act, s, 1);
  return act;
}

Action scripted_demo(const TaskSpec& task, const WorkcellState& s) {
  const auto& p = WorkcellParams::get();
  if (check_success(task, s)) return hold_action(s);

  Action act = hold_action(s);
  switch (task.kind) {
    case TaskKind::reach: {
      const SceneObject& o = s.objects[0];
      std::array<double, 3> ikj;
      double gyaw = outward_yaw(0, o.x, o.y);
      if (!inverse_kinematics(0, o.x, o.y, gyaw, elbow_for(0), ikj)) break;
      const ArmState& arm = s.arms[0];
      if (!joints_near(arm, ikj, kJointArrive))
        set_arm(act, 0, ikj, p.home_lift, 1.0);
      else if (arm.lift > o.z + kLiftArrive)
        set_arm(act, 0, ikj, o.z, 1.0);
      else
        set_arm(act, 0, ikj, o.z, 0.0);
      break;
    }
    case TaskKind::insertion: {
      const SceneObject& peg = s.objects[0];
      const SceneObject& slot = s.objects[1];
      double place_z = slot.z + 0.015;
      demo_pick_place(s, 0, peg, slot.x, slot.y, slot.yaw, true, place_z, false, act);
      break;
    }
    case TaskKind::fruit_bowl: {
      const SceneObject& bowl = s.objects[0];
      double place_z = bowl.z + bowl.half_extents.z + 0.025;
      for (const auto& o : s.objects) {
        if (o.cls != ObjectClass::block) continue;
        bool placed = o.grasped_by == -1 &&
                      planar_dist(o.x, o.y, bowl.x, bowl.y) <= task.tol_pos - 0.01 && o.z <= 0.09;
        if (placed) continue;
        demo_pick_place(s, 0, o, bowl.x, bowl.y, 0.0, false, place_z, true, act);
        break;
      }
      break;
    }
    case TaskKind::stack: {
      const SceneObject& base = s.objects[0];
      const SceneObject& top = s.objects[1];
      double place_z = base.z + base.half_extents.z + top.half_extents.z;
      demo_pick_place(s, 0, top, base.x, base.y, 0.0, false, place_z, false, act);
      break;
    }
    case TaskKind::handover: {
      const SceneObject& pen = s.objects[0];
      const double hx = 0.0, hy = 0.26, hz = 0.12;
      if (pen.grasped_by == -1) {
        demo_pick_place(s, 0, pen, hx, hy, 0.0, false, hz, false, act);
      } else if (pen.grasped_by == 0) {
        demo_pick_place(s, 0, pen, hx, hy, 0.0, false, hz, false, act);
        bool pen_ready = planar_dist(pen.x, pen.y, hx, hy) <= 0.02 && std::abs(pen.z - hz) <= 0.015;
        if (pen_ready) {
          std::array<double, 3> ikj;
          double gyaw = outward_yaw(1, pen.x, pen.y);
          if (inverse_kinematics(1, pen.x, pen.y, gyaw, elbow_for(1), ikj)) {
            const ArmState& arm1 = s.arms[1];
            bool close_now = joints_near(arm1, ikj, kJointArrive) &&
                             std::abs(arm1.lift - pen.z) <= kLiftArrive;
            set_arm(act, 1, ikj, pen.z, close_now ? 0.0 : 1.0);
          }
        }
      }
      break;
    }
  }
  return act;
}

// ---------------------------------------------------------------------------
// Cameras and rendering
// ---------------------------------------------------------------------------
CameraModel topdown_camera() {
  CameraModel cam;
  cam.fx = cam.fy = 0.7;
  cam.cx = cam.cy = 0.5;
  cam.rotation = Quat(1.0, 0.0, 0.0, 0.0);  // 180 deg about x: looks straight down
  cam.translation = {0.0, 0.25, 1.0};
  return cam;
}

CameraModel front_camera() {
  CameraModel cam;
  cam.fx = cam.fy = 0.7;
  cam.cx = cam.cy = 0.5;
  double s = std::sin(kPi / 4), c = std::cos(kPi / 4);
  cam.rotation = Quat(s, 0.0, 0.0, c);  // +90 deg about x: looks along +y
  cam.translation = {0.0, 0.1, 1.0};
  return cam;
}

CameraModel camera_by_name(const std::string& name) {
  if (name == "topdown") return topdown_camera();
  if (name == "front") return front_camera();
  throw std::invalid_argument("unknown camera: " + name);
}

namespace {

// Raw (unclamped) projection; returns false when behind the camera or
// outside the frame by more than the whole image.
bool project_raw(const Vec3& p, const CameraModel& cam, double& u, double& v, double& d) {
  Vec3 pc = cam.rotation.rotate(p) + cam.translation;
  if (!(pc.z > 1e-9)) return false;
  u = cam.cx + cam.fx * pc.x / pc.z;
  v = cam.cy + cam.fy * pc.y / pc.z;
  d = pc.z;
  return true;
}

}  // namespace

Image render(const WorkcellState& state, const CameraModel& cam, int res) {
  Image img(res);
  std::vector<double> zbuf(static_cast<size_t>(res) * res, 1e30);

  for (const auto& o : state.objects) {
    double umin = 1e30, umax = -1e30, vmin = 1e30, vmax = -1e30;
    bool visible = true;
    for (int corner = 0; corner < 8 && visible; ++corner) {
      double sx = (corner & 1) ? 1.0 : -1.0;
      double sy = (corner & 2) ? 1.0 : -1.0;
      double sz = (corner & 4) ? 1.0 : -1.0;
      double cx = std::cos(o.yaw), sy_ = std::sin(o.yaw);
      double lx = sx * o.half_extents.x, ly = sy * o.half_extents.y;
      Vec3 w{o.x + cx * lx - sy_ * ly, o.y + sy_ * lx + cx * ly, o.z + sz * o.half_extents.z};
      double u, v, d;
      if (!project_raw(w, cam, u, v, d)) {
        visible = false;
        break;
      }
      umin = std::min(umin, u);
      umax = std::max(umax, u);
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
    }
    if (!visible || umax < 0.0 || umin > 1.0 || vmax < 0.0 || vmin > 1.0) continue;

    double uc, vc, dc;
    if (!project_raw({o.x, o.y, o.z + o.half_extents.z}, cam, uc, vc, dc)) continue;
    double value = (static_cast<double>(o.cls) + 1.0) / 7.0;

    int ix0 = std::max(0, static_cast<int>(std::ceil(umin * res - 0.5)));
    int ix1 = std::min(res - 1, static_cast<int>(std::floor(umax * res - 0.5)));
    int iy0 = std::max(0, static_cast<int>(std::ceil(vmin * res - 0.5)));
    int iy1 = std::min(res - 1, static_cast<int>(std::floor(vmax * res - 0.5)));
    for (int iy = iy0; iy <= iy1; ++iy) {
      for (int ix = ix0; ix <= ix1; ++ix) {
        size_t zi = static_cast<size_t>(iy) * res + ix;
        if (dc < zbuf[zi]) {
          zbuf[zi] = dc;
          img.at(iy, ix, 0) = value;
          img.at(iy, ix, 2) = dc / kDepthScale;
        }
      }
    }
  }

  const auto& p = WorkcellParams::get();
  for (int a = 0; a < 2; ++a) {
    const ArmState& arm = state.arms[a];
    Vec3 pt{p.bases[a].x, p.bases[a].y, arm.lift};
    double ang = 0.0;
    std::array<Vec3, 4> joints_w;
    joints_w[0] = pt;
    for (int i = 0; i < 3; ++i) {
      ang += arm.joints[i];
      pt = pt + Vec3{p.link_lengths[i] * std::cos(ang), p.link_lengths[i] * std::sin(ang), 0.0};
      joints_w[i + 1] = pt;
    }
    int samples = res * 3;
    for (int seg = 0; seg < 3; ++seg) {
      for (int k = 0; k <= samples; ++k) {
        double f = static_cast<double>(k) / samples;
        Vec3 w = joints_w[seg] + (joints_w[seg + 1] - joints_w[seg]) * f;
        double u, v, d;
        if (!project_raw(w, cam, u, v, d)) continue;
        if (u < 0.0 || u > 1.0 || v < 0.0 || v > 1.0) continue;
        int ix = std::min(res - 1, std::max(0, static_cast<int>(u * res)));
        int iy = std::min(res - 1, std::max(0, static_cast<int>(v * res)));
        img.at(iy, ix, 1) = 1.0;
      }
    }
  }
  return img;
}

std::array<double, 10> proprioception(const WorkcellState& s) {
  std::array<double, 10> out{};
  for (int a = 0; a < 2; ++a) {
    out[4 * a + 0] = s.arms[a].joints[0];
    out[4 * a + 1] = s.arms[a].joints[1];
    out[4 * a + 2] = s.arms[a].joints[2];
    out[4 * a + 3] = s.arms[a].lift;
    out[8 + a] = s.arms[a].gripper;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Episode generation
// ---------------------------------------------------------------------------
Episode run_demo_episode(const TaskSpec& task, uint64_t sim_seed, double noise_std,
                         RngStream* noise) {
  Episode ep;
  ep.seed = sim_seed;
  WorkcellState s = reset(task, sim_seed);
  ep.states.push_back(s);
  int consec = 0;
  for (int t = 0; t < task.horizon; ++t) {
    Action a = scripted_demo(task, s);
    if (noise_std > 0.0 && noise)
      for (double& v : a.v) v += noise_std * noise->normal();
    s = step(s, a);
    ep.actions.push_back(a);
    ep.states.push_back(s);
    if (check_success(task, s)) {
      if (++consec >= kSuccessHold) {
        ep.success = true;
        break;
      }
    } else {
      consec = 0;
    }
  }
  return ep;
}

EpisodeDataset generate_dataset(const TaskSpec& task, int n, uint64_t seed,
                                double action_noise_std) {
  if (n <= 0) throw std::invalid_argument("generate_dataset: n must be positive");
  EpisodeDataset ds;
  ds.task = task;
  const uint64_t budget = static_cast<uint64_t>(n) * 20;
  for (uint64_t k = 0; k < budget && ds.episodes.size() < static_cast<size_t>(n); ++k) {
    uint64_t sim_seed = hash_mix(seed, k);
    RngStream noise = RngStream::derive(seed, "demo-noise", k);
    Episode ep = run_demo_episode(task, sim_seed, action_noise_std, &noise);
    if (ep.success) ds.episodes.push_back(std::move(ep));
  }
  if (ds.episodes.size() < static_cast<size_t>(n))
    throw std::runtime_error("generate_dataset: retry budget exhausted");
  return ds;
}

// ---------------------------------------------------------------------------
// State flattening
// ---------------------------------------------------------------------------
size_t state_flat_dim(const TaskSpec& task) {
  return 11 + 14 * static_cast<size_t>(task.max_objects());
}

void flatten_state(const WorkcellState& s, double* out, const TaskSpec& task) {
  size_t i = 0;
  for (int a = 0; a < 2; ++a) {
    out[i++] = s.arms[a].joints[0];
    out[i++] = s.arms[a].joints[1];
    out[i++] = s.arms[a].joints[2];
    out[i++] = s.arms[a].lift;
    out[i++] = s.arms[a].gripper;
  }
  out[i++] = static_cast<double>(s.t);
  size_t want = static_cast<size_t>(task.max_objects());
  if (s.objects.size() != want) throw std::runtime_error("flatten_state: object count mismatch");
  for (const auto& o : s.objects) {
    out[i++] = o.id;
    out[i++] = static_cast<double>(o.cls);
    out[i++] = o.x;
    out[i++] = o.y;
    out[i++] = o.z;
    out[i++] = o.yaw;
    out[i++] = o.half_extents.x;
    out[i++] = o.half_extents.y;
    out[i++] = o.half_extents.z;
    out[i++] = o.grasped_by;
    out[i++] = o.grab_dx;
    out[i++] = o.grab_dy;
    out[i++] = o.grab_dz;
    out[i++] = o.grab_dyaw;
  }
}

WorkcellState unflatten_state(const double* in, const TaskSpec& task) {
  WorkcellState s;
  size_t i = 0;
  for (int a = 0; a < 2; ++a) {
    s.arms[a].joints[0] = in[i++];
    s.arms[a].joints[1] = in[i++];
    s.arms[a].joints[2] = in[i++];
    s.arms[a].lift = in[i++];
    s.arms[a].gripper = in[i++];
  }
  s.t = static_cast<int>(in[i++]);
  for (int k = 0; k < task.max_objects(); ++k) {
    SceneObject o;
    o.id = static_cast<int>(in[i++]);
    o.cls = static_cast<ObjectClass>(static_cast<int>(in[i++]));
    o.x = in[i++];
    o.y = in[i++];
    o.z = in[i++];
    o.yaw = in[i++];
    o.half_extents.x = in[i++];
    o.half_extents.y = in[i++];
    o.half_extents.z = in[i++];
    o.grasped_by = static_cast<int>(in[i++]);
    o.grab_dx = in[i++];
    o.grab_dy = in[i++];
    o.grab_dz = in[i++];
    o.grab_dyaw = in[i++];
    s.objects.push_back(o);
  }
  return s;
}

}  // namespace midlab
