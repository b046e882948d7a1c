#include "lmplan/contact_schedule.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace lmplan {
namespace {

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

double polygon_area(const std::vector<Vec2>& v) {
  double area = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2& p = v[i];
    const Vec2& q = v[(i + 1) % v.size()];
    area += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * area;
}

enum class TrotPhase { kFullA, kDiagLFRH, kFullB, kDiagRFLH };

struct PhaseInfo {
  TrotPhase phase;
  double start;     // offset from the start of the cyclic phase list
  double duration;
};

// Cyclic phase list; offset zero is the start of the full-support window that
// straddles the cycle boundary.
std::array<PhaseInfo, 4> trot_phases(const GaitParams& gait, double scale) {
  const double f = gait.full_support_duration * scale;
  const double d = gait.diagonal_duration * scale;
  return {{{TrotPhase::kFullA, 0.0, f},
           {TrotPhase::kDiagLFRH, f, d},
           {TrotPhase::kFullB, f + d, f},
           {TrotPhase::kDiagRFLH, 2 * f + d, d}}};
}

double cycle_scale(const GaitParams& gait, const Vec3& v_des) {
  const double speed = v_des.norm();
  if (speed <= gait.reference_speed) return 1.0;
  return std::max(gait.min_cycle_scale, gait.reference_speed / speed);
}

ContactMask phase_contacts(TrotPhase p) {
  switch (p) {
    case TrotPhase::kDiagLFRH: return {true, false, false, true};
    case TrotPhase::kDiagRFLH: return {false, true, true, false};
    default: return {true, true, true, true};
  }
}

bool is_diagonal(TrotPhase p) { return p == TrotPhase::kDiagLFRH || p == TrotPhase::kDiagRFLH; }

SupportPolygon make_polygon(const FootArray& feet, const ContactMask& contacts, TimeDomain interval,
                            const GaitParams& gait) {
  std::vector<Vec2> pts;
  const double h = gait.foot_half_size;
  for (int i = 0; i < 4; ++i) {
    if (!contacts[static_cast<std::size_t>(i)]) continue;
    const Vec2 c = feet[static_cast<std::size_t>(i)].head<2>();
    pts.emplace_back(c.x() + h, c.y() + h);
    pts.emplace_back(c.x() - h, c.y() + h);
    pts.emplace_back(c.x() - h, c.y() - h);
    pts.emplace_back(c.x() + h, c.y() - h);
  }
  SupportPolygon poly;
  poly.vertices = convex_hull(std::move(pts));
  poly.halfspaces = polygon_halfspaces(poly.vertices, gait.polygon_margin);
  poly.boundary = polygon_halfspaces(poly.vertices, 0.0);
  poly.interval = interval;
  poly.contacts = contacts;
  poly.feet = feet;
  return poly;
}

}  // namespace

std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 1e-14) --k;
    hull[k++] = p;
  }
  for (std::size_t i = pts.size() - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], pts[i]) <= 1e-14) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

std::vector<HalfSpace> polygon_halfspaces(const std::vector<Vec2>& v, double margin) {
  if (v.size() < 3) throw ScheduleError("polygon needs at least 3 vertices");
  const std::size_t n = v.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (cross(v[i], v[(i + 1) % n], v[(i + 2) % n]) <= 1e-12) {
      throw ScheduleError("polygon is not strictly convex and counter-clockwise");
    }
  }
  std::vector<HalfSpace> rows;
  rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 e = v[(i + 1) % n] - v[i];
    const Vec2 normal = Vec2(e.y(), -e.x()).normalized();  // outward for CCW
    rows.push_back({normal.x(), normal.y(), -normal.dot(v[i]) + margin});
  }
  return rows;
}

double SupportPolygon::margin_of(const Vec2& p) const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& h : boundary) m = std::min(m, -h.eval(p));
  return m;
}

const SupportPolygon& SupportSequence::at(double t) const {
  if (polygons.empty()) throw DomainError("empty support sequence");
  if (t < polygons.front().interval.t0 || t > polygons.back().interval.tf) {
    throw DomainError("time " + std::to_string(t) + " outside support sequence");
  }
  for (std::size_t i = 0; i + 1 < polygons.size(); ++i) {
    if (t < polygons[i].interval.tf) return polygons[i];
  }
  return polygons.back();
}

double gait_cycle_duration(const GaitParams& gait, const Vec3& v_des) {
  if (is_stationary(gait, v_des)) return gait.hold_horizon;
  return 2.0 * (gait.full_support_duration + gait.diagonal_duration) * cycle_scale(gait, v_des);
}

bool is_stationary(const GaitParams& gait, const Vec3& v_des) {
  return v_des.head<2>().norm() < gait.stationary_speed;
}

Vec2 lip_foothold(const GaitParams& gait, const StanceState& stance, int foot, const Vec3& v_des,
                  double t_touchdown, double t_stance) {
  const double k = std::sqrt(std::max(stance.com.z(), 0.0) / gait.gravity);
  const Vec2 v = v_des.head<2>();
  const Vec2 hip = stance.com.head<2>() + gait.hip_offsets[static_cast<std::size_t>(foot)] + v * t_touchdown;
  return hip + v * (0.5 * t_stance) + k * (stance.com_velocity.head<2>() - v);
}

ContactMask trot_contacts(const GaitParams& gait, const Vec3& v_des, double gait_phase) {
  if (is_stationary(gait, v_des)) return {true, true, true, true};
  const double scale = cycle_scale(gait, v_des);
  const double cycle = gait_cycle_duration(gait, v_des);
  const auto phases = trot_phases(gait, scale);
  double u = std::fmod(gait_phase + 0.5 * phases[0].duration, cycle);
  if (u < 0) u += cycle;
  for (const auto& p : phases) {
    if (u < p.start + p.duration) return phase_contacts(p.phase);
  }
  return phase_contacts(phases[0].phase);
}

SupportSequence generate_support_sequence(const StanceState& stance, const Vec3& v_des,
                                          const GaitParams& gait, double gait_phase) {
  {
    std::vector<Vec2> centers;
    for (const auto& f : stance.feet) centers.push_back(f.head<2>());
    const auto hull = convex_hull(centers);
    if (hull.size() < 3 || std::abs(polygon_area(hull)) < 1e-6) {
      throw ScheduleError("foot positions are collinear or coincident");
    }
  }
  if (!(gait.full_support_duration > 0) || !(gait.diagonal_duration > 0)) {
    throw ScheduleError("gait phase durations must be positive");
  }

  SupportSequence seq;
  if (is_stationary(gait, v_des)) {
    seq.cycle_duration = gait.hold_horizon;
    seq.polygons.push_back(make_polygon(stance.feet, {true, true, true, true}, {0.0, gait.hold_horizon}, gait));
    return seq;
  }

  const double scale = cycle_scale(gait, v_des);
  const double cycle = gait_cycle_duration(gait, v_des);
  const auto phases = trot_phases(gait, scale);
  const double t_stance = cycle - gait.diagonal_duration * scale;

  double u = std::fmod(gait_phase + 0.5 * phases[0].duration, cycle);
  if (u < 0) u += cycle;
  std::size_t k = 0;
  while (k + 1 < phases.size() && u >= phases[k].start + phases[k].duration - 1e-9) ++k;

  FootArray feet = stance.feet;
  double t = 0.0;
  double remaining = phases[k].start + phases[k].duration - u;

  auto touchdown = [&](TrotPhase finished, double t_td) {
    const std::array<int, 2> swing = finished == TrotPhase::kDiagLFRH ? std::array<int, 2>{kRF, kLH}
                                                                       : std::array<int, 2>{kLF, kRH};
    for (int f : swing) {
      const Vec2 p = lip_foothold(gait, stance, f, v_des, t_td, t_stance);
      feet[static_cast<std::size_t>(f)].head<2>() = p;
    }
  };

  for (int seg = 0; seg < 5; ++seg) {
    TrotPhase phase = phases[k].phase;
    double duration = remaining;
    bool merged_diag = false;
    TrotPhase diag_phase = phase;
    if (seg == 0 && remaining < gait.min_segment) {
      // absorb a sliver of the current phase into the next one using the
      // diagonal (smaller) polygon of the pair; a finishing diagonal phase
      // touches down right away
      const std::size_t next = (k + 1) % phases.size();
      duration = remaining + phases[next].duration;
      merged_diag = true;
      if (is_diagonal(phase)) {
        touchdown(phase, 0.0);
      } else {
        diag_phase = phases[next].phase;
      }
      k = next;
      phase = phases[k].phase;
    }
    if (seg == 4) duration = std::max(cycle - t, gait.min_segment);

    const ContactMask contacts = phase_contacts(merged_diag ? diag_phase : phase);
    seq.polygons.push_back(make_polygon(feet, contacts, {t, t + duration}, gait));
    t += duration;

    if (is_diagonal(phase)) touchdown(phase, t);
    k = (k + 1) % phases.size();
    remaining = phases[k].duration;
  }
  seq.cycle_duration = t;
  return seq;
}

ForceSample event_profile(const ForceEvent& e, double t) {
  const double dt = t - e.interval.t0;
  ForceSample s;
  s.value = e.force + e.rate * dt + 0.5 * e.accel * dt * dt;
  s.rate = e.rate + e.accel * dt;
  s.accel = e.accel;
  return s;
}

ForceSchedule::ForceSchedule(std::vector<ForceEvent> events) : events_(std::move(events)) {
  if (events_.empty()) throw ScheduleError("force schedule needs at least one event");
  if (std::abs(events_.front().interval.t0) > 1e-12) throw ScheduleError("force events must start at t = 0");
  for (std::size_t i = 0; i < events_.size(); ++i) {
    const auto& e = events_[i];
    if (!(e.interval.tf > e.interval.t0)) throw ScheduleError("force event " + std::to_string(i) + " has tf <= t0");
    if (!e.force.allFinite() || !e.rate.allFinite() || !e.accel.allFinite()) {
      throw ScheduleError("force event " + std::to_string(i) + " has non-finite values");
    }
    if (i > 0 && std::abs(events_[i - 1].interval.tf - e.interval.t0) > 1e-12) {
      throw ScheduleError("gap or overlap between force events " + std::to_string(i - 1) + " and " +
                          std::to_string(i));
    }
  }
}

std::size_t ForceSchedule::event_index(double t) const {
  if (events_.empty() || t < events_.front().interval.t0 || t > events_.back().interval.tf) {
    throw DomainError("time " + std::to_string(t) + " outside force schedule");
  }
  for (std::size_t i = 0; i + 1 < events_.size(); ++i) {
    if (t < events_[i].interval.tf) return i;
  }
  return events_.size() - 1;
}

ForceSample ForceSchedule::at(double t) const { return event_profile(events_[event_index(t)], t); }

ForceSample force_profile_at(const ForceSchedule& schedule, double t) { return schedule.at(t); }

void ManipContact::validate() const {
  if (jacobian.rows() != 3) throw ScheduleError("arm Jacobian must have 3 rows");
  if (jacobian.cols() != tau_limit.size()) throw ScheduleError("arm Jacobian columns must match torque limits");
  if (jacobian.cols() < 1) throw ScheduleError("arm needs at least one actuator");
  for (int i = 0; i < 3; ++i) {
    if (f_lo(i) > f_hi(i)) throw ScheduleError("force lower bound exceeds upper bound");
  }
}

}  // namespace lmplan
