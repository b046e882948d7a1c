#include "lmplan/plan_check.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lmplan {

namespace {

void worse(double& slot, double value) { slot = std::max(slot, value); }

std::string line(const char* name, double value, double tol) {
  std::ostringstream s;
  s << name << " violation " << value << " exceeds " << tol;
  return s.str();
}

}  // namespace

std::vector<std::string> CheckReport::failures(const CheckTolerances& tol) const {
  std::vector<std::string> out;
  if (junction_position > tol.junction) out.push_back(line("junction position", junction_position, tol.junction));
  if (junction_velocity > tol.junction) out.push_back(line("junction velocity", junction_velocity, tol.junction));
  if (initial_position > tol.initial) out.push_back(line("initial position", initial_position, tol.initial));
  if (initial_velocity > tol.initial) out.push_back(line("initial velocity", initial_velocity, tol.initial));
  if (zmp > tol.zmp) out.push_back(line("zmp", zmp, tol.zmp));
  if (friction > tol.friction) out.push_back(line("friction", friction, tol.friction));
  if (free_force > tol.free_force) out.push_back(line("free-axis force", free_force, tol.free_force));
  if (torque > tol.torque) out.push_back(line("arm torque", torque, tol.torque));
  if (box > tol.box) out.push_back(line("force bound", box, tol.box));
  return out;
}

CheckReport check_plan(const Plan& plan, const RobotParams& robot, const ManipContact& contact) {
  CheckReport rep;
  const auto& pieces = plan.motion.pieces();
  const auto& fpieces = plan.force.pieces();
  const bool with_force = plan.mode == PlanMode::kFull;
  const double m = robot.mass;
  const double g = robot.gravity;
  const double mu = robot.mu;

  for (std::size_t i = 0; i + 1 < pieces.size(); ++i) {
    const double t = pieces[i].domain.tf;
    worse(rep.junction_position, (pieces[i].eval(t, 0) - pieces[i + 1].eval(t, 0)).norm());
    worse(rep.junction_velocity, (pieces[i].eval(t, 1) - pieces[i + 1].eval(t, 1)).norm());
  }
  if (!pieces.empty()) {
    const double t0 = pieces.front().domain.t0;
    worse(rep.initial_position, (pieces.front().eval(t0, 0) - plan.created_from.r).norm());
    worse(rep.initial_velocity, (pieces.front().eval(t0, 1) - plan.created_from.v).norm());
  }

  const Vec3 lever_body = plan.created_from.rotation * contact.r_cm;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const SupportPolygon& poly = plan.support.polygons.at(i);
    for (double t : sample_times(pieces[i].domain)) {
      ++rep.samples;
      const Vec3 q = pieces[i].eval(t, 0);
      const Vec3 a = pieces[i].eval(t, 2);
      const Vec3 f = with_force ? plan.force.eval(t, 0) : Vec3::Zero();

      // ground reaction needed to produce a under gravity and f
      const Vec3 ground(m * a.x() - f.x(), m * a.y() - f.y(), m * (a.z() + g) - f.z());
      const Vec3 moment = q.cross(m * (a + Vec3(0, 0, g))) - (q + lever_body).cross(f);
      const Vec3& n = poly.normal;
      const Vec3 nxT = n.cross(moment);
      const double nF = n.dot(ground);
      for (const HalfSpace& hs : poly.halfspaces) worse(rep.zmp, hs.a * nxT.x() + hs.b * nxT.y() + hs.c * nF);

      const double cap = mu * ground.z();
      worse(rep.friction, std::abs(ground.x()) - cap);
      worse(rep.friction, std::abs(ground.y()) - cap);
    }
  }

  if (with_force) {
    for (std::size_t j = 0; j < fpieces.size(); ++j) {
      const AxisMask mask = j < plan.force_free.size() ? plan.force_free[j] : contact.free_mask;
      const bool all_free = mask[0] && mask[1] && mask[2];
      for (double t : sample_times(fpieces[j].domain)) {
        const Vec3 f = fpieces[j].eval(t, 0);
        for (int k = 0; k < 3; ++k) {
          if (mask[static_cast<std::size_t>(k)]) {
            worse(rep.free_force, std::abs(f(k)));
          } else {
            worse(rep.box, f(k) - contact.f_hi(k));
            worse(rep.box, contact.f_lo(k) - f(k));
          }
        }
        if (!all_free && contact.jacobian.cols() > 0) {
          const VecX tau = contact.jacobian.transpose() * f;
          worse(rep.torque, (tau - contact.tau_limit).maxCoeff());
        }
      }
    }
  }
  return rep;
}

}  // namespace lmplan
