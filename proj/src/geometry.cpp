// Copyright 2026 The RadioBench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "radiobench/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "radiobench/errors.hpp"
#include "radiobench/nelder_mead.hpp"

namespace radiobench {
namespace {

constexpr double kFrameTol = 1e-9;
constexpr double kHalfPi = kPi / 2.0;

void check_sizes(std::span<const TaoaTriple> taoas,
                 std::span<const LocatorPose> poses, const MleConfig& cfg) {
  if (taoas.empty()) throw ConfigError("at least one locator is required");
  if (taoas.size() != poses.size()) {
    throw ShapeError("taoa count " + std::to_string(taoas.size()) +
                     " does not match pose count " +
                     std::to_string(poses.size()));
  }
  cfg.validate(poses.size());
}

// Range residual d_m - |p_m - x| - tau*c and AoA alignment term for one
// locator.
struct LocatorTerms {
  double residual;
  double alignment;
};

LocatorTerms locator_terms(const Vec3& x, double tau, const TaoaTriple& taoa,
                           const LocatorPose& pose, double c) {
  const Vec3 offset = x - pose.position;
  const double dist = offset.norm();
  if (!(dist > 0.0)) {
    throw DegenerateGeometryError(
        "likelihood evaluated at a locator position");
  }
  const Vec3 u = angles_to_unit_vector(taoa.azimuth, taoa.elevation);
  // u^T Omega^T (x - p)/|x - p|
  const double alignment = u.dot(pose.orientation.transpose() * offset) / dist;
  return {taoa.range - dist - tau * c, alignment};
}

}  // namespace

bool Box::contains(const Vec3& p, double slack) const {
  return (p.array() >= lo.array() - slack).all() &&
         (p.array() <= hi.array() + slack).all();
}

void Box::validate() const {
  if (!(hi.array() > lo.array()).all() || !lo.allFinite() || !hi.allFinite()) {
    throw ConfigError("bounds: box must have hi > lo on every axis");
  }
}

bool LocatorPose::is_valid() const {
  if (!position.allFinite() || !orientation.allFinite()) return false;
  const Mat3 gram = orientation.transpose() * orientation;
  if ((gram - Mat3::Identity()).cwiseAbs().maxCoeff() > kFrameTol) return false;
  return std::abs(orientation.determinant() - 1.0) <= kFrameTol;
}

void LocatorPose::validate() const {
  if (!is_valid()) {
    throw DomainError(
        "locator orientation must be orthonormal with determinant +1");
  }
}

void TaoaTriple::validate() const {
  if (!(azimuth > -kPi && azimuth <= kPi)) {
    throw DomainError("azimuth " + std::to_string(azimuth) +
                      " outside (-pi, pi]");
  }
  if (!(elevation >= -kHalfPi && elevation <= kHalfPi)) {
    throw DomainError("elevation " + std::to_string(elevation) +
                      " outside [-pi/2, pi/2]");
  }
  if (!(range >= 0.0) || !std::isfinite(range)) {
    throw DomainError("range must be finite and non-negative");
  }
}

MleConfig MleConfig::defaults(std::size_t n_locators, double sigma_m,
                              double kappa) {
  MleConfig cfg;
  cfg.toa_sigmas.assign(n_locators, sigma_m);
  cfg.toa_weights.assign(n_locators, 1.0 / (sigma_m * sigma_m));
  cfg.aoa_concentrations.assign(n_locators, kappa);
  return cfg;
}

void MleConfig::validate(std::size_t n_locators) const {
  if (toa_weights.size() != n_locators || toa_sigmas.size() != n_locators ||
      aoa_concentrations.size() != n_locators) {
    throw ConfigError("MLE config needs one weight, sigma and kappa per "
                      "locator");
  }
  for (std::size_t m = 0; m < n_locators; ++m) {
    if (!(toa_sigmas[m] > 0.0)) {
      throw ConfigError("toa_sigmas must be positive");
    }
    if (!(toa_weights[m] >= 0.0) || !(aoa_concentrations[m] >= 0.0)) {
      throw ConfigError("toa_weights and aoa_concentrations must be >= 0");
    }
  }
  if (restarts < 1) throw ConfigError("restarts must be >= 1");
  if (!(speed_of_light > 0.0)) throw ConfigError("speed_of_light must be > 0");
  if (search_box) search_box->validate();
}

Vec3 angles_to_unit_vector(double azimuth, double elevation) {
  TaoaTriple{azimuth, elevation, 0.0}.validate();
  const double ce = std::cos(elevation);
  return {ce * std::cos(azimuth), ce * std::sin(azimuth), std::sin(elevation)};
}

Vec3 taoa_to_position(const LocatorPose& pose, const TaoaTriple& taoa) {
  pose.validate();
  taoa.validate();
  return pose.orientation * angles_to_unit_vector(taoa.azimuth,
                                                  taoa.elevation) *
             taoa.range +
         pose.position;
}

TaoaTriple position_to_taoa(const LocatorPose& pose, const Vec3& user) {
  pose.validate();
  const Vec3 local = pose.orientation.transpose() * (user - pose.position);
  const double range = local.norm();
  if (!(range > 0.0)) {
    throw DegenerateGeometryError("user coincides with locator position");
  }
  const double horizontal = std::hypot(local.x(), local.y());
  TaoaTriple out;
  out.range = range;
  out.elevation = std::atan2(local.z(), horizontal);
  if (horizontal <= 1e-15 * range) {
    out.azimuth = 0.0;
    out.elevation = local.z() > 0.0 ? kHalfPi : -kHalfPi;
  } else {
    out.azimuth = std::atan2(local.y(), local.x());
    if (out.azimuth <= -kPi) out.azimuth = kPi;
  }
  return out;
}

double joint_log_likelihood(const Vec3& x, double tau,
                            std::span<const TaoaTriple> taoas,
                            std::span<const LocatorPose> poses,
                            const MleConfig& cfg) {
  check_sizes(taoas, poses, cfg);
  // ln(1/sqrt(2 pi))
  const double log_norm = -0.5 * std::log(2.0 * kPi);
  double toa = 0.0;
  double aoa = 0.0;
  for (std::size_t m = 0; m < poses.size(); ++m) {
    const LocatorTerms t =
        locator_terms(x, tau, taoas[m], poses[m], cfg.speed_of_light);
    const double s = cfg.toa_sigmas[m];
    toa += cfg.toa_weights[m] *
           (log_norm - t.residual * t.residual / (2.0 * s * s));
    aoa += cfg.aoa_concentrations[m] * t.alignment;
  }
  return toa + aoa;
}

double joint_log_likelihood_unsimplified(const Vec3& x, double tau,
                                         std::span<const TaoaTriple> taoas,
                                         std::span<const LocatorPose> poses,
                                         const MleConfig& cfg) {
  check_sizes(taoas, poses, cfg);
  double total = 0.0;
  for (std::size_t m = 0; m < poses.size(); ++m) {
    const LocatorTerms t =
        locator_terms(x, tau, taoas[m], poses[m], cfg.speed_of_light);
    const double s = cfg.toa_sigmas[m];
    const double density = (1.0 / std::sqrt(2.0 * kPi)) *
                           std::exp(-(t.residual * t.residual) / (2.0 * s * s));
    total += cfg.toa_weights[m] * std::log(density);
  }
  for (std::size_t m = 0; m < poses.size(); ++m) {
    const LocatorTerms t =
        locator_terms(x, tau, taoas[m], poses[m], cfg.speed_of_light);
    total += cfg.aoa_concentrations[m] * t.alignment;
  }
  return total;
}

PositionEstimate joint_mle_estimate(std::span<const TaoaTriple> taoas,
                                    std::span<const LocatorPose> poses,
                                    const MleConfig& cfg) {
  if (poses.size() < 2) {
    throw ConfigError("joint MLE needs at least 2 locators, got " +
                      std::to_string(poses.size()));
  }
  check_sizes(taoas, poses, cfg);
  for (const auto& t : taoas) {
    if (!std::isfinite(t.azimuth) || !std::isfinite(t.elevation) ||
        !std::isfinite(t.range)) {
      throw OptimisationError("non-finite TAoA input to joint MLE");
    }
  }

  Box box;
  if (cfg.search_box) {
    box = *cfg.search_box;
  } else {
    box.lo = poses[0].position;
    box.hi = poses[0].position;
    for (const auto& p : poses) {
      box.lo = box.lo.cwiseMin(p.position);
      box.hi = box.hi.cwiseMax(p.position);
    }
    box.lo.array() -= 1.0;
    box.hi.array() += 1.0;
  }

  // tau is optimised in nanoseconds.
  constexpr double kNs = 1e-9;
  auto log_likelihood = [&](const Eigen::VectorXd& v) {
    try {
      return joint_log_likelihood(v.head<3>(), v[3] * kNs, taoas, poses, cfg);
    } catch (const DegenerateGeometryError&) {
      return -std::numeric_limits<double>::infinity();
    }
  };
  auto objective = [&](const Eigen::VectorXd& v) {
    const double ll = log_likelihood(v);
    if (std::isnan(ll)) throw OptimisationError("likelihood evaluated to NaN");
    return -ll;
  };

  // tau (ns) maximising the ToA term at a fixed position: the
  // precision-weighted mean of the range residuals.
  auto profiled_tau = [&](const Vec3& x) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t m = 0; m < poses.size(); ++m) {
      const double a = cfg.toa_weights[m] / (cfg.toa_sigmas[m] * cfg.toa_sigmas[m]);
      num += a * (taoas[m].range - (x - poses[m].position).norm());
      den += a;
    }
    return den > 0.0 ? num / den / cfg.speed_of_light / kNs : 0.0;
  };

  // 8x8x2 start grid with tau profiled out; keep the `restarts` best cells.
  constexpr int kGridXy = 8;
  constexpr int kGridZ = 2;
  std::vector<Eigen::VectorXd> seeds;
  std::vector<double> seed_values;
  const Vec3 ext = box.extent();
  for (int iz = 0; iz < kGridZ; ++iz) {
    for (int iy = 0; iy < kGridXy; ++iy) {
      for (int ix = 0; ix < kGridXy; ++ix) {
        Eigen::VectorXd v(4);
        v << box.lo.x() + (ix + 0.5) / kGridXy * ext.x(),
            box.lo.y() + (iy + 0.5) / kGridXy * ext.y(),
            box.lo.z() + (iz + 0.5) / kGridZ * ext.z(), 0.0;
        v[3] = profiled_tau(v.head<3>());
        seeds.push_back(v);
        seed_values.push_back(objective(v));
      }
    }
  }
  std::vector<std::size_t> order(seeds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return seed_values[a] < seed_values[b];
  });
  const auto n_starts =
      std::min<std::size_t>(static_cast<std::size_t>(cfg.restarts), seeds.size());

  Eigen::VectorXd step(4);
  step << std::max(0.25, 0.1 * ext.x()), std::max(0.25, 0.1 * ext.y()),
      std::max(0.25, 0.1 * ext.z()), 2.0;
  NelderMeadOptions opt;
  opt.max_iters = cfg.max_iters;
  opt.xtol = cfg.tol;
  opt.ftol = 1e-13;

  std::vector<NelderMeadResult> runs(n_starts);
  par::for_each_task(n_starts, cfg.exec, [&](std::size_t r) {
    runs[r] = nelder_mead(objective, seeds[order[r]], step, opt);
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].f < runs[best].f) best = r;
  }
  const auto& win = runs[best];
  if (!std::isfinite(win.f)) {
    throw OptimisationError("joint MLE found no finite likelihood");
  }
  PositionEstimate out;
  out.position = win.x.head<3>();
  out.transmit_time = win.x[3] * kNs;
  out.log_likelihood = joint_log_likelihood(out.position, out.transmit_time,
                                            taoas, poses, cfg);
  return out;
}

Mat3 rotation_about_axis(const Vec3& axis, double angle) {
  if (!(axis.norm() > 0.0)) return Mat3::Identity();
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

Mat3 facing_orientation(const Vec3& forward) {
  Vec3 f(forward.x(), forward.y(), 0.0);
  if (!(f.norm() > 0.0)) {
    throw DegenerateGeometryError("facing direction has no horizontal part");
  }
  f.normalize();
  const Vec3 up = Vec3::UnitZ();
  const Vec3 left = up.cross(f);
  Mat3 m;
  m.col(0) = f;
  m.col(1) = left;
  m.col(2) = up;
  return m;
}

}  // namespace radiobench
