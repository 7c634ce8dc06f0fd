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

#include "radiobench/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace radiobench {
namespace {

constexpr double kReflect = 1.0;
constexpr double kExpand = 2.0;
constexpr double kContract = 0.5;
constexpr double kShrink = 0.5;

double safe_eval(const std::function<double(const Eigen::VectorXd&)>& fn,
                 const Eigen::VectorXd& x) {
  const double v = fn(x);
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

NelderMeadResult run_once(
    const std::function<double(const Eigen::VectorXd&)>& fn,
    const Eigen::VectorXd& start, const Eigen::VectorXd& step,
    const NelderMeadOptions& opt, int budget) {
  const auto n = start.size();
  std::vector<Eigen::VectorXd> simplex(n + 1, start);
  std::vector<double> values(n + 1);
  for (Eigen::Index i = 0; i < n; ++i) simplex[i + 1][i] += step[i];
  for (Eigen::Index i = 0; i <= n; ++i) values[i] = safe_eval(fn, simplex[i]);

  std::vector<std::size_t> order(n + 1);
  NelderMeadResult result;
  int iter = 0;
  for (; iter < budget; ++iter) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
      return values[a] < values[b];
    });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second_worst = order[n - 1];

    double diameter = 0.0;
    for (std::size_t i : order) {
      diameter = std::max(
          diameter, (simplex[i] - simplex[best]).lpNorm<Eigen::Infinity>());
    }
    const double spread = values[worst] - values[best];
    if (diameter <= opt.xtol && spread <= opt.ftol) {
      result.converged = true;
      break;
    }
    if (diameter == 0.0) {
      result.converged = true;
      break;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (std::size_t i : order) {
      if (i != worst) centroid += simplex[i];
    }
    centroid /= static_cast<double>(n);

    const Eigen::VectorXd reflected =
        centroid + kReflect * (centroid - simplex[worst]);
    const double f_reflected = safe_eval(fn, reflected);
    if (f_reflected < values[best]) {
      const Eigen::VectorXd expanded =
          centroid + kExpand * (reflected - centroid);
      const double f_expanded = safe_eval(fn, expanded);
      if (f_expanded < f_reflected) {
        simplex[worst] = expanded;
        values[worst] = f_expanded;
      } else {
        simplex[worst] = reflected;
        values[worst] = f_reflected;
      }
      continue;
    }
    if (f_reflected < values[second_worst]) {
      simplex[worst] = reflected;
      values[worst] = f_reflected;
      continue;
    }
    // Contraction, outside or inside.
    const bool outside = f_reflected < values[worst];
    const Eigen::VectorXd contracted =
        outside ? Eigen::VectorXd(centroid + kContract * (reflected - centroid))
                : Eigen::VectorXd(centroid + kContract * (simplex[worst] - centroid));
    const double f_contracted = safe_eval(fn, contracted);
    if (f_contracted < (outside ? f_reflected : values[worst])) {
      simplex[worst] = contracted;
      values[worst] = f_contracted;
      continue;
    }
    for (std::size_t i : order) {
      if (i == best) continue;
      simplex[i] = simplex[best] + kShrink * (simplex[i] - simplex[best]);
      values[i] = safe_eval(fn, simplex[i]);
    }
  }
  const auto best_it = std::min_element(values.begin(), values.end());
  const auto best_idx = static_cast<std::size_t>(best_it - values.begin());
  result.x = simplex[best_idx];
  result.f = values[best_idx];
  result.iterations = iter;
  return result;
}

}  // namespace

NelderMeadResult nelder_mead(
    const std::function<double(const Eigen::VectorXd&)>& objective,
    const Eigen::VectorXd& start, const Eigen::VectorXd& step,
    const NelderMeadOptions& options) {
  NelderMeadResult best = run_once(objective, start, step, options,
                                   options.max_iters);
  int used = best.iterations;
  Eigen::VectorXd restart_step = step;
  for (int r = 0; r < options.max_restarts && used < options.max_iters; ++r) {
    // Smaller restart simplex: the incumbent is already near a minimum.
    restart_step *= 0.1;
    NelderMeadResult next = run_once(objective, best.x, restart_step, options,
                                     options.max_iters - used);
    used += next.iterations;
    const bool improved = next.f < best.f;
    if (improved) {
      next.iterations = used;
      best = std::move(next);
    }
    if (!improved) break;
  }
  best.iterations = used;
  return best;
}

}  // namespace radiobench
