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

#ifndef RADIOBENCH_NELDER_MEAD_HPP_
#define RADIOBENCH_NELDER_MEAD_HPP_

#include <functional>

#include <Eigen/Dense>

namespace radiobench {

struct NelderMeadOptions {
  int max_iters = 4000;
  // Converged once every vertex is within xtol (max-norm) of the best vertex
  // and the objective spread is below ftol.
  double xtol = 1e-10;
  double ftol = 1e-13;
  // Fresh-simplex restarts from the incumbent; stops early when a restart
  // brings no improvement.
  int max_restarts = 3;
};

struct NelderMeadResult {
  Eigen::VectorXd x;
  double f = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Minimises `objective`. Non-finite objective values are treated as +inf so
// the simplex steps away from them.
NelderMeadResult nelder_mead(
    const std::function<double(const Eigen::VectorXd&)>& objective,
    const Eigen::VectorXd& start, const Eigen::VectorXd& step,
    const NelderMeadOptions& options = {});

}  // namespace radiobench

#endif  // RADIOBENCH_NELDER_MEAD_HPP_
