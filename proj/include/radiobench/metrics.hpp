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

#ifndef RADIOBENCH_METRICS_HPP_
#define RADIOBENCH_METRICS_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "radiobench/dataset.hpp"
#include "radiobench/geometry.hpp"
#include "radiobench/localiser_zoo.hpp"
#include "radiobench/nn.hpp"
#include "radiobench/parallel.hpp"

namespace radiobench {

// --- error CDFs ----------------------------------------------------------------

class ErrorCdf {
 public:
  ErrorCdf() = default;
  // Throws DegenerateInputError when empty, DomainError on negative or
  // non-finite values.
  explicit ErrorCdf(std::vector<double> errors);

  // p in [0, 100]; linear interpolation between order statistics at rank
  // p/100 * (n - 1).
  double percentile(double p) const;
  double median() const { return percentile(50.0); }
  double mean() const;
  std::size_t size() const { return sorted_.size(); }
  const std::vector<double>& sorted() const { return sorted_; }
  nlohmann::json summary() const;

 private:
  std::vector<double> sorted_;
};

ErrorCdf error_cdf(std::span<const Vec3> estimates, std::span<const Vec3> truths);
// Absolute errors; angles are wrapped to [0, pi] first.
ErrorCdf error_cdf(std::span<const double> estimates, std::span<const double> truths,
                   bool angular);

// --- chart quality -------------------------------------------------------------

struct ChartScore {
  double continuity = 0.0;
  double trustworthiness = 0.0;
  std::size_t k = 0;
  nlohmann::json to_json() const;
};

// Rows are points. Neighbour ranks use Euclidean distance; equal distances
// are ordered by point index. Requires n > 3k/2 + 1 and 1 <= k < n.
double trustworthiness(const nn::Matrix& high, const nn::Matrix& low, std::size_t k,
                       par::Exec exec = par::Exec::kParallel);
double continuity(const nn::Matrix& high, const nn::Matrix& low, std::size_t k,
                  par::Exec exec = par::Exec::kParallel);
ChartScore chart_score(const nn::Matrix& high, const nn::Matrix& low, std::size_t k,
                       par::Exec exec = par::Exec::kParallel);

// --- Wasserstein -----------------------------------------------------------------

// Exact W2 between two 1D empirical distributions of any sizes.
double wasserstein_1d(std::vector<double> a, std::vector<double> b);

// Sliced W2 between row sets. One-dimensional inputs are compared exactly;
// otherwise the mean 1D W2 over seeded random unit directions.
double wasserstein_distance(const nn::Matrix& a, const nn::Matrix& b,
                            std::size_t n_projections = 128, std::uint64_t seed = 0,
                            par::Exec exec = par::Exec::kParallel);

struct WassersteinOptions {
  bool per_locator = true;
  double cell_pitch_m = 1.0;
  std::size_t n_projections = 128;
  std::uint64_t seed = 0;
};

struct WassersteinMatrix {
  std::vector<std::string> dataset_names;
  // values[l](i, j): locator l (a single entry when not per-locator).
  std::vector<nn::Matrix> values;
  nlohmann::json to_json() const;
  std::string to_csv() const;
};

// Embeds each dataset through the frozen AE encoder, groups samples by
// spatial grid cell, and averages per-cell distances over the cells both
// datasets populate. Throws ConfigError for models without a latent space.
WassersteinMatrix wasserstein_matrix(const ModelVariant& reference,
                                     std::span<const Dataset> datasets,
                                     const WassersteinOptions& options = {},
                                     par::Exec exec = par::Exec::kParallel);

// --- loss landscapes -------------------------------------------------------------

// Loss of a flat parameter vector. Must be safe to call concurrently.
using FlatLoss = std::function<double(std::span<const double>)>;

struct LandscapeOptions {
  std::size_t grid_n = 41;  // odd, so (0, 0) is a grid point
  std::uint64_t seed = 0;
  // Rescale each block of the directions to the norm of the matching block
  // of the centre parameters.
  bool filter_normalize = true;
};

struct LossLandscape {
  std::vector<double> axis;        // grid coordinates in [-1, 1]
  nn::Matrix values;               // values(i, j) at (axis[i], axis[j])
  std::vector<double> direction1;  // delta_1
  std::vector<double> direction2;  // delta_2
  std::vector<double> centre;      // theta
  double centre_loss = 0.0;
  double trivial_loss = 1.0;  // normaliser for sharpness summaries
  nlohmann::json to_json() const;
  std::string to_csv() const;
};

// Two seeded Gaussian directions, per-block normalised.
std::pair<std::vector<double>, std::vector<double>> landscape_directions(
    std::span<const double> theta, std::span<const std::size_t> block_sizes,
    std::uint64_t seed, bool filter_normalize);

LossLandscape loss_landscape(std::span<const double> theta,
                             std::span<const std::size_t> block_sizes, const FlatLoss& loss,
                             const LandscapeOptions& options = {},
                             par::Exec exec = par::Exec::kParallel);

// Mean loss increase over n_angles points on the circle of `radius` in the
// (delta_1, delta_2) plane.
double sharpness(std::span<const double> theta, std::span<const double> d1,
                 std::span<const double> d2, const FlatLoss& loss, double radius = 0.5,
                 std::size_t n_angles = 16, par::Exec exec = par::Exec::kParallel);

// Model wrappers. The loss is the variant's training objective on (a seeded
// subset of at most max_samples of) data; blocks are the individual weight
// and bias tensors.
struct ModelLossProbe {
  std::vector<double> theta;
  std::vector<std::size_t> block_sizes;
  FlatLoss loss;
  double trivial_loss = 1.0;
};
ModelLossProbe model_loss_probe(const ModelVariant& model, const Dataset& data,
                                std::size_t max_samples = 512, std::uint64_t seed = 0);
LossLandscape loss_landscape(const ModelVariant& model, const Dataset& data,
                             const LandscapeOptions& options = {},
                             std::size_t max_samples = 512,
                             par::Exec exec = par::Exec::kParallel);
// Sharpness of the normalised loss (increase divided by the trivial loss).
double model_sharpness(const ModelVariant& model, const Dataset& data, std::uint64_t seed,
                       double radius = 0.5, std::size_t n_angles = 16,
                       std::size_t max_samples = 512, par::Exec exec = par::Exec::kParallel);

}  // namespace radiobench

#endif  // RADIOBENCH_METRICS_HPP_
