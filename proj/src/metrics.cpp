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

#include "radiobench/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "radiobench/errors.hpp"
#include "radiobench/rng.hpp"

namespace radiobench {

using nn::Matrix;

// --- error CDFs ----------------------------------------------------------------

ErrorCdf::ErrorCdf(std::vector<double> errors) : sorted_(std::move(errors)) {
  if (sorted_.empty()) throw DegenerateInputError("error CDF needs at least one error");
  for (double e : sorted_) {
    if (!std::isfinite(e) || e < 0.0) throw DomainError("errors must be finite and >= 0");
  }
  std::sort(sorted_.begin(), sorted_.end());
}

double ErrorCdf::percentile(double p) const {
  if (sorted_.empty()) throw DegenerateInputError("empty error CDF");
  if (!(p >= 0.0 && p <= 100.0)) throw DomainError("percentile must be in [0, 100]");
  const double rank = p / 100.0 * static_cast<double>(sorted_.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, sorted_.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return sorted_[lo] + frac * (sorted_[hi] - sorted_[lo]);
}

double ErrorCdf::mean() const {
  if (sorted_.empty()) throw DegenerateInputError("empty error CDF");
  return std::accumulate(sorted_.begin(), sorted_.end(), 0.0) /
         static_cast<double>(sorted_.size());
}

nlohmann::json ErrorCdf::summary() const {
  return {{"n", size()},         {"mean", mean()},
          {"p10", percentile(10)}, {"p25", percentile(25)},
          {"median", median()},    {"p75", percentile(75)},
          {"p90", percentile(90)}, {"p95", percentile(95)},
          {"max", sorted_.back()}};
}

ErrorCdf error_cdf(std::span<const Vec3> estimates, std::span<const Vec3> truths) {
  if (estimates.size() != truths.size()) throw ShapeError("estimate/truth counts differ");
  std::vector<double> e(estimates.size());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = (estimates[i] - truths[i]).norm();
  return ErrorCdf(std::move(e));
}

ErrorCdf error_cdf(std::span<const double> estimates, std::span<const double> truths,
                   bool angular) {
  if (estimates.size() != truths.size()) throw ShapeError("estimate/truth counts differ");
  std::vector<double> e(estimates.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double d = estimates[i] - truths[i];
    e[i] = angular ? std::abs(std::remainder(d, 2.0 * kPi)) : std::abs(d);
  }
  return ErrorCdf(std::move(e));
}

// --- chart quality -------------------------------------------------------------

namespace {

// Indices of all other points ordered by distance from row i, ties by index.
std::vector<std::size_t> neighbour_order(const Matrix& x, std::size_t i) {
  const auto n = static_cast<std::size_t>(x.rows());
  std::vector<double> d(n);
  for (std::size_t j = 0; j < n; ++j) {
    d[j] = (x.row(static_cast<Eigen::Index>(j)) - x.row(static_cast<Eigen::Index>(i)))
               .squaredNorm();
  }
  std::vector<std::size_t> order;
  order.reserve(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    if (j != i) order.push_back(j);
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return d[a] < d[b] || (d[a] == d[b] && a < b);
  });
  return order;
}

// Sum over i of (rank_ref(i, j) - k) for j among i's k nearest in `probe`
// but not among its k nearest in `ref`; ranks are 1-based.
double rank_penalty(const Matrix& ref, const Matrix& probe, std::size_t k, par::Exec exec) {
  const auto n = static_cast<std::size_t>(ref.rows());
  std::vector<double> per_point(n, 0.0);
  par::for_each_task(n, exec, [&](std::size_t i) {
    const auto ref_order = neighbour_order(ref, i);
    const auto probe_order = neighbour_order(probe, i);
    std::vector<std::size_t> rank(n, 0);
    for (std::size_t r = 0; r < ref_order.size(); ++r) rank[ref_order[r]] = r + 1;
    double acc = 0.0;
    for (std::size_t r = 0; r < k; ++r) {
      const std::size_t j = probe_order[r];
      if (rank[j] > k) acc += static_cast<double>(rank[j] - k);
    }
    per_point[i] = acc;
  });
  return std::accumulate(per_point.begin(), per_point.end(), 0.0);
}

double rank_score(const Matrix& ref, const Matrix& probe, std::size_t k, par::Exec exec) {
  if (ref.rows() != probe.rows()) throw ShapeError("point counts differ");
  const auto n = static_cast<double>(ref.rows());
  const auto kd = static_cast<double>(k);
  if (k < 1 || kd >= n) throw DomainError("k must be in [1, n)");
  const double denom = n * kd * (2.0 * n - 3.0 * kd - 1.0);
  if (!(denom > 0.0)) throw DomainError("n must exceed 3k/2 + 1");
  const double score = 1.0 - 2.0 / denom * rank_penalty(ref, probe, k, exec);
  return std::clamp(score, 0.0, 1.0);
}

}  // namespace

double trustworthiness(const Matrix& high, const Matrix& low, std::size_t k, par::Exec exec) {
  return rank_score(high, low, k, exec);
}

double continuity(const Matrix& high, const Matrix& low, std::size_t k, par::Exec exec) {
  return rank_score(low, high, k, exec);
}

ChartScore chart_score(const Matrix& high, const Matrix& low, std::size_t k, par::Exec exec) {
  return {continuity(high, low, k, exec), trustworthiness(high, low, k, exec), k};
}

nlohmann::json ChartScore::to_json() const {
  return {{"continuity", continuity}, {"trustworthiness", trustworthiness}, {"k", k}};
}

// --- Wasserstein -----------------------------------------------------------------

double wasserstein_1d(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw DegenerateInputError("empty point set");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  // Quantile functions are step functions with breaks at i/na and j/nb;
  // walk both break sequences in units of 1/(na*nb).
  const std::size_t na = a.size(), nb = b.size();
  std::size_t i = 0, j = 0, t = 0;
  double acc = 0.0;
  const std::size_t total = na * nb;
  while (t < total) {
    const std::size_t next = std::min((i + 1) * nb, (j + 1) * na);
    const double d = a[i] - b[j];
    acc += static_cast<double>(next - t) * d * d;
    t = next;
    if (t == (i + 1) * nb) ++i;
    if (t == (j + 1) * na) ++j;
  }
  return std::sqrt(acc / static_cast<double>(total));
}

double wasserstein_distance(const Matrix& a, const Matrix& b, std::size_t n_projections,
                            std::uint64_t seed, par::Exec exec) {
  if (a.rows() == 0 || b.rows() == 0) throw DegenerateInputError("empty point set");
  if (a.cols() != b.cols()) throw ShapeError("point sets have different dimensions");
  auto column = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  if (a.cols() == 1) return wasserstein_1d(column(a.col(0)), column(b.col(0)));
  if (n_projections < 1) throw ConfigError("n_projections must be >= 1");
  std::vector<double> per(n_projections);
  par::for_each_index(n_projections, exec, [&](std::size_t p) {
    Rng rng = make_rng(seed, {0x51ced, p});
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::VectorXd dir(a.cols());
    do {
      for (Eigen::Index c = 0; c < dir.size(); ++c) dir(c) = g(rng);
    } while (dir.norm() == 0.0);
    dir.normalize();
    per[p] = wasserstein_1d(column(a * dir), column(b * dir));
  });
  return std::accumulate(per.begin(), per.end(), 0.0) / static_cast<double>(n_projections);
}

nlohmann::json WassersteinMatrix::to_json() const {
  nlohmann::json mats = nlohmann::json::array();
  for (const auto& m : values) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      nlohmann::json r = nlohmann::json::array();
      for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
      rows.push_back(r);
    }
    mats.push_back(rows);
  }
  return {{"datasets", dataset_names}, {"per_locator", mats}};
}

std::string WassersteinMatrix::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "locator,row,col,distance\n";
  for (std::size_t l = 0; l < values.size(); ++l) {
    for (Eigen::Index i = 0; i < values[l].rows(); ++i) {
      for (Eigen::Index j = 0; j < values[l].cols(); ++j) {
        out << l << ',' << dataset_names[static_cast<std::size_t>(i)] << ','
            << dataset_names[static_cast<std::size_t>(j)] << ',' << values[l](i, j) << '\n';
      }
    }
  }
  return out.str();
}

WassersteinMatrix wasserstein_matrix(const ModelVariant& reference,
                                     std::span<const Dataset> datasets,
                                     const WassersteinOptions& options, par::Exec exec) {
  if (reference.spec().family != Family::kAutoencoder) {
    throw ConfigError(reference.spec().name() +
                      " has no latent space; Wasserstein matrices need an AE encoder");
  }
  if (datasets.empty()) throw DegenerateInputError("no datasets to compare");
  if (!(options.cell_pitch_m > 0.0)) throw ConfigError("cell pitch must be > 0");
  const std::size_t n_sets = datasets.size();
  const std::size_t n_groups = options.per_locator ? reference.n_locators() : 1;

  using Key = std::array<long long, 3>;
  struct Grouped {
    std::map<Key, std::vector<std::size_t>> cells;
    std::vector<Matrix> latents;  // per group
  };
  std::vector<Grouped> g(n_sets);
  for (std::size_t d = 0; d < n_sets; ++d) {
    const Dataset& ds = datasets[d];
    if (ds.empty()) throw DegenerateInputError("dataset '" + ds.name + "' is empty");
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const Vec3& p = ds.samples[i].position;
      g[d].cells[{std::llround(p.x() / options.cell_pitch_m),
                  std::llround(p.y() / options.cell_pitch_m),
                  std::llround(p.z() / options.cell_pitch_m)}]
          .push_back(i);
    }
    if (options.per_locator) {
      for (std::size_t l = 0; l < n_groups; ++l) g[d].latents.push_back(reference.embed_locator(ds, l));
    } else {
      g[d].latents.push_back(reference.embed(ds));
    }
  }

  struct Task {
    std::size_t group, i, j;
  };
  std::vector<Task> tasks;
  for (std::size_t l = 0; l < n_groups; ++l) {
    for (std::size_t i = 0; i < n_sets; ++i) {
      for (std::size_t j = 0; j <= i; ++j) tasks.push_back({l, i, j});
    }
  }
  std::vector<double> result(tasks.size());
  par::for_each_task(tasks.size(), exec, [&](std::size_t t) {
    const auto [l, i, j] = tasks[t];
    const Matrix& za = g[i].latents[l];
    const Matrix& zb = g[j].latents[l];
    double acc = 0.0;
    std::size_t shared = 0;
    for (const auto& [key, rows_a] : g[i].cells) {
      const auto it = g[j].cells.find(key);
      if (it == g[j].cells.end()) continue;
      Matrix a(static_cast<Eigen::Index>(rows_a.size()), za.cols());
      for (std::size_t r = 0; r < rows_a.size(); ++r) a.row(static_cast<Eigen::Index>(r)) = za.row(static_cast<Eigen::Index>(rows_a[r]));
      Matrix b(static_cast<Eigen::Index>(it->second.size()), zb.cols());
      for (std::size_t r = 0; r < it->second.size(); ++r) b.row(static_cast<Eigen::Index>(r)) = zb.row(static_cast<Eigen::Index>(it->second[r]));
      acc += wasserstein_distance(a, b, options.n_projections, options.seed, par::Exec::kSerial);
      ++shared;
    }
    if (shared == 0) {
      throw DegenerateInputError("datasets '" + datasets[i].name + "' and '" +
                                 datasets[j].name + "' share no grid cell");
    }
    result[t] = acc / static_cast<double>(shared);
  });

  WassersteinMatrix out;
  for (const auto& ds : datasets) out.dataset_names.push_back(ds.name);
  out.values.assign(n_groups, Matrix::Zero(static_cast<Eigen::Index>(n_sets),
                                           static_cast<Eigen::Index>(n_sets)));
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const auto [l, i, j] = tasks[t];
    out.values[l](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = result[t];
    out.values[l](static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = result[t];
  }
  return out;
}

// --- loss landscapes -------------------------------------------------------------

std::pair<std::vector<double>, std::vector<double>> landscape_directions(
    std::span<const double> theta, std::span<const std::size_t> block_sizes,
    std::uint64_t seed, bool filter_normalize) {
  const std::size_t total = std::accumulate(block_sizes.begin(), block_sizes.end(), std::size_t{0});
  if (total != theta.size()) throw ShapeError("block sizes do not cover the parameters");
  auto draw = [&](std::uint64_t which) {
    Rng rng = make_rng(seed, {0x1a9d, which});
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<double> d(theta.size());
    for (auto& v : d) v = g(rng);
    if (!filter_normalize) return d;
    std::size_t start = 0;
    for (std::size_t size : block_sizes) {
      double dn = 0.0, tn = 0.0;
      for (std::size_t i = start; i < start + size; ++i) {
        dn += d[i] * d[i];
        tn += theta[i] * theta[i];
      }
      const double f = dn > 0.0 ? std::sqrt(tn / dn) : 0.0;
      for (std::size_t i = start; i < start + size; ++i) d[i] *= f;
      start += size;
    }
    return d;
  };
  return {draw(1), draw(2)};
}

namespace {

std::vector<double> offset(std::span<const double> theta, std::span<const double> d1,
                           std::span<const double> d2, double a, double b) {
  std::vector<double> out(theta.begin(), theta.end());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += a * d1[i] + b * d2[i];
  return out;
}

}  // namespace

LossLandscape loss_landscape(std::span<const double> theta,
                             std::span<const std::size_t> block_sizes, const FlatLoss& loss,
                             const LandscapeOptions& options, par::Exec exec) {
  const std::size_t n = options.grid_n;
  if (n < 3 || n % 2 == 0) throw ConfigError("landscape grid_n must be odd and >= 3");
  LossLandscape out;
  std::tie(out.direction1, out.direction2) =
      landscape_directions(theta, block_sizes, options.seed, options.filter_normalize);
  out.centre.assign(theta.begin(), theta.end());
  out.centre_loss = loss(theta);
  if (!std::isfinite(out.centre_loss)) throw NumericError("loss at the landscape centre is not finite");
  out.axis.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.axis[i] = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  out.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  par::for_each_task(n * n, exec, [&](std::size_t t) {
    const std::size_t i = t / n, j = t % n;
    out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
        loss(offset(theta, out.direction1, out.direction2, out.axis[i], out.axis[j]));
  });
  return out;
}

nlohmann::json LossLandscape::to_json() const {
  nlohmann::json grid = nlohmann::json::array();
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < values.cols(); ++j) row.push_back(values(i, j));
    grid.push_back(row);
  }
  return {{"axis", axis},
          {"values", grid},
          {"centre_loss", centre_loss},
          {"trivial_loss", trivial_loss},
          {"n_parameters", centre.size()}};
}

std::string LossLandscape::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "alpha,beta,loss\n";
  for (std::size_t i = 0; i < axis.size(); ++i) {
    for (std::size_t j = 0; j < axis.size(); ++j) {
      out << axis[i] << ',' << axis[j] << ','
          << values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) << '\n';
    }
  }
  return out.str();
}

double sharpness(std::span<const double> theta, std::span<const double> d1,
                 std::span<const double> d2, const FlatLoss& loss, double radius,
                 std::size_t n_angles, par::Exec exec) {
  if (d1.size() != theta.size() || d2.size() != theta.size()) {
    throw ShapeError("directions must match the parameter count");
  }
  if (n_angles < 1) throw ConfigError("n_angles must be >= 1");
  const double centre = loss(theta);
  if (!std::isfinite(centre)) throw NumericError("loss at the centre is not finite");
  std::vector<double> rise(n_angles);
  par::for_each_task(n_angles, exec, [&](std::size_t k) {
    const double a = 2.0 * kPi * static_cast<double>(k) / static_cast<double>(n_angles);
    rise[k] = loss(offset(theta, d1, d2, radius * std::cos(a), radius * std::sin(a))) - centre;
  });
  return std::accumulate(rise.begin(), rise.end(), 0.0) / static_cast<double>(n_angles);
}

ModelLossProbe model_loss_probe(const ModelVariant& model, const Dataset& data,
                                std::size_t max_samples, std::uint64_t seed) {
  if (!model.is_learnt()) throw ConfigError("the classical baseline has no parameters");
  if (data.empty()) throw DegenerateInputError("no data for the loss probe");
  Dataset sub;
  if (data.size() <= max_samples) {
    sub = data;
  } else if (model.spec().family == Family::kChannelChart) {
    // Triplets need time-contiguous samples.
    Rng rng = make_rng(seed, {0x5ab});
    std::uniform_int_distribution<std::size_t> start(0, data.size() - max_samples);
    const std::size_t s = start(rng);
    std::vector<std::size_t> idx(max_samples);
    std::iota(idx.begin(), idx.end(), s);
    sub = data.subset(idx);
  } else {
    Rng rng = make_rng(seed, {0x5ab});
    std::vector<std::size_t> idx(data.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(max_samples);
    std::sort(idx.begin(), idx.end());
    sub = data.subset(idx);
  }
  ModelLossProbe probe;
  const auto params = model.parameters();
  probe.theta = nn::flatten(params);
  for (const auto* p : params) probe.block_sizes.push_back(static_cast<std::size_t>(p->value.size()));
  probe.trivial_loss = model.trivial_loss(sub);
  probe.loss = [model, sub](std::span<const double> theta) {
    ModelVariant m = model;
    nn::unflatten(m.parameters(), theta);
    return m.loss(sub);
  };
  return probe;
}

LossLandscape loss_landscape(const ModelVariant& model, const Dataset& data,
                             const LandscapeOptions& options, std::size_t max_samples,
                             par::Exec exec) {
  const ModelLossProbe probe = model_loss_probe(model, data, max_samples, options.seed);
  LossLandscape out = loss_landscape(probe.theta, probe.block_sizes, probe.loss, options, exec);
  out.trivial_loss = probe.trivial_loss;
  return out;
}

double model_sharpness(const ModelVariant& model, const Dataset& data, std::uint64_t seed,
                       double radius, std::size_t n_angles, std::size_t max_samples,
                       par::Exec exec) {
  const ModelLossProbe probe = model_loss_probe(model, data, max_samples, seed);
  const auto [d1, d2] = landscape_directions(probe.theta, probe.block_sizes, seed, true);
  return sharpness(probe.theta, d1, d2, probe.loss, radius, n_angles, exec) /
         probe.trivial_loss;
}

}  // namespace radiobench
