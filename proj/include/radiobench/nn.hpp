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

#ifndef RADIOBENCH_NN_HPP_
#define RADIOBENCH_NN_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace radiobench::nn {

// Rows are samples, columns are features.
using Matrix = Eigen::MatrixXd;

enum class Activation { kIdentity, kRelu, kTanh };

std::string activation_name(Activation a);
Activation activation_from_name(const std::string& name);

// A trainable tensor with its gradient accumulator and momentum buffer.
struct Parameter {
  Matrix value;
  Matrix grad;
  Matrix velocity;

  void zero_grad() { grad.setZero(value.rows(), value.cols()); }
};

// Handle to a node on a Tape.
struct Var {
  std::size_t id = 0;
};

// Reverse-mode autodiff over dense matrices. Every op records its output
// and a closure that pushes the output gradient to its inputs; backward()
// replays the closures in reverse and adds leaf gradients into the bound
// Parameters.
class Tape {
 public:
  Var constant(Matrix value);
  Var param(Parameter& p);

  const Matrix& value(Var v) const { return nodes_[v.id].value; }
  const Matrix& grad(Var v) const { return nodes_[v.id].grad; }
  double scalar(Var v) const;

  // Loss must be 1x1. NumericError if it is not finite.
  void backward(Var loss);

  Var matmul(Var a, Var b);
  Var add_row(Var x, Var row);  // row (1 x c) broadcast over x's rows
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);  // elementwise
  Var scale(Var a, double s);
  Var add_scalar(Var a, double s);
  Var relu(Var a);
  Var tanh(Var a);
  Var activate(Var a, Activation act);
  Var row_sq_norm(Var a);  // n x 1
  Var row_norm(Var a);     // n x 1; gradient 0 where the row is 0
  Var mean(Var a);         // 1 x 1 over all entries
  Var sum(Var a);          // 1 x 1
  // Mean cross-entropy of softmax(logits) against integer class labels.
  Var softmax_cross_entropy(Var logits, std::span<const int> labels);
  // Row-major reshape: (r x c) -> (rows x cols) with r*c == rows*cols.
  Var reshape(Var a, Eigen::Index rows, Eigen::Index cols);
  Var concat_cols(Var a, Var b);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    std::function<void(Tape&, const Node&)> back;
    Parameter* param = nullptr;
  };
  Var push(Matrix value, std::function<void(Tape&, const Node&)> back);
  Matrix& g(Var v);
  std::vector<Node> nodes_;
};

Matrix row_major_reshape(const Matrix& m, Eigen::Index rows, Eigen::Index cols);

struct Dense {
  Parameter weight;  // in x out
  Parameter bias;    // 1 x out
  Activation activation = Activation::kIdentity;
};

// Fully connected network. dims = {in, h1, ..., out}; a single entry gives
// the identity network.
class Mlp {
 public:
  Mlp() = default;
  Mlp(std::vector<int> dims, Activation hidden, Activation output,
      std::uint64_t seed);

  Var forward(Tape& tape, Var x);
  Matrix forward(const Matrix& x) const;

  int input_dim() const { return dims_.front(); }
  int output_dim() const { return dims_.back(); }
  const std::vector<int>& dims() const { return dims_; }
  std::size_t n_layers() const { return layers_.size(); }
  Dense& layer(std::size_t i) { return layers_[i]; }
  const Dense& layer(std::size_t i) const { return layers_[i]; }
  std::uint64_t seed() const { return seed_; }

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  std::size_t n_parameters() const;

  nlohmann::json architecture() const;
  static Mlp from_architecture(const nlohmann::json& j);

 private:
  std::vector<int> dims_ = {1};
  std::vector<Dense> layers_;
  std::uint64_t seed_ = 0;
};

// Flattened parameter values (layer order, weight then bias, row-major).
std::vector<double> flatten(std::span<const Parameter* const> params);
void unflatten(std::span<Parameter* const> params, std::span<const double> flat);
std::vector<double> flatten_velocity(std::span<const Parameter* const> params);
void unflatten_velocity(std::span<Parameter* const> params, std::span<const double> flat);
// SHA-256 over the raw parameter bytes; used to assert frozenness.
std::string parameter_hash(std::span<const Parameter* const> params);

// Mean over rows of the squared Euclidean row error.
Var mse_loss(Tape& tape, Var pred, Var target);
// Mean squared reconstruction error through encoder then decoder.
Var recon_loss(Tape& tape, Mlp& encoder, Mlp& decoder, Var x);
// Mean of max(0, |a - p| - |a - n| + margin).
Var triplet_loss(Tape& tape, Var anchor, Var positive, Var negative,
                 double margin = 1.0);

struct TrainConfig {
  double learning_rate = 1e-2;
  std::size_t batch_size = 32;
  std::size_t epochs = 100;
  double weight_decay = 0.0;
  std::uint64_t seed = 0;
  std::size_t early_stop_patience = 0;  // 0 disables
  double momentum = 0.9;
  double max_grad_norm = 0.0;  // global clipping, 0 disables
  std::size_t first_epoch = 0;  // for resuming; keys the shuffle streams

  void validate() const;
};

struct LossHistory {
  std::vector<double> train;
  std::vector<double> val;  // empty when no validation callback
  std::size_t best_epoch = 0;
};

// Builds the loss of one mini-batch of training indices on the tape.
using BatchLoss = std::function<Var(Tape&, std::span<const std::size_t>)>;
// Validation loss of the current parameters.
using ValidationLoss = std::function<double()>;

// Mini-batch SGD with momentum and L2 weight decay over `params`. With a
// validation callback and patience > 0 the best-validation parameters are
// restored at the end. NumericError names the epoch on divergence.
LossHistory train(std::span<Parameter* const> params, const BatchLoss& loss,
                  std::size_t n_train, const TrainConfig& cfg,
                  const ValidationLoss& val = {});

// Checkpoint container: magic "RBCKPT01", u64 length + JSON header, u64
// count + float64 values, trailing CRC32C.
struct Checkpoint {
  nlohmann::json header;
  std::vector<double> values;
};
std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace radiobench::nn

#endif  // RADIOBENCH_NN_HPP_
