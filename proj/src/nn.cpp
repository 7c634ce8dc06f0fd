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

#include "radiobench/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "radiobench/binary_io.hpp"
#include "radiobench/errors.hpp"
#include "radiobench/rng.hpp"

namespace radiobench::nn {

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::kIdentity: return "identity";
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
  }
  return "identity";
}

Activation activation_from_name(const std::string& name) {
  if (name == "identity") return Activation::kIdentity;
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  throw ConfigError("unknown activation '" + name + "'");
}

// --- tape ------------------------------------------------------------------

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shapes " + std::to_string(a.rows()) +
                     "x" + std::to_string(a.cols()) + " and " +
                     std::to_string(b.rows()) + "x" + std::to_string(b.cols()) +
                     " differ");
  }
}

}  // namespace

Matrix row_major_reshape(const Matrix& m, Eigen::Index rows, Eigen::Index cols) {
  if (rows * cols != m.size()) throw ShapeError("reshape changes element count");
  Matrix out(rows, cols);
  const Eigen::Index src_cols = m.cols();
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) {
      const Eigen::Index flat = r * cols + c;
      out(r, c) = m(flat / src_cols, flat % src_cols);
    }
  }
  return out;
}

Var Tape::push(Matrix value, std::function<void(Tape&, const Node&)> back) {
  Node n;
  n.grad = Matrix::Zero(value.rows(), value.cols());
  n.value = std::move(value);
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Var{nodes_.size() - 1};
}

Matrix& Tape::g(Var v) { return nodes_[v.id].grad; }

Var Tape::constant(Matrix value) { return push(std::move(value), nullptr); }

Var Tape::param(Parameter& p) {
  Var v = push(p.value, nullptr);
  nodes_[v.id].param = &p;
  return v;
}

double Tape::scalar(Var v) const {
  const Matrix& m = value(v);
  if (m.size() != 1) throw ShapeError("expected a scalar node");
  return m(0, 0);
}

void Tape::backward(Var loss) {
  const double l = scalar(loss);
  if (!std::isfinite(l)) throw NumericError("loss is not finite");
  for (auto& n : nodes_) n.grad.setZero();
  nodes_[loss.id].grad(0, 0) = 1.0;
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    const Node& n = nodes_[i];
    if (n.back) n.back(*this, n);
  }
  for (auto& n : nodes_) {
    if (n.param == nullptr) continue;
    Parameter& p = *n.param;
    if (p.grad.rows() != p.value.rows() || p.grad.cols() != p.value.cols()) p.zero_grad();
    p.grad += n.grad;
  }
}

Var Tape::matmul(Var a, Var b) {
  const Matrix& A = value(a);
  const Matrix& B = value(b);
  if (A.cols() != B.rows()) {
    throw ShapeError("matmul: inner dimensions " + std::to_string(A.cols()) +
                     " and " + std::to_string(B.rows()) + " differ");
  }
  return push(A * B, [a, b](Tape& t, const Node& n) {
    t.g(a).noalias() += n.grad * t.value(b).transpose();
    t.g(b).noalias() += t.value(a).transpose() * n.grad;
  });
}

Var Tape::add_row(Var x, Var row) {
  const Matrix& X = value(x);
  const Matrix& R = value(row);
  if (R.rows() != 1 || R.cols() != X.cols()) throw ShapeError("add_row: bad row shape");
  Matrix out = X;
  out.rowwise() += R.row(0);
  return push(std::move(out), [x, row](Tape& t, const Node& n) {
    t.g(x) += n.grad;
    t.g(row) += n.grad.colwise().sum();
  });
}

Var Tape::add(Var a, Var b) {
  require_same_shape(value(a), value(b), "add");
  return push(value(a) + value(b), [a, b](Tape& t, const Node& n) {
    t.g(a) += n.grad;
    t.g(b) += n.grad;
  });
}

Var Tape::sub(Var a, Var b) {
  require_same_shape(value(a), value(b), "sub");
  return push(value(a) - value(b), [a, b](Tape& t, const Node& n) {
    t.g(a) += n.grad;
    t.g(b) -= n.grad;
  });
}

Var Tape::mul(Var a, Var b) {
  require_same_shape(value(a), value(b), "mul");
  return push(value(a).cwiseProduct(value(b)), [a, b](Tape& t, const Node& n) {
    t.g(a) += n.grad.cwiseProduct(t.value(b));
    t.g(b) += n.grad.cwiseProduct(t.value(a));
  });
}

Var Tape::scale(Var a, double s) {
  return push(s * value(a), [a, s](Tape& t, const Node& n) { t.g(a) += s * n.grad; });
}

Var Tape::add_scalar(Var a, double s) {
  return push(value(a).array() + s, [a](Tape& t, const Node& n) { t.g(a) += n.grad; });
}

Var Tape::relu(Var a) {
  return push(value(a).cwiseMax(0.0), [a](Tape& t, const Node& n) {
    t.g(a) += (t.value(a).array() > 0.0).select(n.grad, 0.0);
  });
}

Var Tape::tanh(Var a) {
  return push(value(a).array().tanh().matrix(), [a](Tape& t, const Node& n) {
    t.g(a) += (n.grad.array() * (1.0 - n.value.array().square())).matrix();
  });
}

Var Tape::activate(Var a, Activation act) {
  switch (act) {
    case Activation::kRelu: return relu(a);
    case Activation::kTanh: return tanh(a);
    case Activation::kIdentity: break;
  }
  return a;
}

Var Tape::row_sq_norm(Var a) {
  return push(value(a).rowwise().squaredNorm(), [a](Tape& t, const Node& n) {
    const Matrix& X = t.value(a);
    t.g(a) += 2.0 * (X.array().colwise() * n.grad.col(0).array()).matrix();
  });
}

Var Tape::row_norm(Var a) {
  return push(value(a).rowwise().norm(), [a](Tape& t, const Node& n) {
    const Matrix& X = t.value(a);
    Matrix& G = t.g(a);
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      const double r = n.value(i, 0);
      if (r > 0.0) G.row(i) += (n.grad(i, 0) / r) * X.row(i);
    }
  });
}

Var Tape::mean(Var a) {
  const Matrix& X = value(a);
  if (X.size() == 0) throw ShapeError("mean of an empty tensor");
  Matrix out(1, 1);
  out(0, 0) = X.mean();
  return push(std::move(out), [a](Tape& t, const Node& n) {
    Matrix& G = t.g(a);
    G.array() += n.grad(0, 0) / static_cast<double>(G.size());
  });
}

Var Tape::sum(Var a) {
  Matrix out(1, 1);
  out(0, 0) = value(a).sum();
  return push(std::move(out), [a](Tape& t, const Node& n) {
    t.g(a).array() += n.grad(0, 0);
  });
}

Var Tape::softmax_cross_entropy(Var logits, std::span<const int> labels) {
  const Matrix& Z = value(logits);
  if (static_cast<Eigen::Index>(labels.size()) != Z.rows()) {
    throw ShapeError("softmax_cross_entropy: one label per row required");
  }
  Matrix prob(Z.rows(), Z.cols());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < Z.rows(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= Z.cols()) throw DomainError("class label out of range");
    const double m = Z.row(i).maxCoeff();
    const Eigen::RowVectorXd e = (Z.row(i).array() - m).exp().matrix();
    const double s = e.sum();
    prob.row(i) = e / s;
    loss -= Z(i, y) - m - std::log(s);
  }
  Matrix out(1, 1);
  out(0, 0) = loss / static_cast<double>(Z.rows());
  std::vector<int> lab(labels.begin(), labels.end());
  return push(std::move(out), [logits, prob, lab](Tape& t, const Node& n) {
    Matrix d = prob;
    for (std::size_t i = 0; i < lab.size(); ++i) d(static_cast<Eigen::Index>(i), lab[i]) -= 1.0;
    t.g(logits) += (n.grad(0, 0) / static_cast<double>(lab.size())) * d;
  });
}

Var Tape::reshape(Var a, Eigen::Index rows, Eigen::Index cols) {
  const Eigen::Index r0 = value(a).rows();
  const Eigen::Index c0 = value(a).cols();
  return push(row_major_reshape(value(a), rows, cols), [a, r0, c0](Tape& t, const Node& n) {
    t.g(a) += row_major_reshape(n.grad, r0, c0);
  });
}

Var Tape::concat_cols(Var a, Var b) {
  const Matrix& A = value(a);
  const Matrix& B = value(b);
  if (A.rows() != B.rows()) throw ShapeError("concat_cols: row counts differ");
  Matrix out(A.rows(), A.cols() + B.cols());
  out << A, B;
  const Eigen::Index ca = A.cols();
  const Eigen::Index cb = B.cols();
  return push(std::move(out), [a, b, ca, cb](Tape& t, const Node& n) {
    t.g(a) += n.grad.leftCols(ca);
    t.g(b) += n.grad.rightCols(cb);
  });
}

// --- mlp -------------------------------------------------------------------

Mlp::Mlp(std::vector<int> dims, Activation hidden, Activation output,
         std::uint64_t seed)
    : dims_(std::move(dims)), seed_(seed) {
  if (dims_.empty()) throw ConfigError("Mlp needs at least an input dimension");
  for (int d : dims_) {
    if (d < 1) throw ConfigError("Mlp layer widths must be >= 1");
  }
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    const int in = dims_[l];
    const int out = dims_[l + 1];
    Dense layer;
    layer.activation = (l + 2 == dims_.size()) ? output : hidden;
    layer.weight.value.resize(in, out);
    layer.bias.value = Matrix::Zero(1, out);
    Rng rng = make_rng(seed, {l});
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (int i = 0; i < in; ++i) {
      for (int j = 0; j < out; ++j) layer.weight.value(i, j) = u(rng);
    }
    for (Parameter* p : {&layer.weight, &layer.bias}) {
      p->zero_grad();
      p->velocity = Matrix::Zero(p->value.rows(), p->value.cols());
    }
    layers_.push_back(std::move(layer));
  }
}

Var Mlp::forward(Tape& tape, Var x) {
  if (tape.value(x).cols() != input_dim()) {
    throw ShapeError("Mlp input has " + std::to_string(tape.value(x).cols()) +
                     " features, expected " + std::to_string(input_dim()));
  }
  Var h = x;
  for (auto& layer : layers_) {
    h = tape.matmul(h, tape.param(layer.weight));
    h = tape.add_row(h, tape.param(layer.bias));
    h = tape.activate(h, layer.activation);
  }
  return h;
}

Matrix Mlp::forward(const Matrix& x) const {
  if (x.cols() != input_dim()) {
    throw ShapeError("Mlp input has " + std::to_string(x.cols()) +
                     " features, expected " + std::to_string(input_dim()));
  }
  Matrix h = x;
  for (const auto& layer : layers_) {
    Matrix z = h * layer.weight.value;
    z.rowwise() += layer.bias.value.row(0);
    switch (layer.activation) {
      case Activation::kRelu: z = z.cwiseMax(0.0); break;
      case Activation::kTanh: z = z.array().tanh().matrix(); break;
      case Activation::kIdentity: break;
    }
    h = std::move(z);
  }
  return h;
}

std::vector<Parameter*> Mlp::parameters() {
  std::vector<Parameter*> out;
  for (auto& l : layers_) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

std::vector<const Parameter*> Mlp::parameters() const {
  std::vector<const Parameter*> out;
  for (const auto& l : layers_) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

std::size_t Mlp::n_parameters() const {
  std::size_t n = 0;
  for (const auto* p : parameters()) n += static_cast<std::size_t>(p->value.size());
  return n;
}

nlohmann::json Mlp::architecture() const {
  nlohmann::json acts = nlohmann::json::array();
  for (const auto& l : layers_) acts.push_back(activation_name(l.activation));
  return {{"dims", dims_}, {"activations", acts}, {"seed", seed_}};
}

Mlp Mlp::from_architecture(const nlohmann::json& j) {
  try {
    const auto dims = j.at("dims").get<std::vector<int>>();
    const auto acts = j.at("activations").get<std::vector<std::string>>();
    if (acts.size() + 1 != dims.size()) throw ConfigError("activation count mismatch");
    Mlp m(dims, Activation::kIdentity, Activation::kIdentity,
          j.at("seed").get<std::uint64_t>());
    for (std::size_t l = 0; l < acts.size(); ++l) {
      m.layers_[l].activation = activation_from_name(acts[l]);
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad network architecture: ") + e.what());
  }
}

std::vector<double> flatten(std::span<const Parameter* const> params) {
  std::vector<double> out;
  for (const auto* p : params) {
    for (Eigen::Index r = 0; r < p->value.rows(); ++r) {
      for (Eigen::Index c = 0; c < p->value.cols(); ++c) out.push_back(p->value(r, c));
    }
  }
  return out;
}

void unflatten(std::span<Parameter* const> params, std::span<const double> flat) {
  std::size_t k = 0;
  for (auto* p : params) {
    if (k + static_cast<std::size_t>(p->value.size()) > flat.size()) {
      throw ShapeError("parameter vector is too short");
    }
    for (Eigen::Index r = 0; r < p->value.rows(); ++r) {
      for (Eigen::Index c = 0; c < p->value.cols(); ++c) p->value(r, c) = flat[k++];
    }
  }
  if (k != flat.size()) throw ShapeError("parameter vector is too long");
}

std::vector<double> flatten_velocity(std::span<const Parameter* const> params) {
  std::vector<double> out;
  for (const auto* p : params) {
    for (Eigen::Index r = 0; r < p->value.rows(); ++r) {
      for (Eigen::Index c = 0; c < p->value.cols(); ++c) {
        out.push_back(p->velocity.size() == p->value.size() ? p->velocity(r, c) : 0.0);
      }
    }
  }
  return out;
}

void unflatten_velocity(std::span<Parameter* const> params, std::span<const double> flat) {
  std::size_t k = 0;
  for (auto* p : params) {
    p->velocity.resize(p->value.rows(), p->value.cols());
    if (k + static_cast<std::size_t>(p->value.size()) > flat.size()) {
      throw ShapeError("velocity vector is too short");
    }
    for (Eigen::Index r = 0; r < p->value.rows(); ++r) {
      for (Eigen::Index c = 0; c < p->value.cols(); ++c) p->velocity(r, c) = flat[k++];
    }
  }
  if (k != flat.size()) throw ShapeError("velocity vector is too long");
}

std::string parameter_hash(std::span<const Parameter* const> params) {
  ByteWriter w;
  for (double v : flatten(params)) w.f64(v);
  return sha256_hex(w.bytes());
}

// --- losses ----------------------------------------------------------------

Var mse_loss(Tape& tape, Var pred, Var target) {
  require_same_shape(tape.value(pred), tape.value(target), "mse_loss");
  const auto rows = static_cast<double>(tape.value(pred).rows());
  return tape.scale(tape.sum(tape.row_sq_norm(tape.sub(pred, target))), 1.0 / rows);
}

Var recon_loss(Tape& tape, Mlp& encoder, Mlp& decoder, Var x) {
  if (decoder.output_dim() != tape.value(x).cols()) {
    throw ShapeError("decoder output dimension must equal the input dimension");
  }
  if (decoder.input_dim() != encoder.output_dim()) {
    throw ShapeError("decoder input dimension must equal the latent dimension");
  }
  return mse_loss(tape, decoder.forward(tape, encoder.forward(tape, x)), x);
}

Var triplet_loss(Tape& tape, Var anchor, Var positive, Var negative,
                 double margin) {
  require_same_shape(tape.value(anchor), tape.value(positive), "triplet_loss");
  require_same_shape(tape.value(anchor), tape.value(negative), "triplet_loss");
  const Var dp = tape.row_norm(tape.sub(anchor, positive));
  const Var dn = tape.row_norm(tape.sub(anchor, negative));
  return tape.mean(tape.relu(tape.add_scalar(tape.sub(dp, dn), margin)));
}

// --- training --------------------------------------------------------------

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be >= 0");
  }
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be >= 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must lie in [0, 1)");
  if (!(max_grad_norm >= 0.0)) throw ConfigError("max_grad_norm must be >= 0");
}

LossHistory train(std::span<Parameter* const> params, const BatchLoss& loss,
                  std::size_t n_train, const TrainConfig& cfg,
                  const ValidationLoss& val) {
  cfg.validate();
  if (n_train == 0) throw ConfigError("training set is empty");
  for (auto* p : params) {
    if (p->velocity.rows() != p->value.rows() || p->velocity.cols() != p->value.cols()) {
      p->velocity = Matrix::Zero(p->value.rows(), p->value.cols());
    }
  }
  const bool early_stop = val && cfg.early_stop_patience > 0;
  LossHistory history;
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_params;
  std::size_t stale = 0;
  std::vector<std::size_t> order(n_train);

  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    const std::size_t epoch = cfg.first_epoch + e;
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng = make_rng(cfg.seed, {0x7a1e, epoch});
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t start = 0; start < n_train; start += cfg.batch_size) {
      const std::size_t stop = std::min(n_train, start + cfg.batch_size);
      const std::span<const std::size_t> batch(order.data() + start, stop - start);
      for (auto* p : params) p->zero_grad();
      Tape tape;
      const Var l = loss(tape, batch);
      const double lv = tape.scalar(l);
      if (!std::isfinite(lv)) {
        throw NumericError("training diverged at epoch " + std::to_string(epoch) +
                           " (non-finite loss)");
      }
      tape.backward(l);
      total += lv * static_cast<double>(batch.size());

      double scale = 1.0;
      if (cfg.max_grad_norm > 0.0) {
        double sq = 0.0;
        for (auto* p : params) sq += p->grad.squaredNorm();
        const double norm = std::sqrt(sq);
        if (norm > cfg.max_grad_norm) scale = cfg.max_grad_norm / norm;
      }
      for (auto* p : params) {
        p->velocity = cfg.momentum * p->velocity + scale * p->grad +
                      cfg.weight_decay * p->value;
        p->value -= cfg.learning_rate * p->velocity;
      }
    }
    const double train_loss = total / static_cast<double>(n_train);
    if (!std::isfinite(train_loss)) {
      throw NumericError("training diverged at epoch " + std::to_string(epoch));
    }
    history.train.push_back(train_loss);
    if (val) {
      const double v = val();
      if (!std::isfinite(v)) {
        throw NumericError("validation loss diverged at epoch " + std::to_string(epoch));
      }
      history.val.push_back(v);
      if (v < best) {
        best = v;
        history.best_epoch = e;
        stale = 0;
        if (early_stop) {
          best_params = flatten(std::vector<const Parameter*>(params.begin(), params.end()));
        }
      } else if (early_stop && ++stale >= cfg.early_stop_patience) {
        break;
      }
    }
  }
  if (early_stop && !best_params.empty()) unflatten(params, best_params);
  return history;
}

// --- checkpoints -------------------------------------------------------------

namespace {
constexpr char kCkptMagic[9] = "RBCKPT01";
}

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt) {
  const std::string text = ckpt.header.dump();
  ByteWriter w;
  w.raw(kCkptMagic, 8);
  w.u64(text.size());
  w.raw(text.data(), text.size());
  w.u64(ckpt.values.size());
  for (double v : ckpt.values) w.f64(v);
  w.seal();
  return std::move(w.bytes());
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  ByteReader r(verify_sealed(bytes, kCkptMagic, "checkpoint"));
  r.take(8);
  const std::uint64_t len = r.u64();
  if (len > r.remaining()) throw CorruptionError("checkpoint header length exceeds file");
  const auto text = r.take(static_cast<std::size_t>(len));
  Checkpoint c;
  try {
    c.header = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw CorruptionError(std::string("checkpoint header is not JSON: ") + e.what());
  }
  const std::uint64_t n = r.u64();
  if (r.remaining() != n * 8) throw CorruptionError("checkpoint value block size mismatch");
  c.values.resize(static_cast<std::size_t>(n));
  for (auto& v : c.values) v = r.f64();
  return c;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  write_file_bytes(path, encode_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file_bytes(path));
}

}  // namespace radiobench::nn
