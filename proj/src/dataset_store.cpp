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

#include "radiobench/dataset_store.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <string>

#include "radiobench/binary_io.hpp"
#include "radiobench/config.hpp"
#include "radiobench/errors.hpp"
#include "radiobench/rng.hpp"

namespace radiobench {
namespace {

constexpr char kMagic[9] = "RDBENCH1";

Complex quantize(Complex c) {
  return {static_cast<double>(static_cast<float>(c.real())),
          static_cast<double>(static_cast<float>(c.imag()))};
}

}  // namespace

std::vector<std::uint8_t> encode_dataset(const Dataset& ds) {
  ds.validate();
  const std::size_t n_loc = ds.n_locators();
  const auto n_ant = static_cast<std::size_t>(ds.radio.n_antennas);
  const auto n_sub = static_cast<std::size_t>(ds.radio.n_subcarriers);
  const auto n_delay = static_cast<std::size_t>(ds.radio.delay_bins());
  const auto n_angle = static_cast<std::size_t>(ds.radio.angle_bins());
  const Json meta = {{"format_version", kRdbFormatVersion},
                     {"name", ds.name},
                     {"n_samples", ds.size()},
                     {"n_locators", n_loc},
                     {"n_antennas", n_ant},
                     {"n_subcarriers", n_sub},
                     {"n_delay", n_delay},
                     {"n_angle", n_angle},
                     {"scene", scene_to_json(ds.scene)},
                     {"radio", radio_to_json(ds.radio)}};
  const std::string text = meta.dump();

  ByteWriter w;
  w.raw(kMagic, 8);
  w.u64(text.size());
  w.raw(text.data(), text.size());
  for (const auto& s : ds.samples) {
    for (const auto& c : s.csi.values) {
      w.f32(static_cast<float>(c.real()));
      w.f32(static_cast<float>(c.imag()));
    }
  }
  for (const auto& s : ds.samples) {
    for (double v : s.per.values) w.f32(static_cast<float>(v));
  }
  for (const auto& s : ds.samples) {
    for (int a = 0; a < 3; ++a) w.f64(s.position[a]);
  }
  for (const auto& s : ds.samples) {
    for (const auto& t : s.taoa) {
      w.f64(t.azimuth);
      w.f64(t.elevation);
      w.f64(t.range);
    }
  }
  for (const auto& s : ds.samples) w.u64(s.time_index);
  w.seal();
  return std::move(w.bytes());
}

Dataset decode_dataset(std::span<const std::uint8_t> bytes) {
  const auto body = verify_sealed(bytes, kMagic, "RDBENCH1 dataset");
  ByteReader r(body);
  r.take(8);
  const std::uint64_t meta_len = r.u64();
  if (meta_len > r.remaining()) throw CorruptionError("metadata length exceeds file");
  const auto meta_bytes = r.take(static_cast<std::size_t>(meta_len));
  Json meta;
  try {
    meta = Json::parse(meta_bytes.begin(), meta_bytes.end());
  } catch (const Json::parse_error& e) {
    throw CorruptionError(std::string("metadata is not JSON: ") + e.what());
  }
  if (!meta.is_object() || !meta.contains("format_version") ||
      meta.at("format_version") != kRdbFormatVersion) {
    throw FormatError("unsupported dataset format version " +
                      (meta.is_object() && meta.contains("format_version")
                           ? meta.at("format_version").dump()
                           : std::string("(missing)")) +
                      ", expected " + std::to_string(kRdbFormatVersion));
  }

  Dataset ds;
  std::size_t n = 0, n_loc = 0, n_ant = 0, n_sub = 0, n_delay = 0, n_angle = 0;
  try {
    ds.name = meta.at("name").get<std::string>();
    ds.scene = scene_from_json(meta.at("scene"));
    ds.radio = radio_from_json(meta.at("radio"));
    n = meta.at("n_samples").get<std::size_t>();
    n_loc = meta.at("n_locators").get<std::size_t>();
    n_ant = meta.at("n_antennas").get<std::size_t>();
    n_sub = meta.at("n_subcarriers").get<std::size_t>();
    n_delay = meta.at("n_delay").get<std::size_t>();
    n_angle = meta.at("n_angle").get<std::size_t>();
  } catch (const Json::exception& e) {
    throw FormatError(std::string("bad dataset metadata: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("bad dataset metadata: ") + e.what());
  }
  if (n_loc != ds.n_locators() || n_ant != static_cast<std::size_t>(ds.radio.n_antennas) ||
      n_sub != static_cast<std::size_t>(ds.radio.n_subcarriers) ||
      n_delay != static_cast<std::size_t>(ds.radio.delay_bins()) ||
      n_angle != static_cast<std::size_t>(ds.radio.angle_bins())) {
    throw FormatError("dataset shape fields disagree with scene/radio metadata");
  }
  const std::size_t csi_len = n_loc * n_ant * n_sub;
  const std::size_t per_len = n_loc * n_delay * n_angle;
  const std::size_t per_sample = csi_len * 8 + per_len * 4 + 24 + n_loc * 24 + 8;
  if (n != 0 && r.remaining() / per_sample < n) {
    throw CorruptionError("dataset payload is shorter than its header claims");
  }
  if (r.remaining() != n * per_sample) {
    throw CorruptionError("dataset payload size does not match its header");
  }

  ds.samples.resize(n);
  for (auto& s : ds.samples) {
    s.csi.n_locators = n_loc;
    s.csi.n_antennas = n_ant;
    s.csi.n_subcarriers = n_sub;
    s.csi.values.resize(csi_len);
    for (auto& c : s.csi.values) {
      const float re = r.f32();
      const float im = r.f32();
      c = Complex(re, im);
    }
  }
  for (auto& s : ds.samples) {
    s.per.n_locators = n_loc;
    s.per.n_delay = n_delay;
    s.per.n_angle = n_angle;
    s.per.values.resize(per_len);
    for (auto& v : s.per.values) v = r.f32();
  }
  for (auto& s : ds.samples) {
    for (int a = 0; a < 3; ++a) s.position[a] = r.f64();
  }
  for (auto& s : ds.samples) {
    s.taoa.resize(n_loc);
    for (auto& t : s.taoa) {
      t.azimuth = r.f64();
      t.elevation = r.f64();
      t.range = r.f64();
    }
  }
  for (auto& s : ds.samples) s.time_index = r.u64();
  try {
    ds.validate();
  } catch (const Error& e) {
    throw FormatError(std::string("decoded dataset is inconsistent: ") + e.what());
  }
  return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  write_file_bytes(path, encode_dataset(ds));
}

Dataset load_dataset(const std::filesystem::path& path) {
  return decode_dataset(read_file_bytes(path));
}

Dataset quantize_for_storage(const Dataset& ds) {
  Dataset out = ds;
  for (auto& s : out.samples) {
    for (auto& c : s.csi.values) c = quantize(c);
    for (auto& v : s.per.values) v = static_cast<double>(static_cast<float>(v));
  }
  return out;
}

void SplitSpec::validate() const {
  for (double f : {train_frac, val_frac, test_frac}) {
    if (!(f > 0.0 && f < 1.0)) throw ConfigError("split fractions must lie in (0, 1)");
  }
  if (std::abs(train_frac + val_frac + test_frac - 1.0) > 1e-9) {
    throw ConfigError("split fractions must sum to 1");
  }
  if (mode == SplitMode::kSpatialBlock && !(tile_m > 0.0)) {
    throw ConfigError("split tile_m must be > 0");
  }
}

SplitIndices split_indices(const Dataset& ds, const SplitSpec& spec) {
  spec.validate();
  const std::size_t n = ds.size();
  if (n == 0) throw ConfigError("cannot split an empty dataset");
  SplitIndices out;
  const auto count = [n](double f) {
    return static_cast<std::size_t>(std::llround(f * static_cast<double>(n)));
  };

  if (spec.mode == SplitMode::kRandom) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng = make_rng(spec.seed, {0x5b17});
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t n_train = std::min(count(spec.train_frac), n);
    const std::size_t n_val = std::min(count(spec.val_frac), n - n_train);
    out.train.assign(order.begin(), order.begin() + n_train);
    out.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
    out.test.assign(order.begin() + n_train + n_val, order.end());
  } else {
    const Vec3 ext = ds.scene.bounds.extent();
    const int axis = ext.x() >= ext.y() ? 0 : 1;
    const double lo = ds.scene.bounds.lo[axis];
    std::map<long long, std::vector<std::size_t>> strips;
    long long first = 0, last = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const long long k = static_cast<long long>(
          std::floor((ds.samples[i].position[axis] - lo) / spec.tile_m));
      strips[k].push_back(i);
    }
    first = strips.begin()->first;
    last = strips.rbegin()->first;
    const bool from_high = (derive_seed(spec.seed, {0x5b17}) & 1U) == 0U;
    const std::size_t want_test = std::max<std::size_t>(1, count(spec.test_frac));
    const std::size_t want_val = std::max<std::size_t>(1, count(spec.val_frac));
    int stage = 0;  // 0 test, 1 val, 2 train
    std::size_t strips_in_val = 0;
    for (long long step = 0; step <= last - first; ++step) {
      const long long k = from_high ? last - step : first + step;
      const auto it = strips.find(k);
      std::vector<std::size_t>* dst =
          stage == 0 ? &out.test : stage == 1 ? &out.val : &out.train;
      if (it != strips.end()) dst->insert(dst->end(), it->second.begin(), it->second.end());
      if (stage == 1) ++strips_in_val;
      if (stage == 0 && out.test.size() >= want_test) stage = 1;
      else if (stage == 1 && out.val.size() >= want_val && strips_in_val >= 1) stage = 2;
    }
  }
  for (auto* v : {&out.train, &out.val, &out.test}) {
    if (v->empty()) {
      throw ConfigError("split fractions leave an empty split for " +
                        std::to_string(n) + " samples");
    }
    std::sort(v->begin(), v->end());
  }
  return out;
}

DatasetSplit split(const Dataset& ds, const SplitSpec& spec) {
  const SplitIndices idx = split_indices(ds, spec);
  return {ds.subset(idx.train), ds.subset(idx.val), ds.subset(idx.test)};
}

std::vector<Vec3> grid_positions(const Dataset& ds, double pitch_m) {
  if (!(pitch_m > 0.0)) throw ConfigError("grid pitch must be > 0");
  std::set<std::array<long long, 3>> seen;
  std::vector<Vec3> out;
  for (const auto& s : ds.samples) {
    std::array<long long, 3> key;
    for (int a = 0; a < 3; ++a) key[a] = std::llround(s.position[a] / pitch_m);
    if (seen.insert(key).second) {
      out.emplace_back(key[0] * pitch_m, key[1] * pitch_m, key[2] * pitch_m);
    }
  }
  return out;
}

}  // namespace radiobench
