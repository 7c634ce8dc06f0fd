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

#ifndef RADIOBENCH_DATASET_STORE_HPP_
#define RADIOBENCH_DATASET_STORE_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "radiobench/binary_io.hpp"
#include "radiobench/dataset.hpp"

namespace radiobench {

inline constexpr int kRdbFormatVersion = 1;

// .rdb container: magic "RDBENCH1", u64 length + JSON metadata, then CSI
// (complex64), PER (float32), positions (float64), TAoA (float64), time
// indices (u64), and a trailing CRC32C over everything before it. All
// little-endian.
std::vector<std::uint8_t> encode_dataset(const Dataset& ds);
Dataset decode_dataset(std::span<const std::uint8_t> bytes);

void save_dataset(const Dataset& ds, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

// The dataset as it reads back from disk: CSI and PER rounded to single
// precision. load(save(d)) == quantize_for_storage(d), and quantisation is
// idempotent.
Dataset quantize_for_storage(const Dataset& ds);

enum class SplitMode { kRandom, kSpatialBlock };

struct SplitSpec {
  double train_frac = 0.8;
  double val_frac = 0.1;
  double test_frac = 0.1;
  SplitMode mode = SplitMode::kRandom;
  std::uint64_t seed = 0;
  double tile_m = 1.0;  // SpatialBlock strip width

  void validate() const;
};

struct SplitIndices {
  std::vector<std::size_t> train, val, test;  // each ascending
};

struct DatasetSplit {
  Dataset train, val, test;
};

// Random: shuffled counts round(f * n) for train and val, remainder to test.
// SpatialBlock: strips of width tile_m across the longer horizontal axis;
// test takes strips from one end (chosen by seed), val the next strips
// (at least one whole strip, so test is more than tile_m from any train
// position), train the rest.
SplitIndices split_indices(const Dataset& ds, const SplitSpec& spec);
DatasetSplit split(const Dataset& ds, const SplitSpec& spec);

// Unique positions rounded to a grid of the given pitch, first-seen order.
std::vector<Vec3> grid_positions(const Dataset& ds, double pitch_m);

}  // namespace radiobench

#endif  // RADIOBENCH_DATASET_STORE_HPP_
