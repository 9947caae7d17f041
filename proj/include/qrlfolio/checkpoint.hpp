// Copyright 2026 The qrlfolio Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Versioned JSON checkpoints. One file holds the run configuration and, per
// fold, the selected agent (actor, critic, both targets, both optimizer
// states), the exploration generator state and the epoch counters. Numbers
// are written in shortest round-trip form, so save -> load -> save is
// byte-identical.

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "qrlfolio/config.hpp"
#include "qrlfolio/training.hpp"

namespace qrlfolio {

inline constexpr int kCheckpointVersion = 1;

struct FoldCheckpoint {
  std::size_t fold = 0;
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
  bool early_stopped = false;
  CounterRng rng;
  agents::Agent agent;
};

struct Checkpoint {
  int version = kCheckpointVersion;
  RunConfig config;
  std::vector<FoldCheckpoint> folds;
};

[[nodiscard]] std::string checkpoint_to_string(const Checkpoint& ckpt);

/// Parse errors carry the byte offset; versions other than the current one
/// raise UnsupportedVersionError.
[[nodiscard]] Checkpoint checkpoint_from_string(const std::string& text,
                                                const std::string& source = "<checkpoint>");

void checkpoint_save(const std::filesystem::path& path, const Checkpoint& ckpt);
[[nodiscard]] Checkpoint checkpoint_load(const std::filesystem::path& path);

}  // namespace qrlfolio
