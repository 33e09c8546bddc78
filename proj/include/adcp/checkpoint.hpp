// Copyright 2026 the adcp authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>

#include "adcp/pipeline.hpp"

namespace adcp {

/// Serialized training state. The container is versioned and checksummed:
/// magic, format version, config block, named little-endian float32 parameter
/// payloads with shapes, optional Adam moments, iteration counter, RNG state,
/// trailing CRC-32.
struct Checkpoint {
    ModelConfig cfg;
    NamedParams<float> params;
    bool has_adam = false;
    AdamState<float> adam;
    int64_t iter = 0;
    std::string rng_state;  // mt19937 stream serialization

    static Checkpoint capture(Model<float>& m, const AdamState<float>& adam_state, int64_t iter,
                              const Rng& rng);

    /// Rebuilds a model with the stored configuration and parameters.
    Model<float> restore_model() const;
};

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

} // namespace adcp
