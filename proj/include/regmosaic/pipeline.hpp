// Copyright 2026 The regmosaic Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef REGMOSAIC_PIPELINE_HPP
#define REGMOSAIC_PIPELINE_HPP

#include "regmosaic/serialize.hpp"

// End-to-end runs driven by a JSON configuration. Each run fills in defaults,
// writes the resolved configuration next to its outputs and returns a
// summary object whose "config" member is that resolved configuration.
// Field lists are in docs/schema.md.

namespace regmosaic {

Json run_synth(const Json& config);
Json run_register(const Json& config);
Json run_mosaic(const Json& config);
Json run_eval_robustness(const Json& config);
Json run_eval_accuracy(const Json& config);
Json run_eval_speed(const Json& config);

/// Default sweep grids: translation to 50 px, scale to 35 %, angles to 30
/// degrees, all in steps of 5 (units).
std::vector<SweepGrid> default_sweep_grids();

}  // namespace regmosaic

#endif  // REGMOSAIC_PIPELINE_HPP
