// Copyright 2026 The Prada Authors
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

// Plain SGD over pairwise hinge triples, shared by target and surrogate
// training.

#ifndef PRADA_TRAINING_HPP_
#define PRADA_TRAINING_HPP_

#include <span>

#include "prada/ranker.hpp"

namespace prada {

struct SgdOptions {
  double learning_rate = 0.05;
  double margin = kDefaultMargin;
  double embedding_learning_rate = 0.05;  // 0 freezes the embedding table
};

// One step on a single triple. Returns the hinge value before the update.
double sgd_step(const TrainingTriple& triple, BilinearRanker& ranker,
                const SgdOptions& options);

// One pass in the given order; returns the mean pre-update hinge. Throws on
// non-finite parameters.
double sgd_epoch(std::span<const TrainingTriple> triples, BilinearRanker& ranker,
                 const SgdOptions& options);

// Mean hinge over the triples without updating anything.
double mean_hinge(std::span<const TrainingTriple> triples, const BilinearRanker& ranker,
                  double margin = kDefaultMargin);

}  // namespace prada

#endif  // PRADA_TRAINING_HPP_
