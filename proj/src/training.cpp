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

#include "prada/training.hpp"

#include <cmath>

#include "prada/common.hpp"

namespace prada {

double sgd_step(const TrainingTriple& triple, BilinearRanker& ranker,
                const SgdOptions& options) {
  const auto grad = grad_surrogate_loss_wrt_params(std::span(&triple, 1), ranker,
                                                   options.margin);
  if (grad.active == 0) return grad.loss;
  ranker.interaction() -= options.learning_rate * grad.interaction;
  if (options.embedding_learning_rate > 0.0) {
    for (const auto& [row, g] : grad.rows) {
      ranker.embeddings().row(row) -= options.embedding_learning_rate * g;
    }
  }
  return grad.loss;
}

double sgd_epoch(std::span<const TrainingTriple> triples, BilinearRanker& ranker,
                 const SgdOptions& options) {
  if (triples.empty()) return 0.0;
  double total = 0.0;
  for (const auto& t : triples) total += sgd_step(t, ranker, options);
  const double mean = total / static_cast<double>(triples.size());
  if (!std::isfinite(mean) || !ranker.interaction().allFinite()) {
    throw Error("training diverged: non-finite loss or parameters");
  }
  return mean;
}

double mean_hinge(std::span<const TrainingTriple> triples, const BilinearRanker& ranker,
                  double margin) {
  return grad_surrogate_loss_wrt_params(triples, ranker, margin).loss;
}

}  // namespace prada
