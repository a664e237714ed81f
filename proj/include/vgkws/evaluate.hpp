// vgkws/evaluate.hpp
//
// Copyright 2026 the vgkws authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Builds the (test utterance x keyword) evaluation grid by running the
// model over every pair, with the ground-truth interval attached from the
// alignment set.

#ifndef VGKWS_EVALUATE_HPP_
#define VGKWS_EVALUATE_HPP_

#include <vector>

#include "vgkws/corpus.hpp"
#include "vgkws/metrics.hpp"
#include "vgkws/model.hpp"
#include "vgkws/training.hpp"

namespace vgkws {

// Grid skeleton with scores/times zeroed; input to random_baseline or to
// analytic expectations.
std::vector<EvalPair> build_eval_grid(const std::vector<UtteranceRecord>& test_records,
                                      const Vocabulary& vocab,
                                      const AlignmentSet& alignments,
                                      const FeatureProvider& features);

// Runs the model over the grid (one encoder pass per utterance).
std::vector<EvalPair> score_eval_grid(const std::vector<UtteranceRecord>& test_records,
                                      const Vocabulary& vocab,
                                      const AlignmentSet& alignments,
                                      const FeatureProvider& features,
                                      const VgsModelParams& params, double theta);

}  // namespace vgkws

#endif  // VGKWS_EVALUATE_HPP_
