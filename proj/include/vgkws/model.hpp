// vgkws/model.hpp
//
// Copyright 2026 the vgkws authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// The four-part network: a 1-D convolutional audio encoder over the frame
// axis, a keyword embedding table, keyword-conditioned attention pooling
// and an MLP classifier with a sigmoid output. Inference over a frozen
// parameter set is thread-safe.

#ifndef VGKWS_MODEL_HPP_
#define VGKWS_MODEL_HPP_

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vgkws/corpus.hpp"
#include "vgkws/features.hpp"

namespace vgkws {

struct ConvSpec {
  int out_channels;
  int kernel;
  int stride;
};

struct ModelConfig {
  int input_dim = 39;   // feature dimension D
  int vocab_size = 0;   // W, set from the corpus
  // Six layers, one stride-2, same-padding, ReLU throughout. The first
  // kernel spans the full feature axis by construction (1-D conv over time
  // with D input channels).
  std::vector<ConvSpec> encoder = {{512, 9, 1}, {512, 5, 1}, {512, 5, 2},
                                   {512, 5, 1}, {512, 5, 1}, {512, 5, 1}};
  int keyword_dim = 128;    // d_k
  int attention_dim = 128;  // shared scoring space
  std::vector<int> classifier_hidden = {4096, 8192};

  int downsample_factor() const;
  // Smallest input length the encoder accepts (its receptive field).
  int min_input_frames() const;
  bool same_architecture(const ModelConfig& other) const;
};

// A compact configuration for desk-scale experiments and tests.
ModelConfig small_model_config(int input_dim, int vocab_size);

struct ConvLayer {
  Eigen::MatrixXd weight;  // out_channels x (in_channels * kernel)
  Eigen::MatrixXd bias;    // out_channels x 1
  int in_channels = 0;
  int kernel = 1;
  int stride = 1;
};

struct VgsModelParams {
  ModelConfig config;
  std::vector<ConvLayer> encoder;
  Eigen::MatrixXd keyword_embeddings;  // W x d_k
  Eigen::MatrixXd frame_proj;          // d_a x C_enc
  Eigen::MatrixXd query_proj;          // d_a x d_k
  std::vector<Eigen::MatrixXd> mlp_weights;  // ends in a 1 x H layer
  std::vector<Eigen::MatrixXd> mlp_biases;
  int downsample_factor = 1;

  std::uint64_t vocab_hash_full = 0;
  std::uint64_t vocab_hash_query = 0;
  std::vector<std::string> query_words;
  std::uint64_t seed = 0;
  std::int64_t train_steps = 0;

  // All trainable tensors in a fixed order (shared with gradients/Adam).
  std::vector<Eigen::MatrixXd*> tensors();
  std::vector<const Eigen::MatrixXd*> tensors() const;
  void check_finite() const;
};

// Uniform fan-in initialisation, zero biases, seeded.
VgsModelParams init_params(const ModelConfig& config, const Vocabulary& vocab,
                           std::uint64_t seed);

// Same shapes as `params`, all zeros; gradient / optimiser-state container.
VgsModelParams zeros_like(const VgsModelParams& params);

struct AttentionMap {
  Eigen::VectorXd weights;  // length T', non-negative, sums to 1
  std::string utterance_id;
  int keyword_id = -1;
};

struct LocalisationResult {
  int keyword_id = -1;
  double detection_score = 0.0;
  bool detected = false;
  double predicted_time_s = 0.0;
  AttentionMap attention;
};

// Encoder output: C_enc x T' with T' = ceil(T / downsample_factor).
Eigen::MatrixXd encode_audio(const FeatureSequence& features, const VgsModelParams& params);

Eigen::VectorXd embed_keyword(int keyword_id, const VgsModelParams& params);

struct AttendResult {
  Eigen::VectorXd context;  // C_enc
  Eigen::VectorXd weights;  // T'
};

AttendResult attend(const Eigen::MatrixXd& frame_embeddings,
                    const Eigen::VectorXd& keyword_embedding,
                    const VgsModelParams& params);

double score(const Eigen::VectorXd& context, const VgsModelParams& params);

struct ForwardResult {
  double detection_score = 0.0;
  AttentionMap attention;
};

ForwardResult forward(const FeatureSequence& features, int keyword_id,
                      const VgsModelParams& params);

// Scores all W keywords; reuses the encoder pass.
Eigen::VectorXd forward_all(const FeatureSequence& features, const VgsModelParams& params);

// predicted_time_s = (argmax + 0.5) * downsample_factor * frame_hop_s,
// clamped to the utterance duration; argmax ties break to the lowest index.
LocalisationResult localise(const FeatureSequence& features, int keyword_id,
                            const VgsModelParams& params, double theta);

// Mean-over-keywords binary cross-entropy and its gradients with respect to
// every parameter tensor, accumulated into `grads` (same layout as params).
// Returns the loss. `targets` has length W.
double loss_and_gradients(const FeatureSequence& features, const Eigen::VectorXd& targets,
                          const VgsModelParams& params, VgsModelParams& grads);

struct CheckpointMeta {
  std::string source_path;
  std::uint64_t seed = 0;
  std::int64_t train_steps = 0;
};

void save_checkpoint(const std::filesystem::path& path, const VgsModelParams& params);

// Verifies the full vocabulary hash against `vocab` unless transfer mode is
// requested, in which case only the query-word set must match.
VgsModelParams load_checkpoint(const std::filesystem::path& path, const Vocabulary& vocab,
                               bool allow_transfer_vocab = false);

// Loads without any vocabulary at hand (the checkpoint stores query words).
VgsModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace vgkws

#endif  // VGKWS_MODEL_HPP_
