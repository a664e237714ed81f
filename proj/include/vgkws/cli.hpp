// vgkws/cli.hpp
//
// Copyright 2026 the vgkws authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Command implementations behind the vgkws binary. Each returns a process
// exit status: 0 success, 1 runtime failure, 2 usage/config error. Outputs
// are written atomically, so re-runs are idempotent.

#ifndef VGKWS_CLI_HPP_
#define VGKWS_CLI_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "vgkws/features.hpp"
#include "vgkws/model.hpp"
#include "vgkws/synth.hpp"
#include "vgkws/training.hpp"

namespace vgkws::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

// Named experiment bundle, parsed from a UTF-8 key=value file. Relative
// paths resolve against the config file's directory.
struct ExperimentConfig {
  std::filesystem::path manifest;
  std::filesystem::path vocab;
  std::filesystem::path targets;
  std::filesystem::path alignments;  // optional
  std::filesystem::path out_dir;
  double theta = 0.5;
  std::vector<std::uint64_t> seeds = {0};
  ModelConfig model;  // vocab_size filled in after the vocabulary loads
  bool model_is_preset_small = true;
  TrainConfig train;
  FeatureConfig features;
  std::optional<std::filesystem::path> cache_dir;
};

ExperimentConfig parse_experiment_config(const std::filesystem::path& path);

struct SynthOptions {
  SyntheticSpec spec;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
};

struct ValidateOptions {
  std::filesystem::path manifest;
  std::filesystem::path vocab;
  std::filesystem::path alignments;  // optional
  std::filesystem::path targets;     // optional
  bool check_audio = false;
};

struct EvalOptions {
  std::filesystem::path checkpoint;  // empty when baseline == "random"
  std::filesystem::path manifest;
  std::filesystem::path vocab;
  std::filesystem::path alignments;
  std::filesystem::path out_dir;
  double theta = 0.5;
  std::string baseline;  // "" or "random"
  std::uint64_t seed = 0;
  bool allow_transfer_vocab = false;
  std::optional<std::filesystem::path> cache_dir;
};

struct LocaliseOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path audio;
  std::string query_word;
  double theta = 0.5;
  std::string out_prefix = "localise";
  bool plot = false;
};

struct CooccurOptions {
  std::filesystem::path manifest;
  std::filesystem::path vocab;
  std::filesystem::path out_dir;
  bool plot = false;
};

int cmd_synth(const SynthOptions& options);
int cmd_validate(const ValidateOptions& options);
int cmd_train(const std::filesystem::path& config_path,
              const std::vector<std::uint64_t>& seed_override = {});
int cmd_eval(const EvalOptions& options);
int cmd_localise(const LocaliseOptions& options);
int cmd_cooccur(const CooccurOptions& options);

// Cache directory from VGKWS_CACHE_DIR, if set.
std::optional<std::filesystem::path> env_cache_dir();

}  // namespace vgkws::cli

#endif  // VGKWS_CLI_HPP_
