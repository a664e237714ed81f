// vgkws/wav.hpp
//
// Copyright 2026 the vgkws authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef VGKWS_WAV_HPP_
#define VGKWS_WAV_HPP_

#include <filesystem>
#include <vector>

namespace vgkws {

inline constexpr int kSampleRate = 16000;

struct Waveform {
  std::vector<double> samples;  // in [-1, 1]
  int sample_rate = kSampleRate;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
};

// Reads a 16-bit PCM mono WAV file. 16 kHz is returned as-is; 48 kHz input
// is low-pass filtered and decimated to 16 kHz. Other rates are rejected.
Waveform read_wav(const std::filesystem::path& path);

// Writes 16-bit PCM mono at 16 kHz; samples are clipped to [-1, 1].
void write_wav(const std::filesystem::path& path, const Waveform& wav);

}  // namespace vgkws

#endif  // VGKWS_WAV_HPP_
