// vgkws/wav.cpp
//
// Copyright 2026 the vgkws authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "vgkws/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>

#include "vgkws/common.hpp"

namespace vgkws {

namespace {

std::uint32_t read_u32(const char* p) {
  std::uint32_t v;
  std::memcpy(&v, p, 4);
  return v;
}

std::uint16_t read_u16(const char* p) {
  std::uint16_t v;
  std::memcpy(&v, p, 2);
  return v;
}

void append_u32(std::string& s, std::uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  s.append(buf, 4);
}

void append_u16(std::string& s, std::uint16_t v) {
  char buf[2];
  std::memcpy(buf, &v, 2);
  s.append(buf, 2);
}

// Windowed-sinc low-pass at ~7.2 kHz for 48 kHz -> 16 kHz decimation.
std::vector<double> decimate3(const std::vector<double>& in) {
  constexpr int kHalf = 24;
  constexpr double kCutoff = 0.15;  // of the 48 kHz sample rate
  std::vector<double> taps(2 * kHalf + 1);
  double sum = 0.0;
  for (int i = -kHalf; i <= kHalf; ++i) {
    double x = 2.0 * std::numbers::pi * kCutoff * i;
    double sinc = (i == 0) ? 2.0 * kCutoff : std::sin(x) / (std::numbers::pi * i);
    double window = 0.54 + 0.46 * std::cos(std::numbers::pi * i / kHalf);
    taps[i + kHalf] = sinc * window;
    sum += taps[i + kHalf];
  }
  for (double& t : taps) t /= sum;

  std::vector<double> out;
  out.reserve(in.size() / 3 + 1);
  for (std::size_t n = 0; n < in.size(); n += 3) {
    double acc = 0.0;
    for (int i = -kHalf; i <= kHalf; ++i) {
      std::ptrdiff_t idx = static_cast<std::ptrdiff_t>(n) + i;
      if (idx >= 0 && idx < static_cast<std::ptrdiff_t>(in.size())) {
        acc += taps[i + kHalf] * in[idx];
      }
    }
    out.push_back(acc);
  }
  return out;
}

}  // namespace

Waveform read_wav(const std::filesystem::path& path) {
  std::string data = read_file(path);
  if (data.size() < 44 || data.compare(0, 4, "RIFF") != 0 ||
      data.compare(8, 4, "WAVE") != 0) {
    throw DataError("not a RIFF/WAVE file: " + path.string());
  }

  int sample_rate = 0;
  int channels = 0;
  int bits = 0;
  const char* pcm = nullptr;
  std::size_t pcm_bytes = 0;

  std::size_t pos = 12;
  while (pos + 8 <= data.size()) {
    std::string id = data.substr(pos, 4);
    std::uint32_t size = read_u32(data.data() + pos + 4);
    if (pos + 8 + size > data.size()) break;
    if (id == "fmt ") {
      if (size < 16) throw DataError("truncated fmt chunk: " + path.string());
      std::uint16_t format = read_u16(data.data() + pos + 8);
      channels = read_u16(data.data() + pos + 10);
      sample_rate = static_cast<int>(read_u32(data.data() + pos + 12));
      bits = read_u16(data.data() + pos + 22);
      if (format != 1) throw DataError("only PCM WAV supported: " + path.string());
    } else if (id == "data") {
      pcm = data.data() + pos + 8;
      pcm_bytes = size;
    }
    pos += 8 + size + (size & 1);
  }

  if (pcm == nullptr) throw DataError("no data chunk: " + path.string());
  if (channels != 1) {
    throw DataError(path.string() + ": expected mono, got " +
                    std::to_string(channels) + " channels");
  }
  if (bits != 16) {
    throw DataError(path.string() + ": expected 16-bit PCM, got " +
                    std::to_string(bits) + " bits");
  }

  std::vector<double> samples(pcm_bytes / 2);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::int16_t s;
    std::memcpy(&s, pcm + 2 * i, 2);
    samples[i] = s / 32768.0;
  }

  if (sample_rate == kSampleRate) {
    return Waveform{std::move(samples), kSampleRate};
  }
  if (sample_rate == 48000) {
    return Waveform{decimate3(samples), kSampleRate};
  }
  throw DataError(path.string() + ": unsupported sample rate " +
                  std::to_string(sample_rate) + " (expected 16000 or 48000)");
}

void write_wav(const std::filesystem::path& path, const Waveform& wav) {
  if (wav.sample_rate != kSampleRate) {
    throw UsageError("write_wav expects 16 kHz audio");
  }
  const std::uint32_t n = static_cast<std::uint32_t>(wav.samples.size());
  std::string out;
  out.reserve(44 + 2 * n);
  out += "RIFF";
  append_u32(out, 36 + 2 * n);
  out += "WAVEfmt ";
  append_u32(out, 16);
  append_u16(out, 1);  // PCM
  append_u16(out, 1);  // mono
  append_u32(out, kSampleRate);
  append_u32(out, kSampleRate * 2);  // byte rate
  append_u16(out, 2);                // block align
  append_u16(out, 16);               // bits
  out += "data";
  append_u32(out, 2 * n);
  for (double s : wav.samples) {
    double clipped = std::clamp(s, -1.0, 1.0);
    auto q = static_cast<std::int16_t>(std::lrint(clipped * 32767.0));
    char buf[2];
    std::memcpy(buf, &q, 2);
    out.append(buf, 2);
  }
  write_file_atomic(path, out);
}

}  // namespace vgkws
