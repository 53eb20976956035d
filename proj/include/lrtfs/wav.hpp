#pragma once

#include <string>

#include "lrtfs/signal.hpp"

namespace lrtfs {

enum class WavFormat { pcm16, float32 };

/// Mono PCM16 or IEEE-float32 WAV. Anything else (other codecs, multichannel,
/// truncated chunks) raises std::runtime_error.
SignalBuffer read_wav(const std::string& path);

/// float32 round-trips losslessly; pcm16 clamps to [-1, 1] and quantizes.
void write_wav(const SignalBuffer& buffer, const std::string& path,
               WavFormat format = WavFormat::float32);

}  // namespace lrtfs
