#include "lrtfs/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

static_assert(std::endian::native == std::endian::little,
              "WAV and sidecar payloads are written little-endian");

namespace lrtfs {

namespace {

struct FmtChunk {
  std::uint16_t format = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
};

void put_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), 4);
}
void put_u16(std::ofstream& out, std::uint16_t v) {
  out.write(reinterpret_cast<const char*>(&v), 2);
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::runtime_error("wav: " + path + ": " + what);
}

}  // namespace

SignalBuffer read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open");

  char riff[4], wave[4];
  std::uint32_t riff_size = 0;
  in.read(riff, 4);
  in.read(reinterpret_cast<char*>(&riff_size), 4);
  in.read(wave, 4);
  if (!in || std::memcmp(riff, "RIFF", 4) != 0 || std::memcmp(wave, "WAVE", 4) != 0) {
    fail(path, "not a RIFF/WAVE file");
  }

  FmtChunk fmt;
  std::vector<char> data;
  bool have_fmt = false, have_data = false;
  while (in && !(have_fmt && have_data)) {
    char id[4];
    std::uint32_t size = 0;
    in.read(id, 4);
    in.read(reinterpret_cast<char*>(&size), 4);
    if (!in) break;
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (size < 16) fail(path, "fmt chunk too short");
      std::vector<char> raw(size);
      in.read(raw.data(), size);
      if (!in) fail(path, "truncated fmt chunk");
      std::memcpy(&fmt.format, raw.data() + 0, 2);
      std::memcpy(&fmt.channels, raw.data() + 2, 2);
      std::memcpy(&fmt.sample_rate, raw.data() + 4, 4);
      std::memcpy(&fmt.bits, raw.data() + 14, 2);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data.resize(size);
      in.read(data.data(), size);
      if (static_cast<std::uint32_t>(in.gcount()) != size) fail(path, "truncated data chunk");
      have_data = true;
    } else {
      in.seekg(size + (size & 1), std::ios::cur);  // chunks are word-aligned
    }
  }
  if (!have_fmt || !have_data) fail(path, "missing fmt or data chunk");
  if (fmt.channels != 1) fail(path, "only mono files are supported");

  SignalBuffer buf;
  buf.sample_rate = fmt.sample_rate;
  buf.label = path;
  if (fmt.format == 1 && fmt.bits == 16) {
    const size_t n = data.size() / 2;
    buf.samples.resize(n);
    for (size_t i = 0; i < n; ++i) {
      std::int16_t s;
      std::memcpy(&s, data.data() + 2 * i, 2);
      buf.samples[i] = static_cast<double>(s) / 32767.0;
    }
  } else if (fmt.format == 3 && fmt.bits == 32) {
    const size_t n = data.size() / 4;
    buf.samples.resize(n);
    for (size_t i = 0; i < n; ++i) {
      float s;
      std::memcpy(&s, data.data() + 4 * i, 4);
      buf.samples[i] = s;
    }
  } else {
    fail(path, "unsupported sample format (PCM16 and float32 only)");
  }
  return buf;
}

void write_wav(const SignalBuffer& buffer, const std::string& path, WavFormat format) {
  if (!(buffer.sample_rate > 0.0)) fail(path, "sample rate must be positive");
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path, "cannot open for writing");

  const std::uint32_t n = static_cast<std::uint32_t>(buffer.samples.size());
  const std::uint16_t bits = format == WavFormat::pcm16 ? 16 : 32;
  const std::uint16_t block = bits / 8;
  const std::uint32_t data_size = n * block;
  const std::uint32_t rate = static_cast<std::uint32_t>(std::lround(buffer.sample_rate));

  out.write("RIFF", 4);
  put_u32(out, 36 + data_size);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  put_u32(out, 16);
  put_u16(out, format == WavFormat::pcm16 ? 1 : 3);
  put_u16(out, 1);
  put_u32(out, rate);
  put_u32(out, rate * block);
  put_u16(out, block);
  put_u16(out, bits);
  out.write("data", 4);
  put_u32(out, data_size);

  if (format == WavFormat::pcm16) {
    for (std::uint32_t i = 0; i < n; ++i) {
      const double clamped = std::clamp(buffer.samples[i], -1.0, 1.0);
      const std::int16_t s = static_cast<std::int16_t>(std::lround(clamped * 32767.0));
      out.write(reinterpret_cast<const char*>(&s), 2);
    }
  } else {
    for (std::uint32_t i = 0; i < n; ++i) {
      const float s = static_cast<float>(buffer.samples[i]);
      out.write(reinterpret_cast<const char*>(&s), 4);
    }
  }
  if (!out) fail(path, "write failed");
}

}  // namespace lrtfs
