#include "moodnet/wav.hpp"

#include <cstdint>
#include <fstream>
#include <string>

#include "moodnet/errors.hpp"

namespace moodnet {

namespace {

std::uint32_t le_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t le_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(static_cast<std::uint32_t>(p[0]) |
                                    (static_cast<std::uint32_t>(p[1]) << 8));
}

}  // namespace

AudioClip read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open WAV file: " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("failed reading WAV file: " + path.string());

  const auto fail = [&](const std::string& why) -> IoError {
    return IoError("malformed WAV file " + path.string() + ": " + why);
  };
  if (bytes.size() < 12 || std::string(bytes.begin(), bytes.begin() + 4) != "RIFF" ||
      std::string(bytes.begin() + 8, bytes.begin() + 12) != "WAVE") {
    throw fail("missing RIFF/WAVE header");
  }

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  const unsigned char* data = nullptr;
  std::uint32_t data_len = 0;

  std::size_t off = 12;
  while (off + 8 <= bytes.size()) {
    const std::string id(bytes.begin() + off, bytes.begin() + off + 4);
    const std::uint32_t len = le_u32(bytes.data() + off + 4);
    const std::size_t body = off + 8;
    if (body + len > bytes.size()) throw fail("chunk '" + id + "' overruns file");
    if (id == "fmt ") {
      if (len < 16) throw fail("fmt chunk too short");
      format = le_u16(bytes.data() + body);
      channels = le_u16(bytes.data() + body + 2);
      sample_rate = le_u32(bytes.data() + body + 4);
      bits = le_u16(bytes.data() + body + 14);
      have_fmt = true;
    } else if (id == "data") {
      data = bytes.data() + body;
      data_len = len;
    }
    off = body + len + (len % 2);  // chunks are word-aligned
  }

  if (!have_fmt) throw fail("no fmt chunk");
  if (data == nullptr) throw fail("no data chunk");
  if (format != 1 || bits != 16) {
    throw InputError("unsupported WAV encoding in " + path.string() +
                     " (need 16-bit PCM, got format " + std::to_string(format) + ", " +
                     std::to_string(bits) + "-bit)");
  }
  if (channels != 1) {
    throw InputError("WAV file " + path.string() + " has " + std::to_string(channels) +
                     " channels; only mono is supported");
  }
  if (sample_rate == 0) throw fail("zero sample rate");

  AudioClip clip;
  clip.sample_rate = static_cast<double>(sample_rate);
  clip.samples.resize(data_len / 2);
  for (std::size_t i = 0; i < clip.samples.size(); ++i) {
    const std::uint16_t u = le_u16(data + 2 * i);
    const std::int16_t s = static_cast<std::int16_t>(u);
    clip.samples[i] = static_cast<double>(s) / 32768.0;
  }
  return clip;
}

}  // namespace moodnet
