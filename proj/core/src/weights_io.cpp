#include "introspect/weights_io.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <vector>

#include "introspect/error.hpp"

namespace introspect {

namespace {

constexpr std::array<char, 4> kMagic = {'I', 'N', 'T', 'R'};
constexpr std::uint32_t kMaxNameLen = 4096;
constexpr std::uint32_t kMaxRank = 8;

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 24) & 0xff));
}

void put_f32(std::vector<unsigned char>& out, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, sizeof(bits));
  put_u32(out, bits);
}

class Reader {
 public:
  Reader(const unsigned char* data, std::size_t size) : data_(data), size_(size) {}

  std::uint32_t u32() {
    if (pos_ + 4 > size_) raise(ErrorCode::kTruncated, "weights file: truncated payload");
    std::uint32_t v = static_cast<std::uint32_t>(data_[pos_]) |
                      static_cast<std::uint32_t>(data_[pos_ + 1]) << 8 |
                      static_cast<std::uint32_t>(data_[pos_ + 2]) << 16 |
                      static_cast<std::uint32_t>(data_[pos_ + 3]) << 24;
    pos_ += 4;
    return v;
  }

  float f32() {
    const std::uint32_t bits = u32();
    float f;
    std::memcpy(&f, &bits, sizeof(f));
    return f;
  }

  std::string str(std::size_t len) {
    if (pos_ + len > size_) raise(ErrorCode::kTruncated, "weights file: truncated name");
    std::string s(reinterpret_cast<const char*>(data_ + pos_), len);
    pos_ += len;
    return s;
  }

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return size_ - pos_; }

 private:
  const unsigned char* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint32_t crc32(std::span<const unsigned char> bytes) {
  static const auto table = [] {
    std::array<std::uint32_t, 256> t{};
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
      t[i] = c;
    }
    return t;
  }();
  std::uint32_t crc = 0xffffffffu;
  for (unsigned char b : bytes) crc = table[(crc ^ b) & 0xffu] ^ (crc >> 8);
  return crc ^ 0xffffffffu;
}

void save_weights(const Weights& weights, const std::filesystem::path& path) {
  std::vector<unsigned char> out;
  out.insert(out.end(), kMagic.begin(), kMagic.end());
  put_u32(out, weights.version);
  for (const auto& [name, tensor] : weights.entries) {
    if (name.empty() || name.size() > kMaxNameLen) {
      raise(ErrorCode::kContract, "weights: invalid entry name '" + name + "'");
    }
    put_u32(out, static_cast<std::uint32_t>(name.size()));
    out.insert(out.end(), name.begin(), name.end());
    put_u32(out, static_cast<std::uint32_t>(tensor.rank()));
    for (int i = 0; i < tensor.rank(); ++i) put_u32(out, static_cast<std::uint32_t>(tensor.dim(i)));
    for (std::size_t i = 0; i < tensor.size(); ++i) put_f32(out, tensor.at(i));
  }
  put_u32(out, crc32(out));

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) raise(ErrorCode::kIo, "weights: cannot open '" + path.string() + "' for writing");
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) raise(ErrorCode::kIo, "weights: short write to '" + path.string() + "'");
}

Weights load_weights(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) raise(ErrorCode::kIo, "weights: cannot open '" + path.string() + "'");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());

  if (bytes.size() < 12) raise(ErrorCode::kTruncated, "weights file: shorter than header");
  if (std::memcmp(bytes.data(), kMagic.data(), 4) != 0) {
    raise(ErrorCode::kBadMagic, "weights file: bad magic bytes");
  }

  // Structure first (so truncation mid-record is reported as truncation),
  // checksum second, version last: a flipped byte anywhere surfaces as a
  // checksum error, and version-mismatch fires only for intact files.
  Reader r(bytes.data(), bytes.size() - 4);
  r.str(4);  // magic
  Weights w;
  w.version = r.u32();
  while (r.remaining() > 0) {
    const std::uint32_t name_len = r.u32();
    if (name_len == 0 || name_len > kMaxNameLen) {
      raise(ErrorCode::kFormat, "weights file: invalid name length " + std::to_string(name_len));
    }
    std::string name = r.str(name_len);
    const std::uint32_t rank = r.u32();
    if (rank > kMaxRank) {
      raise(ErrorCode::kFormat, "weights file: rank " + std::to_string(rank) + " out of range");
    }
    std::vector<int> shape(rank);
    std::size_t count = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      const std::uint32_t d = r.u32();
      if (d == 0 || d > (1u << 28)) {
        raise(ErrorCode::kFormat, "weights file: dimension " + std::to_string(d) + " out of range");
      }
      shape[i] = static_cast<int>(d);
      count *= d;
    }
    if (r.remaining() < count * 4) {
      raise(ErrorCode::kTruncated, "weights file: record '" + name + "' truncated");
    }
    std::vector<float> data(count);
    for (std::size_t i = 0; i < count; ++i) data[i] = r.f32();
    w.entries.emplace_back(std::move(name), Tensor(std::move(shape), std::move(data)));
  }

  const std::uint32_t stored_crc = static_cast<std::uint32_t>(bytes[bytes.size() - 4]) |
                                   static_cast<std::uint32_t>(bytes[bytes.size() - 3]) << 8 |
                                   static_cast<std::uint32_t>(bytes[bytes.size() - 2]) << 16 |
                                   static_cast<std::uint32_t>(bytes[bytes.size() - 1]) << 24;
  const std::uint32_t computed =
      crc32(std::span<const unsigned char>(bytes.data(), bytes.size() - 4));
  if (stored_crc != computed) {
    raise(ErrorCode::kChecksum, "weights file: checksum mismatch");
  }
  if (w.version != kWeightsFormatVersion) {
    raise(ErrorCode::kVersionMismatch,
          "weights file: unsupported version " + std::to_string(w.version));
  }
  return w;
}

}  // namespace introspect
