#include "introspect/dataset_io.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>

#include "introspect/error.hpp"

namespace introspect {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) raise(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  return std::vector<unsigned char>((std::istreambuf_iterator<char>(f)),
                                    std::istreambuf_iterator<char>());
}

std::uint32_t be32(const std::vector<unsigned char>& b, std::size_t off) {
  return static_cast<std::uint32_t>(b[off]) << 24 | static_cast<std::uint32_t>(b[off + 1]) << 16 |
         static_cast<std::uint32_t>(b[off + 2]) << 8 | static_cast<std::uint32_t>(b[off + 3]);
}

void put_be32(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>((v >> 24) & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
  out.push_back(static_cast<unsigned char>(v & 0xff));
}

}  // namespace

std::vector<LabeledExample> load_idx(const std::filesystem::path& images_path,
                                     const std::filesystem::path& labels_path) {
  const auto img = read_file(images_path);
  const auto lab = read_file(labels_path);

  if (img.size() < 16) raise(ErrorCode::kTruncated, "idx images: header truncated");
  if (be32(img, 0) != kImageMagic) {
    raise(ErrorCode::kBadMagic, "idx images: expected magic 0x00000803, got 0x" +
                                    [&] {
                                      char buf[16];
                                      std::snprintf(buf, sizeof(buf), "%08x", be32(img, 0));
                                      return std::string(buf);
                                    }());
  }
  const std::uint32_t n = be32(img, 4);
  const std::uint32_t rows = be32(img, 8);
  const std::uint32_t cols = be32(img, 12);
  const std::size_t pixels = static_cast<std::size_t>(rows) * cols;
  if (img.size() != 16 + static_cast<std::size_t>(n) * pixels) {
    raise(ErrorCode::kTruncated, "idx images: expected " +
                                     std::to_string(16 + static_cast<std::size_t>(n) * pixels) +
                                     " bytes, file has " + std::to_string(img.size()));
  }

  if (lab.size() < 8) raise(ErrorCode::kTruncated, "idx labels: header truncated");
  if (be32(lab, 0) != kLabelMagic) {
    raise(ErrorCode::kBadMagic, "idx labels: expected magic 0x00000801");
  }
  const std::uint32_t ln = be32(lab, 4);
  if (ln != n) {
    raise(ErrorCode::kCountMismatch, "idx: " + std::to_string(n) + " images but " +
                                         std::to_string(ln) + " labels");
  }
  if (lab.size() != 8 + static_cast<std::size_t>(ln)) {
    raise(ErrorCode::kTruncated, "idx labels: expected " +
                                     std::to_string(8 + static_cast<std::size_t>(ln)) +
                                     " bytes, file has " + std::to_string(lab.size()));
  }

  std::vector<LabeledExample> out;
  out.reserve(n);
  constexpr float kInv255 = 1.0f / 255.0f;
  for (std::uint32_t i = 0; i < n; ++i) {
    Tensor image({static_cast<int>(rows), static_cast<int>(cols), 1});
    const unsigned char* src = img.data() + 16 + static_cast<std::size_t>(i) * pixels;
    for (std::size_t p = 0; p < pixels; ++p) image.at(p) = static_cast<float>(src[p]) * kInv255;
    out.push_back(LabeledExample{std::move(image), static_cast<int>(lab[8 + i]),
                                 DatasetTag::kInDist});
  }
  return out;
}

void write_idx(const std::vector<LabeledExample>& examples,
               const std::filesystem::path& images_path,
               const std::filesystem::path& labels_path) {
  if (examples.empty()) raise(ErrorCode::kContract, "write_idx: empty example list");
  const Tensor& first = examples[0].image;
  if (first.rank() != 3 || first.dim(2) != 1) {
    raise(ErrorCode::kDimension, "write_idx: expects HxWx1 images, got " + first.shape_str());
  }
  const int rows = first.dim(0), cols = first.dim(1);

  std::vector<unsigned char> img, lab;
  put_be32(img, kImageMagic);
  put_be32(img, static_cast<std::uint32_t>(examples.size()));
  put_be32(img, static_cast<std::uint32_t>(rows));
  put_be32(img, static_cast<std::uint32_t>(cols));
  put_be32(lab, kLabelMagic);
  put_be32(lab, static_cast<std::uint32_t>(examples.size()));

  for (const LabeledExample& e : examples) {
    if (!e.image.same_shape(first)) {
      raise(ErrorCode::kDimension, "write_idx: mixed image shapes");
    }
    if (!e.label) raise(ErrorCode::kContract, "write_idx: example without label");
    for (std::size_t p = 0; p < e.image.size(); ++p) {
      img.push_back(static_cast<unsigned char>(std::lround(e.image.at(p) * 255.0f)));
    }
    lab.push_back(static_cast<unsigned char>(*e.label));
  }

  std::ofstream fi(images_path, std::ios::binary | std::ios::trunc);
  if (!fi) raise(ErrorCode::kIo, "cannot open '" + images_path.string() + "' for writing");
  fi.write(reinterpret_cast<const char*>(img.data()), static_cast<std::streamsize>(img.size()));
  std::ofstream fl(labels_path, std::ios::binary | std::ios::trunc);
  if (!fl) raise(ErrorCode::kIo, "cannot open '" + labels_path.string() + "' for writing");
  fl.write(reinterpret_cast<const char*>(lab.data()), static_cast<std::streamsize>(lab.size()));
}

std::vector<LabeledExample> load_cifar_binary(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  constexpr std::size_t kRecord = 3073;
  constexpr int kSide = 32;
  if (bytes.empty() || bytes.size() % kRecord != 0) {
    raise(ErrorCode::kFormat, "cifar: file length " + std::to_string(bytes.size()) +
                                  " is not a positive multiple of 3073");
  }
  const std::size_t n = bytes.size() / kRecord;
  std::vector<LabeledExample> out;
  out.reserve(n);
  constexpr float kInv255 = 1.0f / 255.0f;
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned char* rec = bytes.data() + i * kRecord;
    Tensor image({kSide, kSide, 3});
    // channel-planar source -> interleaved HWC
    for (int ch = 0; ch < 3; ++ch) {
      const unsigned char* plane = rec + 1 + ch * kSide * kSide;
      for (int y = 0; y < kSide; ++y) {
        for (int x = 0; x < kSide; ++x) {
          image.at((static_cast<std::size_t>(y) * kSide + x) * 3 + ch) =
              static_cast<float>(plane[y * kSide + x]) * kInv255;
        }
      }
    }
    out.push_back(LabeledExample{std::move(image), static_cast<int>(rec[0]),
                                 DatasetTag::kInDist});
  }
  return out;
}

void write_cifar_binary(const std::vector<LabeledExample>& examples,
                        const std::filesystem::path& path) {
  constexpr int kSide = 32;
  std::vector<unsigned char> bytes;
  bytes.reserve(examples.size() * 3073);
  for (const LabeledExample& e : examples) {
    if (e.image.rank() != 3 || e.image.dim(0) != kSide || e.image.dim(1) != kSide ||
        e.image.dim(2) != 3) {
      raise(ErrorCode::kDimension, "write_cifar: expects 32x32x3 images, got " +
                                       e.image.shape_str());
    }
    bytes.push_back(static_cast<unsigned char>(e.label.value_or(0)));
    for (int ch = 0; ch < 3; ++ch) {
      for (int y = 0; y < kSide; ++y) {
        for (int x = 0; x < kSide; ++x) {
          const float v = e.image.at((static_cast<std::size_t>(y) * kSide + x) * 3 + ch);
          bytes.push_back(static_cast<unsigned char>(std::lround(v * 255.0f)));
        }
      }
    }
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) raise(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace introspect
