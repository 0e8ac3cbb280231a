#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace gfl {

enum class IdxType : std::uint8_t { U8 = 0x08, F32 = 0x0D };

/// Row-major tensor from an IDX container. Exactly one of u8 / f32 is populated.
struct IdxTensor {
  IdxType type = IdxType::U8;
  std::vector<std::size_t> shape;
  std::vector<std::uint8_t> u8;
  std::vector<float> f32;

  [[nodiscard]] std::size_t size() const;
  [[nodiscard]] double at(std::size_t flat_index) const;
};

/// Magic 0x00 0x00 <type> <rank>, rank big-endian u32 sizes, then the payload
/// (f32 big-endian). Throws BadMagic, UnsupportedType, TruncatedPayload; trailing
/// bytes after the payload are TruncatedPayload too, since the sizes disagree.
IdxTensor parse_idx(std::span<const std::uint8_t> bytes);
IdxTensor read_idx_file(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_idx(const IdxTensor& tensor);

/// Images flattened to rows of `pixels` values in [0, 1] plus integer labels.
struct LabeledImages {
  std::size_t count = 0;
  std::size_t pixels = 0;
  std::vector<double> images;
  std::vector<std::uint8_t> labels;
};

/// Loads the first `limit` examples (0 = all). DimensionMismatch when image and
/// label counts differ.
LabeledImages load_labeled_images(const std::filesystem::path& images,
                                  const std::filesystem::path& labels, std::size_t limit = 0);

}  // namespace gfl
