#include "gfl/idx.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "gfl/errors.hpp"

namespace gfl {

namespace {

std::uint32_t read_be32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
         std::uint32_t{p[3]};
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::size_t element_size(IdxType t) { return t == IdxType::U8 ? 1 : 4; }

}  // namespace

std::size_t IdxTensor::size() const {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

double IdxTensor::at(std::size_t i) const {
  return type == IdxType::U8 ? static_cast<double>(u8.at(i)) : static_cast<double>(f32.at(i));
}

IdxTensor parse_idx(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4) throw TruncatedPayload("IDX header needs 4 bytes, got " + std::to_string(bytes.size()));
  if (bytes[0] != 0 || bytes[1] != 0) throw BadMagic("IDX magic must start with two zero bytes");
  IdxTensor t;
  switch (bytes[2]) {
    case 0x08:
      t.type = IdxType::U8;
      break;
    case 0x0D:
      t.type = IdxType::F32;
      break;
    default:
      throw UnsupportedType("IDX element type 0x" + [&] {
        char buf[3];
        std::snprintf(buf, sizeof buf, "%02x", bytes[2]);
        return std::string(buf);
      }() + " is not supported (u8 0x08 and f32 0x0d are)");
  }
  const std::size_t rank = bytes[3];
  if (bytes.size() < 4 + 4 * rank) throw TruncatedPayload("IDX dimension table is truncated");
  for (std::size_t d = 0; d < rank; ++d) t.shape.push_back(read_be32(bytes.data() + 4 + 4 * d));
  const std::size_t offset = 4 + 4 * rank;
  const std::size_t expected = t.size() * element_size(t.type);
  if (bytes.size() - offset != expected) {
    throw TruncatedPayload("IDX payload has " + std::to_string(bytes.size() - offset) +
                           " bytes, dimensions require " + std::to_string(expected));
  }
  const auto* payload = bytes.data() + offset;
  if (t.type == IdxType::U8) {
    t.u8.assign(payload, payload + expected);
  } else {
    t.f32.resize(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) t.f32[i] = std::bit_cast<float>(read_be32(payload + 4 * i));
  }
  return t;
}

IdxTensor read_idx_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open IDX file " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return parse_idx(bytes);
  } catch (const BadMagic& e) {
    throw BadMagic(path.string() + ": " + e.what());
  } catch (const TruncatedPayload& e) {
    throw TruncatedPayload(path.string() + ": " + e.what());
  } catch (const UnsupportedType& e) {
    throw UnsupportedType(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_idx(const IdxTensor& t) {
  std::vector<std::uint8_t> out = {0, 0, static_cast<std::uint8_t>(t.type),
                                   static_cast<std::uint8_t>(t.shape.size())};
  for (std::size_t d : t.shape) write_be32(out, static_cast<std::uint32_t>(d));
  if (t.type == IdxType::U8) {
    if (t.u8.size() != t.size()) throw DimensionMismatch("u8 payload does not match the shape");
    out.insert(out.end(), t.u8.begin(), t.u8.end());
  } else {
    if (t.f32.size() != t.size()) throw DimensionMismatch("f32 payload does not match the shape");
    for (float f : t.f32) write_be32(out, std::bit_cast<std::uint32_t>(f));
  }
  return out;
}

LabeledImages load_labeled_images(const std::filesystem::path& images,
                                  const std::filesystem::path& labels, std::size_t limit) {
  const IdxTensor img = read_idx_file(images);
  const IdxTensor lab = read_idx_file(labels);
  if (img.shape.empty() || lab.shape.size() != 1 || img.shape[0] != lab.shape[0]) {
    throw DimensionMismatch("image and label files disagree on the example count");
  }
  if (lab.type != IdxType::U8) throw UnsupportedType("labels must be u8");
  LabeledImages out;
  out.count = limit == 0 ? img.shape[0] : std::min(limit, img.shape[0]);
  out.pixels = img.size() / img.shape[0];
  out.images.resize(out.count * out.pixels);
  // u8 intensities map to [0, 1]; f32 payloads are taken as given
  const double scale = img.type == IdxType::U8 ? 1.0 / 255.0 : 1.0;
  for (std::size_t i = 0; i < out.images.size(); ++i) out.images[i] = img.at(i) * scale;
  out.labels.assign(lab.u8.begin(), lab.u8.begin() + static_cast<std::ptrdiff_t>(out.count));
  for (auto l : out.labels) {
    if (l > 9) throw DomainError("label " + std::to_string(l) + " outside 0..9");
  }
  return out;
}

}  // namespace gfl
