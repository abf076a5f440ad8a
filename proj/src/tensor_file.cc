#include "exdet/tensor_file.h"

#include <bit>
#include <cmath>
#include <cstring>

#include "exdet/errors.h"
#include "exdet/json_io.h"

namespace exdet {

namespace {

constexpr std::size_t kMagicLen = 5;
constexpr std::size_t kHeaderLen = kMagicLen + 4 * 4;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const std::string& in, std::size_t pos) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  }
  return v;
}

void put_grid(std::string& out, const Heatmap& h) {
  for (double v : h.values()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

void get_grid(const std::string& in, std::size_t& pos, Heatmap& h, bool is_score) {
  for (double& v : h.values()) {
    const float f = std::bit_cast<float>(get_u32(in, pos));
    if (!std::isfinite(f)) throw FormatError("non-finite value", static_cast<std::int64_t>(pos));
    if (is_score && (f < 0.0f || f >= 1.0f)) {
      throw FormatError("heatmap value outside [0, 1)", static_cast<std::int64_t>(pos));
    }
    v = f;
    pos += 4;
  }
}

}  // namespace

std::string encode_tensor(const DetectionMaps& maps) {
  maps.validate();
  const std::size_t hw = static_cast<std::size_t>(maps.width()) * maps.height();
  std::string out;
  out.reserve(kHeaderLen + (5 * static_cast<std::size_t>(maps.num_classes()) + 8) * hw * 4);
  out.append(kTensorMagic, kMagicLen);
  put_u32(out, static_cast<std::uint32_t>(maps.num_classes()));
  put_u32(out, static_cast<std::uint32_t>(maps.height()));
  put_u32(out, static_cast<std::uint32_t>(maps.width()));
  put_u32(out, kTensorKindCount);
  for (PointKind kind : kAllKinds) {
    for (int c = 0; c < maps.num_classes(); ++c) put_grid(out, maps.heatmap(kind, c));
  }
  for (int k = 0; k < 4; ++k) {
    put_grid(out, maps.offsets().dx[k]);
    put_grid(out, maps.offsets().dy[k]);
  }
  return out;
}

DetectionMaps decode_tensor(const std::string& bytes) {
  if (bytes.size() < kHeaderLen) {
    throw FormatError("truncated header", static_cast<std::int64_t>(bytes.size()));
  }
  for (std::size_t i = 0; i < kMagicLen; ++i) {
    if (bytes[i] != kTensorMagic[i]) {
      throw FormatError("bad magic", static_cast<std::int64_t>(i));
    }
  }
  const std::uint32_t c = get_u32(bytes, 5);
  const std::uint32_t h = get_u32(bytes, 9);
  const std::uint32_t w = get_u32(bytes, 13);
  const std::uint32_t kinds = get_u32(bytes, 17);
  if (c == 0 || c > (1u << 16)) throw FormatError("bad class count", 5);
  if (h == 0 || h > (1u << 16)) throw FormatError("bad height", 9);
  if (w == 0 || w > (1u << 16)) throw FormatError("bad width", 13);
  if (kinds != kTensorKindCount) throw FormatError("bad kind count", 17);

  const std::uint64_t hw = std::uint64_t{h} * w;
  const std::uint64_t expected = kHeaderLen + (5 * std::uint64_t{c} + 8) * hw * 4;
  if (bytes.size() < expected) {
    throw FormatError("truncated payload", static_cast<std::int64_t>(bytes.size()));
  }
  if (bytes.size() > expected) {
    throw FormatError("trailing bytes", static_cast<std::int64_t>(expected));
  }

  DetectionMaps maps(static_cast<int>(c), static_cast<int>(w), static_cast<int>(h));
  std::size_t pos = kHeaderLen;
  for (PointKind kind : kAllKinds) {
    for (int k = 0; k < maps.num_classes(); ++k) get_grid(bytes, pos, maps.heatmap(kind, k), true);
  }
  for (int k = 0; k < 4; ++k) {
    get_grid(bytes, pos, maps.offsets().dx[k], false);
    get_grid(bytes, pos, maps.offsets().dy[k], false);
  }
  return maps;
}

void write_tensor(const std::string& path, const DetectionMaps& maps) {
  write_file(path, encode_tensor(maps));
}

DetectionMaps read_tensor(const std::string& path) {
  return decode_tensor(read_file(path));
}

DetectionMaps quantize_to_float(DetectionMaps maps) {
  auto q = [](Heatmap& h) {
    for (double& v : h.values()) v = static_cast<float>(v);
  };
  for (PointKind kind : kAllKinds) {
    for (int c = 0; c < maps.num_classes(); ++c) q(maps.heatmap(kind, c));
  }
  for (int k = 0; k < 4; ++k) {
    q(maps.offsets().dx[k]);
    q(maps.offsets().dy[k]);
  }
  return maps;
}

}  // namespace exdet
