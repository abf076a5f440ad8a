#ifndef EXDET_TENSOR_FILE_H_
#define EXDET_TENSOR_FILE_H_

#include <cstdint>
#include <string>

#include "exdet/grouping.h"

namespace exdet {

// Binary layout, all little-endian:
//   "EXHM1" | u32 C | u32 H | u32 W | u32 kind_count (= 13)
//   float32 grids, row-major: heatmaps kind-major (t, l, b, r, c) then
//   class, followed by t.dx, t.dy, l.dx, l.dy, b.dx, b.dy, r.dx, r.dy.
inline constexpr char kTensorMagic[] = "EXHM1";
inline constexpr std::uint32_t kTensorKindCount = 13;

// Values are narrowed to float32; decode(encode(m)) == m when every value of
// m is already float-representable.
std::string encode_tensor(const DetectionMaps& maps);
// Throws FormatError carrying the byte offset of the first bad field.
DetectionMaps decode_tensor(const std::string& bytes);

void write_tensor(const std::string& path, const DetectionMaps& maps);
DetectionMaps read_tensor(const std::string& path);

// Rounds every value through float32, as a write/read cycle would.
DetectionMaps quantize_to_float(DetectionMaps maps);

}  // namespace exdet

#endif  // EXDET_TENSOR_FILE_H_
