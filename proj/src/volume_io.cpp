#include "mv3c/volume_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace mv3c {

namespace {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::format, "cannot open file: " + path);
  in.seekg(0, std::ios::end);
  auto len = static_cast<std::size_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  std::vector<std::uint8_t> buf(len);
  if (len > 0 && !in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(len)))
    fail(ErrorKind::format, "short read: " + path);
  return buf;
}

void write_file(const std::string& path, const void* data, std::size_t len) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::format, "cannot open file for writing: " + path);
  if (len > 0) out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(len));
  if (!out) fail(ErrorKind::format, "write failed: " + path);
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

constexpr std::uint32_t kMaxAxis = 1u << 20;

void check_dims(Dims3 d, const std::string& ctx) {
  if (d.nx < 1 || d.ny < 1 || d.nz < 1) fail(ErrorKind::format, ctx + ": dims must each be >= 1");
  if (d.nx > kMaxAxis || d.ny > kMaxAxis || d.nz > kMaxAxis)
    fail(ErrorKind::format, ctx + ": axis length exceeds supported maximum");
}

// Little-endian element codecs; multi-byte scalars are never memcpy'd as a
// block so the files stay byte-order independent of the host.
template <typename T>
T load_le(const std::uint8_t* p) {
  using U = std::conditional_t<sizeof(T) == 1, std::uint8_t,
                               std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint32_t>>;
  U u = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) u |= static_cast<U>(p[i]) << (8 * i);
  return std::bit_cast<T>(u);
}

template <typename T>
void store_le(std::uint8_t* p, T v) {
  using U = std::conditional_t<sizeof(T) == 1, std::uint8_t,
                               std::conditional_t<sizeof(T) == 2, std::uint16_t, std::uint32_t>>;
  U u = std::bit_cast<U>(v);
  for (std::size_t i = 0; i < sizeof(T); ++i) p[i] = static_cast<std::uint8_t>(u >> (8 * i));
}

template <typename T>
std::vector<T> decode_payload(const std::vector<std::uint8_t>& bytes, std::size_t count) {
  std::vector<T> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = load_le<T>(bytes.data() + i * sizeof(T));
  return out;
}

}  // namespace

VolumeMeta parse_sidecar(const std::string& text) {
  VolumeMeta meta;
  bool have_format = false, have_dims = false, have_dtype = false;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::size_t colon = line.find(':');
    if (colon == std::string::npos) fail(ErrorKind::format, "sidecar: malformed line '" + line + "'");
    std::string key = trim(line.substr(0, colon));
    std::string value = trim(line.substr(colon + 1));
    if (key == "format") {
      if (value != "mv3c-raw-v1") fail(ErrorKind::format, "sidecar: unsupported format '" + value + "'");
      have_format = true;
    } else if (key == "dims") {
      std::istringstream v(value);
      long nx = 0, ny = 0, nz = 0;
      if (!(v >> nx >> ny >> nz) || nx < 1 || ny < 1 || nz < 1)
        fail(ErrorKind::format, "sidecar: bad dims '" + value + "'");
      meta.dims = {static_cast<std::uint32_t>(nx), static_cast<std::uint32_t>(ny),
                   static_cast<std::uint32_t>(nz)};
      have_dims = true;
    } else if (key == "dtype") {
      meta.dtype = dtype_from_name(value);
      have_dtype = true;
    } else if (key == "spacing") {
      std::istringstream v(value);
      if (!(v >> meta.spacing.sx >> meta.spacing.sy >> meta.spacing.sz))
        fail(ErrorKind::format, "sidecar: bad spacing '" + value + "'");
    } else if (key == "byte_order") {
      if (value != "little-endian")
        fail(ErrorKind::format, "sidecar: unsupported byte_order '" + value + "'");
    } else if (key == "description") {
      meta.description = value;
    } else {
      fail(ErrorKind::format, "sidecar: unknown key '" + key + "'");
    }
  }
  if (!have_format) fail(ErrorKind::format, "sidecar: missing 'format' key");
  if (!have_dims) fail(ErrorKind::format, "sidecar: missing 'dims' key");
  if (!have_dtype) fail(ErrorKind::format, "sidecar: missing 'dtype' key");
  check_dims(meta.dims, "sidecar");
  return meta;
}

std::string format_sidecar(const VolumeMeta& meta) {
  std::ostringstream out;
  out << "format: mv3c-raw-v1\n";
  out << "dims: " << meta.dims.nx << " " << meta.dims.ny << " " << meta.dims.nz << "\n";
  out << "dtype: " << dtype_name(meta.dtype) << "\n";
  out << "spacing: " << meta.spacing.sx << " " << meta.spacing.sy << " " << meta.spacing.sz << "\n";
  out << "byte_order: little-endian\n";
  if (!meta.description.empty()) out << "description: " << meta.description << "\n";
  return out.str();
}

Volume read_raw(const std::string& data_path, const std::string& meta_path) {
  auto meta_bytes = read_file(meta_path);
  VolumeMeta meta = parse_sidecar(std::string(meta_bytes.begin(), meta_bytes.end()));
  auto bytes = read_file(data_path);
  std::size_t expected = meta.dims.voxels() * dtype_size(meta.dtype);
  if (bytes.size() != expected)
    fail(ErrorKind::format, "raw payload length mismatch for " + data_path + ": expected " +
                                std::to_string(expected) + " bytes, got " +
                                std::to_string(bytes.size()));
  Volume v;
  v.dims = meta.dims;
  v.dtype = meta.dtype;
  v.spacing = meta.spacing;
  std::size_t n = meta.dims.voxels();
  switch (meta.dtype) {
    case Dtype::u8: v.data = decode_payload<std::uint8_t>(bytes, n); break;
    case Dtype::i16: v.data = decode_payload<std::int16_t>(bytes, n); break;
    case Dtype::u16: v.data = decode_payload<std::uint16_t>(bytes, n); break;
    case Dtype::f32: v.data = decode_payload<float>(bytes, n); break;
  }
  return v;
}

void write_raw(const Volume& v, const std::string& data_path, const std::string& meta_path) {
  VolumeMeta meta{v.dims, v.dtype, v.spacing, ""};
  std::string sidecar = format_sidecar(meta);
  write_file(meta_path, sidecar.data(), sidecar.size());
  std::vector<std::uint8_t> bytes(v.voxel_count() * dtype_size(v.dtype));
  std::visit(
      [&](const auto& vec) {
        using T = typename std::decay_t<decltype(vec)>::value_type;
        for (std::size_t i = 0; i < vec.size(); ++i) store_le<T>(bytes.data() + i * sizeof(T), vec[i]);
      },
      v.data);
  write_file(data_path, bytes.data(), bytes.size());
}

// ---------------------------------------------------------------------------
// NIfTI-1

namespace {

template <typename T>
T load_swappable(const std::uint8_t* p, bool swap) {
  std::array<std::uint8_t, sizeof(T)> b;
  std::memcpy(b.data(), p, sizeof(T));
  if (swap) std::reverse(b.begin(), b.end());
  return std::bit_cast<T>(b);
}

}  // namespace

Volume read_nifti(const std::string& path) {
  auto bytes = read_file(path);
  if (bytes.size() >= 2 && bytes[0] == 0x1f && bytes[1] == 0x8b)
    fail(ErrorKind::format, "nifti: compressed payload (gzip) is not supported");
  if (bytes.size() < 348) fail(ErrorKind::format, "nifti: file shorter than the 348-byte header");

  const std::uint8_t* h = bytes.data();
  bool swap = false;
  std::int32_t sizeof_hdr = load_swappable<std::int32_t>(h + 0, false);
  if (sizeof_hdr != 348) {
    swap = true;
    sizeof_hdr = load_swappable<std::int32_t>(h + 0, true);
    if (sizeof_hdr != 348) fail(ErrorKind::format, "nifti: bad sizeof_hdr field");
  }

  char magic[4];
  std::memcpy(magic, h + 344, 4);
  if (std::memcmp(magic, "ni1", 3) == 0)
    fail(ErrorKind::format, "nifti: two-file layout (magic 'ni1') is not supported");
  if (std::memcmp(magic, "n+1", 3) != 0 || magic[3] != '\0')
    fail(ErrorKind::format, "nifti: bad magic field");

  auto dim_at = [&](int i) { return load_swappable<std::int16_t>(h + 40 + 2 * i, swap); };
  std::int16_t ndim = dim_at(0);
  if (ndim < 1 || ndim > 7) fail(ErrorKind::format, "nifti: bad dim[0] field");
  Dims3 dims{1, 1, 1};
  if (ndim >= 1) dims.nx = static_cast<std::uint32_t>(std::max<std::int16_t>(dim_at(1), 0));
  if (ndim >= 2) dims.ny = static_cast<std::uint32_t>(std::max<std::int16_t>(dim_at(2), 0));
  if (ndim >= 3) dims.nz = static_cast<std::uint32_t>(std::max<std::int16_t>(dim_at(3), 0));
  for (int i = 4; i <= ndim; ++i)
    if (dim_at(i) > 1) fail(ErrorKind::format, "nifti: dim[" + std::to_string(i) + "] > 1 is not supported");
  check_dims(dims, "nifti");

  std::int16_t datatype = load_swappable<std::int16_t>(h + 70, swap);
  std::int16_t bitpix = load_swappable<std::int16_t>(h + 72, swap);
  Dtype dtype;
  switch (datatype) {
    case 2: dtype = Dtype::u8; break;
    case 4: dtype = Dtype::i16; break;
    case 16: dtype = Dtype::f32; break;
    case 512: dtype = Dtype::u16; break;
    default:
      fail(ErrorKind::format, "nifti: unsupported datatype field " + std::to_string(datatype));
  }
  if (bitpix != static_cast<std::int16_t>(8 * dtype_size(dtype)))
    fail(ErrorKind::format, "nifti: bitpix field inconsistent with datatype");

  Spacing3 spacing;
  spacing.sx = load_swappable<float>(h + 76 + 4 * 1, swap);
  spacing.sy = load_swappable<float>(h + 76 + 4 * 2, swap);
  spacing.sz = load_swappable<float>(h + 76 + 4 * 3, swap);

  float vox_offset_f = load_swappable<float>(h + 108, swap);
  if (!(vox_offset_f >= 348.0f)) fail(ErrorKind::format, "nifti: bad vox_offset field");
  auto vox_offset = static_cast<std::size_t>(vox_offset_f);
  float slope = load_swappable<float>(h + 112, swap);
  float inter = load_swappable<float>(h + 116, swap);

  std::size_t n = dims.voxels();
  std::size_t need = vox_offset + n * dtype_size(dtype);
  if (bytes.size() < need)
    fail(ErrorKind::format, "nifti: file truncated, need " + std::to_string(need) + " bytes, got " +
                                std::to_string(bytes.size()));

  const std::uint8_t* p = bytes.data() + vox_offset;
  bool scale = (slope != 0.0f) && !(slope == 1.0f && inter == 0.0f);

  Volume v;
  v.dims = dims;
  v.spacing = spacing;
  auto read_as_double = [&](std::size_t i) -> double {
    switch (dtype) {
      case Dtype::u8: return p[i];
      case Dtype::i16: return load_swappable<std::int16_t>(p + 2 * i, swap);
      case Dtype::u16: return load_swappable<std::uint16_t>(p + 2 * i, swap);
      case Dtype::f32: return load_swappable<float>(p + 4 * i, swap);
    }
    return 0.0;
  };

  if (scale) {
    v.dtype = Dtype::f32;
    std::vector<float> out(n);
    for (std::size_t i = 0; i < n; ++i)
      out[i] = static_cast<float>(read_as_double(i) * slope + inter);
    v.data = std::move(out);
    return v;
  }

  v.dtype = dtype;
  switch (dtype) {
    case Dtype::u8: {
      std::vector<std::uint8_t> out(p, p + n);
      v.data = std::move(out);
      break;
    }
    case Dtype::i16: {
      std::vector<std::int16_t> out(n);
      for (std::size_t i = 0; i < n; ++i) out[i] = load_swappable<std::int16_t>(p + 2 * i, swap);
      v.data = std::move(out);
      break;
    }
    case Dtype::u16: {
      std::vector<std::uint16_t> out(n);
      for (std::size_t i = 0; i < n; ++i) out[i] = load_swappable<std::uint16_t>(p + 2 * i, swap);
      v.data = std::move(out);
      break;
    }
    case Dtype::f32: {
      std::vector<float> out(n);
      for (std::size_t i = 0; i < n; ++i) out[i] = load_swappable<float>(p + 4 * i, swap);
      v.data = std::move(out);
      break;
    }
  }
  return v;
}

}  // namespace mv3c
