#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "mv3c/volume_io.hpp"
#include "test_util.hpp"

using namespace mv3c;

namespace {

struct TempFiles {
  std::filesystem::path dir;
  TempFiles() {
    dir = std::filesystem::temp_directory_path() /
          ("mv3c-test-" + std::to_string(std::random_device{}()));
    std::filesystem::create_directories(dir);
  }
  ~TempFiles() { std::filesystem::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
}

// Minimal NIfTI-1 builder for ingestion tests.
struct NiftiBuilder {
  std::vector<std::uint8_t> bytes = std::vector<std::uint8_t>(352, 0);
  bool big_endian = false;

  void put_i32(std::size_t off, std::int32_t v) { put(off, std::bit_cast<std::uint32_t>(v), 4); }
  void put_i16(std::size_t off, std::int16_t v) { put(off, std::bit_cast<std::uint16_t>(v), 2); }
  void put_f32(std::size_t off, float v) { put(off, std::bit_cast<std::uint32_t>(v), 4); }
  void put(std::size_t off, std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) {
      int shift = big_endian ? 8 * (n - 1 - i) : 8 * i;
      bytes[off + std::size_t(i)] = std::uint8_t(v >> shift);
    }
  }

  explicit NiftiBuilder(bool be = false) : big_endian(be) {
    put_i32(0, 348);
    put_i16(40, 3);  // dim[0]
    put_f32(108, 352.0f);  // vox_offset
    put_f32(112, 1.0f);    // scl_slope
    put_f32(116, 0.0f);    // scl_inter
    bytes[344] = 'n';
    bytes[345] = '+';
    bytes[346] = '1';
    bytes[347] = 0;
  }

  void set_dims(std::int16_t nx, std::int16_t ny, std::int16_t nz) {
    put_i16(42, nx);
    put_i16(44, ny);
    put_i16(46, nz);
    put_f32(76 + 4, 1.5f);
    put_f32(76 + 8, 2.0f);
    put_f32(76 + 12, 2.5f);
  }

  void set_type(std::int16_t datatype, std::int16_t bitpix) {
    put_i16(70, datatype);
    put_i16(72, bitpix);
  }

  void append_u16(std::uint16_t v) {
    if (big_endian) {
      bytes.push_back(std::uint8_t(v >> 8));
      bytes.push_back(std::uint8_t(v));
    } else {
      bytes.push_back(std::uint8_t(v));
      bytes.push_back(std::uint8_t(v >> 8));
    }
  }
};

}  // namespace

TEST_SUITE("volume_io") {

TEST_CASE("raw round trip is bit-exact for every dtype") {
  TempFiles tmp;
  std::mt19937_64 seeds(42);
  for (Dtype dtype : {Dtype::u8, Dtype::i16, Dtype::u16, Dtype::f32}) {
    for (int rep = 0; rep < 8; ++rep) {
      Dims3 dims{std::uint32_t(1 + seeds() % 9), std::uint32_t(1 + seeds() % 9),
                 std::uint32_t(1 + seeds() % 9)};
      Volume v = testutil::random_volume(dims, dtype, seeds());
      v.spacing = {0.5f, 1.25f, 2.0f};
      write_raw(v, tmp.path("v.raw"), tmp.path("v.raw.meta"));
      Volume back = read_raw(tmp.path("v.raw"), tmp.path("v.raw.meta"));
      CHECK(bit_identical(v, back));
    }
  }
}

TEST_CASE("8-byte file with 2x2x2 u8 meta maps voxels in raster order") {
  TempFiles tmp;
  write_bytes(tmp.path("v.raw"), {1, 2, 3, 4, 5, 6, 7, 8});
  std::ofstream(tmp.path("v.raw.meta"))
      << "format: mv3c-raw-v1\ndims: 2 2 2\ndtype: uint8\nbyte_order: little-endian\n";
  Volume v = read_raw(tmp.path("v.raw"), tmp.path("v.raw.meta"));
  auto& data = std::get<std::vector<std::uint8_t>>(v.data);
  CHECK(data == std::vector<std::uint8_t>{1, 2, 3, 4, 5, 6, 7, 8});
  CHECK(v.dims.at(1, 0, 0) == 1);
  CHECK(v.dims.at(0, 1, 0) == 2);
  CHECK(v.dims.at(0, 0, 1) == 4);
}

TEST_CASE("length mismatch reports expected and actual byte counts") {
  TempFiles tmp;
  write_bytes(tmp.path("v.raw"), {1, 2, 3, 4, 5, 6, 7});
  std::ofstream(tmp.path("v.raw.meta"))
      << "format: mv3c-raw-v1\ndims: 2 2 2\ndtype: uint8\n";
  try {
    read_raw(tmp.path("v.raw"), tmp.path("v.raw.meta"));
    FAIL("expected a format error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::format);
    CHECK(std::string(e.what()).find("8") != std::string::npos);
    CHECK(std::string(e.what()).find("7") != std::string::npos);
  }
}

TEST_CASE("all-zero i16 payload reads as an all-zero volume") {
  TempFiles tmp;
  write_bytes(tmp.path("v.raw"), std::vector<std::uint8_t>(128, 0));
  std::ofstream(tmp.path("v.raw.meta"))
      << "format: mv3c-raw-v1\ndims: 4 4 4\ndtype: int16\n";
  Volume v = read_raw(tmp.path("v.raw"), tmp.path("v.raw.meta"));
  for (std::size_t i = 0; i < v.voxel_count(); ++i) CHECK(v.value_at(i) == 0.0);
}

TEST_CASE("unknown dtype in sidecar is an unsupported-format error") {
  CHECK_THROWS_AS(parse_sidecar("format: mv3c-raw-v1\ndims: 1 1 1\ndtype: int64\n"), Error);
}

TEST_CASE("1x1x1 volume writes a single-element file") {
  TempFiles tmp;
  Volume v = make_volume({1, 1, 1}, Dtype::u8);
  std::get<std::vector<std::uint8_t>>(v.data)[0] = 42;
  write_raw(v, tmp.path("one.raw"), tmp.path("one.raw.meta"));
  CHECK(std::filesystem::file_size(tmp.path("one.raw")) == 1);
  CHECK(bit_identical(v, read_raw(tmp.path("one.raw"), tmp.path("one.raw.meta"))));
}

TEST_CASE("float NaN bit patterns survive the round trip") {
  TempFiles tmp;
  Volume v = make_volume({2, 1, 1}, Dtype::f32);
  auto& data = std::get<std::vector<float>>(v.data);
  data[0] = std::bit_cast<float>(0x7fc00abcu);  // NaN with payload
  data[1] = -0.0f;
  write_raw(v, tmp.path("nan.raw"), tmp.path("nan.raw.meta"));
  CHECK(bit_identical(v, read_raw(tmp.path("nan.raw"), tmp.path("nan.raw.meta"))));
}

TEST_CASE("sidecar meta round-trips") {
  VolumeMeta meta{{3, 5, 7}, Dtype::u16, {0.25f, 0.5f, 4.0f}, "cardiac scan, cropped"};
  CHECK(parse_sidecar(format_sidecar(meta)) == meta);
}

TEST_CASE("nifti: valid little-endian u16 volume") {
  TempFiles tmp;
  NiftiBuilder nb;
  nb.set_dims(3, 2, 2);
  nb.set_type(512, 16);
  for (std::uint16_t i = 0; i < 12; ++i) nb.append_u16(std::uint16_t(100 + i));
  write_bytes(tmp.path("a.nii"), nb.bytes);
  Volume v = read_nifti(tmp.path("a.nii"));
  CHECK(v.dims == Dims3{3, 2, 2});
  CHECK(v.dtype == Dtype::u16);
  CHECK(v.spacing.sx == doctest::Approx(1.5f));
  CHECK(v.value_at(0) == 100.0);
  CHECK(v.value_at(11) == 111.0);
}

TEST_CASE("nifti: header-declared big-endian payload is swapped") {
  TempFiles tmp;
  NiftiBuilder nb(true);
  nb.set_dims(2, 2, 2);
  nb.set_type(512, 16);
  for (std::uint16_t i = 0; i < 8; ++i) nb.append_u16(std::uint16_t(1000 + i));
  write_bytes(tmp.path("be.nii"), nb.bytes);
  Volume v = read_nifti(tmp.path("be.nii"));
  CHECK(v.value_at(0) == 1000.0);
  CHECK(v.value_at(7) == 1007.0);
}

TEST_CASE("nifti: two-file magic 'ni1' is rejected") {
  TempFiles tmp;
  NiftiBuilder nb;
  nb.set_dims(2, 2, 2);
  nb.set_type(2, 8);
  nb.bytes[345] = 'i';
  nb.bytes[346] = '1';
  nb.bytes.resize(352 + 8, 0);
  write_bytes(tmp.path("ni1.nii"), nb.bytes);
  try {
    read_nifti(tmp.path("ni1.nii"));
    FAIL("expected an unsupported-format error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::format);
    CHECK(std::string(e.what()).find("ni1") != std::string::npos);
  }
}

TEST_CASE("nifti: unsupported datatype names the offending field") {
  TempFiles tmp;
  NiftiBuilder nb;
  nb.set_dims(2, 2, 2);
  nb.set_type(8, 32);  // int32: not supported
  nb.bytes.resize(352 + 32, 0);
  write_bytes(tmp.path("i32.nii"), nb.bytes);
  try {
    read_nifti(tmp.path("i32.nii"));
    FAIL("expected an unsupported-format error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("datatype") != std::string::npos);
  }
}

TEST_CASE("nifti: gzip payload is rejected as compressed") {
  TempFiles tmp;
  write_bytes(tmp.path("z.nii"), {0x1f, 0x8b, 0x08, 0x00});
  try {
    read_nifti(tmp.path("z.nii"));
    FAIL("expected an unsupported-format error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("compressed") != std::string::npos);
  }
}

TEST_CASE("nifti: identity scaling keeps values and dtype") {
  TempFiles tmp;
  NiftiBuilder nb;
  nb.set_dims(2, 2, 2);
  nb.set_type(2, 8);
  for (int i = 0; i < 8; ++i) nb.bytes.push_back(std::uint8_t(i * 10));
  write_bytes(tmp.path("id.nii"), nb.bytes);
  Volume v = read_nifti(tmp.path("id.nii"));
  CHECK(v.dtype == Dtype::u8);
  CHECK(v.value_at(3) == 30.0);
}

TEST_CASE("nifti: non-identity scaling promotes to float32") {
  TempFiles tmp;
  NiftiBuilder nb;
  nb.set_dims(2, 2, 2);
  nb.set_type(2, 8);
  nb.put_f32(112, 2.0f);
  nb.put_f32(116, 5.0f);
  for (int i = 0; i < 8; ++i) nb.bytes.push_back(std::uint8_t(i));
  write_bytes(tmp.path("sc.nii"), nb.bytes);
  Volume v = read_nifti(tmp.path("sc.nii"));
  CHECK(v.dtype == Dtype::f32);
  CHECK(v.value_at(3) == doctest::Approx(11.0));
}

TEST_CASE("nifti: truncated payload errors instead of silently reading short") {
  TempFiles tmp;
  NiftiBuilder nb;
  nb.set_dims(4, 4, 4);
  nb.set_type(512, 16);
  nb.append_u16(1);  // 64 voxels declared, 1 present
  write_bytes(tmp.path("short.nii"), nb.bytes);
  CHECK_THROWS_AS(read_nifti(tmp.path("short.nii")), Error);
}

TEST_CASE("constant phantom: all voxels equal for any seed") {
  for (std::uint64_t seed : {0ULL, 7ULL, 123456ULL}) {
    Volume v = synth_phantom(PhantomKind::constant, {8, 8, 8}, seed);
    double first = v.value_at(0);
    for (std::size_t i = 1; i < v.voxel_count(); ++i) CHECK(v.value_at(i) == first);
  }
}

TEST_CASE("phantoms are pure functions of (kind, dims, seed)") {
  for (PhantomKind kind : {PhantomKind::constant, PhantomKind::gradient_ramp,
                           PhantomKind::gaussian_blobs, PhantomKind::blobs_plus_noise}) {
    Volume a = synth_phantom(kind, {12, 10, 9}, 31);
    Volume b = synth_phantom(kind, {12, 10, 9}, 31);
    CHECK(bit_identical(a, b));
  }
}

TEST_CASE("blobs-plus-noise phantom has positive voxel spread") {
  Volume v = synth_phantom(PhantomKind::blobs_plus_noise, {64, 64, 64}, 7);
  double mean = 0.0;
  for (std::size_t i = 0; i < v.voxel_count(); ++i) mean += v.value_at(i);
  mean /= double(v.voxel_count());
  double var = 0.0;
  for (std::size_t i = 0; i < v.voxel_count(); ++i) {
    double d = v.value_at(i) - mean;
    var += d * d;
  }
  CHECK(std::sqrt(var / double(v.voxel_count())) > 0.0);
}

}  // TEST_SUITE
