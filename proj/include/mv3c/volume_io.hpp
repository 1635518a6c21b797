#pragma once

#include <cstdint>
#include <string>

#include "mv3c/volume.hpp"

namespace mv3c {

// Flat little-endian binary payload plus a small text sidecar with explicit
// keys (see docs/FORMAT.md). The pair round-trips volumes bit-exactly.
Volume read_raw(const std::string& data_path, const std::string& meta_path);
void write_raw(const Volume& v, const std::string& data_path, const std::string& meta_path);

VolumeMeta parse_sidecar(const std::string& text);
std::string format_sidecar(const VolumeMeta& meta);

// Minimal NIfTI-1 ingestion: single-file uncompressed .nii, datatypes
// u8/i16/f32/u16, header-declared endianness. scl_slope/scl_inter are applied
// when slope != 0 and promote the result to float32 unless they are the
// identity. Everything else errors loudly.
Volume read_nifti(const std::string& path);

enum class PhantomKind { constant, gradient_ramp, gaussian_blobs, blobs_plus_noise };

// Deterministic int16 test volumes; same (kind, dims, seed) always yields the
// same voxels. blobs_plus_noise adds seeded noise at 5% of the blob image's
// dynamic range.
Volume synth_phantom(PhantomKind kind, Dims3 dims, std::uint64_t seed);

}  // namespace mv3c
