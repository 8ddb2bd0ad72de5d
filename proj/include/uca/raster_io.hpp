#pragma once

#include <filesystem>
#include <string>

#include "uca/raster.hpp"

namespace uca {

enum class BitDepth { Eight = 8, Sixteen = 16 };

/// Reads a grayscale PGM (P5, maxval up to 65535) or PNG (8/16-bit gray).
/// Integer samples are normalised to [0,1] by the file's maximum value.
/// Throws InputError for missing files, malformed headers, unsupported
/// colour types and dimensions that overflow the file or the size limit.
ScalarRaster load_scalar_raster(const std::filesystem::path& path);

/// Writes `raster` clamped to [0,1] and quantised to `depth` bits. The format
/// follows the extension (.pgm or .png). The file is written to a temporary
/// sibling and renamed into place.
void save_scalar_raster(const ScalarRaster& raster, const std::filesystem::path& path,
                        BitDepth depth = BitDepth::Sixteen);

/// Binary masks go out as 8-bit {0, 255}.
void save_mask(const ScalarRaster& mask, const std::filesystem::path& path);

/// Persists a vector raster as two 16-bit component images next to a JSON
/// sidecar at `sidecar`. Zero vectors round-trip exactly.
void save_vector_raster(const VectorRaster& raster, const std::filesystem::path& sidecar);
VectorRaster load_vector_raster(const std::filesystem::path& sidecar);

/// Replaces the file at `path` with `bytes` via temp file + rename.
void write_file_atomically(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace uca
