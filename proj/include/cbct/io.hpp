#pragma once

#include "cbct/geometry.hpp"
#include "cbct/volume.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace cbct::io {

/// Sample type stored in the payload.
enum class Dtype : std::uint8_t { Float32 = 0, Float64 = 1 };

/// Contents of a KVOL or KPRJ file. dims are (nx, ny, nz) for volumes and
/// (nu, nv, n_views) for projections.
///
/// Both formats share a 20 byte little-endian header: 4 byte magic, version
/// byte (1), dtype byte, two zero bytes and three uint32 dimensions, followed
/// by the samples with the first dimension fastest.
struct ArrayFile
{
    std::array<std::uint32_t, 3> dims{};
    Dtype dtype = Dtype::Float64;
    std::vector<double> data;
};

constexpr std::size_t kHeaderSize = 20;

void writeVolume(const std::string& path, const Volume& vol, Dtype dtype = Dtype::Float64);
/// Raw contents, throws BadMagicError, VersionMismatchError, UnknownDtypeError,
/// TruncatedFileError or TrailingDataError.
ArrayFile readVolumeFile(const std::string& path);
/// Reads a volume and binds it to geom, DimensionMismatchError if the header disagrees.
Volume readVolume(const std::string& path, const VolumeGeometry& geom);

void writeProjections(const std::string& path, const ProjectionStack& prj,
                      Dtype dtype = Dtype::Float64);
ArrayFile readProjectionFile(const std::string& path);
ProjectionStack readProjections(const std::string& path, const TrajectoryGeometry& traj);

enum class Axis { X, Y, Z };

/// Writes slice `index` orthogonal to `axis` as binary 8-bit PGM. Values map
/// linearly from [lo, hi] to [0, 255], rounded half up and clamped. For a z
/// slice the image is nx wide and y grows downward; x slices are ny by nz and
/// y slices nx by nz with z growing downward.
void exportSlicePgm(const Volume& vol, Axis axis, std::uint32_t index, double lo, double hi,
                    const std::string& path);

/// Gray level of a single value under the PGM window.
std::uint8_t windowLevel(double value, double lo, double hi);

} // namespace cbct::io
