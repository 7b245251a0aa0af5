#pragma once

#include "cbct/geometry.hpp"

#include <iosfwd>
#include <string>

namespace cbct {

/// Volume and acquisition geometry read from a `key = value` config file.
struct GeometryConfig
{
    VolumeGeometry volume;
    TrajectoryGeometry trajectory;
};

/// Parses the flat config format: one `key = value` per line, `#` starts a
/// comment. Recognized keys: sid_mm, sdd_mm, n_views, start_angle_rad,
/// angular_span_rad, det_nu, det_nv, det_pitch_u_mm, det_pitch_v_mm,
/// det_offset_u_mm, det_offset_v_mm, vol_nx, vol_ny, vol_nz, vox_x_mm,
/// vox_y_mm, vox_z_mm, vol_offset_x_mm, vol_offset_y_mm, vol_offset_z_mm.
/// Angles and offsets default to a full scan with zero offsets, every other
/// key is required. Unknown or repeated keys throw ConfigError, invalid
/// geometry throws GeometryError.
GeometryConfig parseGeometryConfig(std::istream& in);
GeometryConfig readGeometryConfig(const std::string& path);

/// Serializes back into the config format, values printed round-trip exact.
std::string formatGeometryConfig(const GeometryConfig& cfg);

} // namespace cbct
