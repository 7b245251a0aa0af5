#pragma once

#include "cbct/geometry.hpp"
#include "cbct/volume.hpp"

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace cbct {

/// Constant-intensity ellipsoid in the normalized cube [-1, 1]^3.
///
/// eulerAngles (phi, theta, psi) give the intrinsic z-x-z orientation
/// Q = Rz(phi) Rx(theta) Rz(psi) of the ellipsoid axes. A point p lies inside
/// when |Q^T (p - center) / semiAxes| <= 1.
struct Ellipsoid
{
    Vec3 center;
    Vec3 semiAxes;
    Vec3 eulerAngles;
    double intensity = 0.0;

    bool contains(Vec3 p) const;
};

/// Voxelizes a sum of ellipsoids by sampling voxel centers. The normalized
/// cube maps affinely onto the volume bounding box, so anisotropic voxels
/// stretch the phantom with the box.
Volume generatePhantom(const std::vector<Ellipsoid>& ellipsoids, const VolumeGeometry& geom);

/// Ten ellipsoid 3D Shepp-Logan head. Contrasts are 1, -3/4, -1/4 and 1/8,
/// exact in binary, so every overlap sums exactly and all voxel values lie
/// in [0, 1]. Same table as data/shepp_logan_3d.txt.
std::vector<Ellipsoid> sheppLogan3d();

/// Reads ellipsoids from a whitespace separated table, one per line:
/// cx cy cz a b c phi theta psi intensity (angles in radians). Blank lines and
/// lines starting with '#' are skipped. Throws ConfigError on malformed rows.
std::vector<Ellipsoid> parseEllipsoids(std::istream& in);
std::vector<Ellipsoid> readEllipsoidFile(const std::string& path);

} // namespace cbct
