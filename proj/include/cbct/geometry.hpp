#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>

namespace cbct {

struct Vec3
{
    double x = 0.0, y = 0.0, z = 0.0;

    friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend constexpr Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
    friend constexpr bool operator==(Vec3, Vec3) = default;
};

inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }

struct Vec2
{
    double u = 0.0, v = 0.0;
};

/// Voxel grid placed in world space. The volume center sits at centerOffset,
/// which is zero for a volume centered on the rotation isocenter.
struct VolumeGeometry
{
    std::uint32_t nx = 1, ny = 1, nz = 1;
    Vec3 voxelSize{1.0, 1.0, 1.0};
    Vec3 centerOffset{};

    std::size_t voxelCount() const { return std::size_t(nx) * ny * nz; }
    std::size_t index(std::uint32_t i, std::uint32_t j, std::uint32_t k) const
    {
        return (std::size_t(k) * ny + j) * nx + i;
    }
    /// Lower corner of the bounding box.
    Vec3 boxMin() const;
    Vec3 boxMax() const;
    Vec3 voxelCenter(std::uint32_t i, std::uint32_t j, std::uint32_t k) const;

    /// Throws GeometryError when counts are zero or voxel sizes non-positive.
    void validate() const;

    friend bool operator==(const VolumeGeometry&, const VolumeGeometry&) = default;
};

struct DetectorGeometry
{
    std::uint32_t nu = 1, nv = 1;
    Vec2 pixelSize{1.0, 1.0};
    Vec2 principalPointOffset{};

    std::size_t pixelCount() const { return std::size_t(nu) * nv; }
    void validate() const;

    friend bool operator==(const DetectorGeometry& a, const DetectorGeometry& b)
    {
        return a.nu == b.nu && a.nv == b.nv && a.pixelSize.u == b.pixelSize.u
            && a.pixelSize.v == b.pixelSize.v && a.principalPointOffset.u == b.principalPointOffset.u
            && a.principalPointOffset.v == b.principalPointOffset.v;
    }
};

/// Circular source trajectory around the z axis with a flat detector.
///
/// World frame is right-handed with the rotation axis along +z. At angle
/// theta the source sits at sid * (-cos theta, -sin theta, 0), so view 0 of a
/// scan starting at angle zero has its source on the negative x axis. The
/// detector plane is perpendicular to the source-isocenter ray at distance sdd
/// from the source, its u axis (-sin theta, cos theta, 0) lies in the rotation
/// plane and its v axis is +z.
struct TrajectoryGeometry
{
    double sid = 1.0;
    double sdd = 2.0;
    std::uint32_t nViews = 1;
    double startAngle = 0.0;
    double angularSpan = 2.0 * std::numbers::pi;
    DetectorGeometry detector{};

    std::size_t projectionSize() const { return detector.pixelCount() * nViews; }
    double viewAngle(std::uint32_t view) const;
    double magnification() const { return sdd / sid; }

    void validate() const;

    friend bool operator==(const TrajectoryGeometry&, const TrajectoryGeometry&) = default;
};

/// Builds and validates a circular trajectory, throws GeometryError on invalid input.
TrajectoryGeometry makeCircularTrajectory(double sid, double sdd, std::uint32_t nViews,
                                          double startAngle, double angularSpan,
                                          const DetectorGeometry& detector);

Vec3 sourcePosition(const TrajectoryGeometry& traj, std::uint32_t view);

Vec3 detectorPixelCenter(const TrajectoryGeometry& traj, std::uint32_t view, std::uint32_t u,
                         std::uint32_t v);

/// Source and detector basis of a single view.
struct ViewFrame
{
    Vec3 source;
    Vec3 principalPoint;
    Vec3 uAxis;
    Vec3 vAxis;

    /// World position of a point given in detector-plane coordinates (mm).
    Vec3 detectorPoint(double pu, double pv) const { return principalPoint + pu * uAxis + pv * vAxis; }
};

/// Detector-plane coordinates of the pixel center (u, v), principal point offset included.
Vec2 pixelCoordinates(const DetectorGeometry& det, std::uint32_t u, std::uint32_t v);

ViewFrame viewFrame(const TrajectoryGeometry& traj, std::uint32_t view);

} // namespace cbct
