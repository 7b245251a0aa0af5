#include "cbct/geometry.hpp"

#include "cbct/errors.hpp"

#include <string>

namespace cbct {

namespace {

    bool positiveFinite(double v) { return std::isfinite(v) && v > 0.0; }

    ViewFrame basis(const TrajectoryGeometry& traj, std::uint32_t view)
    {
        const double theta = traj.viewAngle(view);
        const double c = std::cos(theta);
        const double s = std::sin(theta);
        const Vec3 dir{c, s, 0.0};
        ViewFrame b;
        b.source = Vec3{-traj.sid * c, -traj.sid * s, 0.0};
        b.principalPoint = b.source + traj.sdd * dir;
        b.uAxis = Vec3{-s, c, 0.0};
        b.vAxis = Vec3{0.0, 0.0, 1.0};
        return b;
    }

    void checkView(const TrajectoryGeometry& traj, std::uint32_t view)
    {
        if(view >= traj.nViews)
        {
            throw std::out_of_range("view index " + std::to_string(view) + " out of range [0, "
                                    + std::to_string(traj.nViews) + ")");
        }
    }

} // namespace

Vec3 VolumeGeometry::boxMin() const
{
    return Vec3{centerOffset.x - 0.5 * nx * voxelSize.x, centerOffset.y - 0.5 * ny * voxelSize.y,
                centerOffset.z - 0.5 * nz * voxelSize.z};
}

Vec3 VolumeGeometry::boxMax() const
{
    return Vec3{centerOffset.x + 0.5 * nx * voxelSize.x, centerOffset.y + 0.5 * ny * voxelSize.y,
                centerOffset.z + 0.5 * nz * voxelSize.z};
}

Vec3 VolumeGeometry::voxelCenter(std::uint32_t i, std::uint32_t j, std::uint32_t k) const
{
    return Vec3{centerOffset.x + (i + 0.5 - 0.5 * nx) * voxelSize.x,
                centerOffset.y + (j + 0.5 - 0.5 * ny) * voxelSize.y,
                centerOffset.z + (k + 0.5 - 0.5 * nz) * voxelSize.z};
}

void VolumeGeometry::validate() const
{
    if(nx == 0 || ny == 0 || nz == 0)
    {
        throw GeometryError("volume dimensions must be at least 1");
    }
    if(!positiveFinite(voxelSize.x) || !positiveFinite(voxelSize.y) || !positiveFinite(voxelSize.z))
    {
        throw GeometryError("voxel sizes must be positive");
    }
    if(!std::isfinite(centerOffset.x) || !std::isfinite(centerOffset.y)
       || !std::isfinite(centerOffset.z))
    {
        throw GeometryError("volume offset must be finite");
    }
}

void DetectorGeometry::validate() const
{
    if(nu == 0 || nv == 0)
    {
        throw GeometryError("detector dimensions must be at least 1");
    }
    if(!positiveFinite(pixelSize.u) || !positiveFinite(pixelSize.v))
    {
        throw GeometryError("detector pixel sizes must be positive");
    }
    if(!std::isfinite(principalPointOffset.u) || !std::isfinite(principalPointOffset.v))
    {
        throw GeometryError("principal point offset must be finite");
    }
}

double TrajectoryGeometry::viewAngle(std::uint32_t view) const
{
    return startAngle + double(view) * angularSpan / double(nViews);
}

void TrajectoryGeometry::validate() const
{
    if(!positiveFinite(sid))
    {
        throw GeometryError("source to isocenter distance must be positive");
    }
    if(!std::isfinite(sdd) || !(sdd > sid))
    {
        throw GeometryError("source to detector distance must exceed source to isocenter distance");
    }
    if(nViews == 0)
    {
        throw GeometryError("trajectory needs at least one view");
    }
    if(!std::isfinite(startAngle) || !std::isfinite(angularSpan))
    {
        throw GeometryError("trajectory angles must be finite");
    }
    detector.validate();
}

TrajectoryGeometry makeCircularTrajectory(double sid, double sdd, std::uint32_t nViews,
                                          double startAngle, double angularSpan,
                                          const DetectorGeometry& detector)
{
    TrajectoryGeometry t{sid, sdd, nViews, startAngle, angularSpan, detector};
    t.validate();
    return t;
}

Vec3 sourcePosition(const TrajectoryGeometry& traj, std::uint32_t view)
{
    checkView(traj, view);
    return basis(traj, view).source;
}

Vec2 pixelCoordinates(const DetectorGeometry& det, std::uint32_t u, std::uint32_t v)
{
    return Vec2{(u + 0.5 - 0.5 * det.nu) * det.pixelSize.u + det.principalPointOffset.u,
                (v + 0.5 - 0.5 * det.nv) * det.pixelSize.v + det.principalPointOffset.v};
}

Vec3 detectorPixelCenter(const TrajectoryGeometry& traj, std::uint32_t view, std::uint32_t u,
                         std::uint32_t v)
{
    checkView(traj, view);
    const DetectorGeometry& det = traj.detector;
    if(u >= det.nu || v >= det.nv)
    {
        throw std::out_of_range("detector pixel (" + std::to_string(u) + ", " + std::to_string(v)
                                + ") out of range");
    }
    const Vec2 p = pixelCoordinates(det, u, v);
    return basis(traj, view).detectorPoint(p.u, p.v);
}

ViewFrame viewFrame(const TrajectoryGeometry& traj, std::uint32_t view)
{
    checkView(traj, view);
    return basis(traj, view);
}

} // namespace cbct
