#pragma once

#include "cbct/geometry.hpp"

#include <vector>

namespace cbct {

/// Attenuation values on a voxel grid, x fastest, then y, then z.
struct Volume
{
    VolumeGeometry geometry;
    std::vector<double> data;

    Volume() = default;
    explicit Volume(const VolumeGeometry& geom, double fill = 0.0)
        : geometry(geom)
        , data(geom.voxelCount(), fill)
    {
    }
    Volume(const VolumeGeometry& geom, std::vector<double> values);

    double& at(std::uint32_t i, std::uint32_t j, std::uint32_t k)
    {
        return data[geometry.index(i, j, k)];
    }
    double at(std::uint32_t i, std::uint32_t j, std::uint32_t k) const
    {
        return data[geometry.index(i, j, k)];
    }
};

/// Detector readings of all views, u fastest, then v, then view.
struct ProjectionStack
{
    TrajectoryGeometry trajectory;
    std::vector<double> data;

    ProjectionStack() = default;
    explicit ProjectionStack(const TrajectoryGeometry& traj, double fill = 0.0)
        : trajectory(traj)
        , data(traj.projectionSize(), fill)
    {
    }
    ProjectionStack(const TrajectoryGeometry& traj, std::vector<double> values);

    std::size_t index(std::uint32_t view, std::uint32_t u, std::uint32_t v) const
    {
        const DetectorGeometry& d = trajectory.detector;
        return (std::size_t(view) * d.nv + v) * d.nu + u;
    }
};

} // namespace cbct
