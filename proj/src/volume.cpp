#include "cbct/volume.hpp"

#include "cbct/errors.hpp"

#include <string>

namespace cbct {

Volume::Volume(const VolumeGeometry& geom, std::vector<double> values)
    : geometry(geom)
    , data(std::move(values))
{
    if(data.size() != geometry.voxelCount())
    {
        throw GeometryMismatchError("volume data has " + std::to_string(data.size())
                                    + " values, geometry needs "
                                    + std::to_string(geometry.voxelCount()));
    }
}

ProjectionStack::ProjectionStack(const TrajectoryGeometry& traj, std::vector<double> values)
    : trajectory(traj)
    , data(std::move(values))
{
    if(data.size() != trajectory.projectionSize())
    {
        throw GeometryMismatchError("projection data has " + std::to_string(data.size())
                                    + " values, trajectory needs "
                                    + std::to_string(trajectory.projectionSize()));
    }
}

} // namespace cbct
