#pragma once

#include "cbct/geometry.hpp"
#include "cbct/volume.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace cbct {

/// Matrix-free linear map A from a domain of size n to a range of size m.
///
/// Solvers only touch A through apply/applyAdjoint. The leading dataSize()
/// entries of the range are the measured data; augmented operators append
/// further rows after them (see TikhonovOperator).
class LinearOperator
{
public:
    virtual ~LinearOperator() = default;

    virtual std::size_t domainSize() const = 0;
    virtual std::size_t rangeSize() const = 0;
    virtual std::size_t dataSize() const { return rangeSize(); }

    /// out = A x
    virtual void apply(std::span<const double> x, std::span<double> out) const = 0;
    /// out = A^T y
    virtual void applyAdjoint(std::span<const double> y, std::span<double> out) const = 0;
    /// diag(A^T A)
    virtual std::vector<double> normalDiagonal() const = 0;

    virtual unsigned workerCount() const { return 1; }
};

/// One voxel crossed by a ray together with the intersection length in mm.
struct RaySegment
{
    std::size_t voxel;
    double length;
};

using RaySegmentList = std::vector<RaySegment>;

/// Siddon traversal of the segment from `from` to `to` through the voxel grid.
///
/// Voxels are half-open boxes [lo, hi) along every axis, segments shorter than
/// 1e-12 mm are dropped and a direction component below 1e-12 voxel pitches is
/// treated as parallel to that axis.
RaySegmentList traceRay(const VolumeGeometry& geom, Vec3 from, Vec3 to);

/// Cone beam system matrix realised by a matched Siddon projector and
/// backprojector. One ray per detector pixel, from the source to the pixel center.
///
/// Projection is parallel over views with disjoint writes. Backprojection
/// gives every worker a private volume and sums them in worker order, so
/// results are bit reproducible for a fixed worker count.
class CbctOperator : public LinearOperator
{
public:
    CbctOperator(const VolumeGeometry& volume, const TrajectoryGeometry& trajectory,
                 unsigned workers = 1);

    const VolumeGeometry& volumeGeometry() const { return volume_; }
    const TrajectoryGeometry& trajectory() const { return trajectory_; }

    std::size_t domainSize() const override { return volume_.voxelCount(); }
    std::size_t rangeSize() const override { return trajectory_.projectionSize(); }
    unsigned workerCount() const override { return workers_; }

    void apply(std::span<const double> x, std::span<double> out) const override;
    void applyAdjoint(std::span<const double> y, std::span<double> out) const override;
    std::vector<double> normalDiagonal() const override;

    ProjectionStack project(const Volume& x) const;
    Volume backproject(const ProjectionStack& b) const;

    /// A 1, the chord length of every ray through the volume box.
    ProjectionStack rowSums() const;
    /// A^T 1
    Volume colSums() const;
    /// diag(A^T A) as a volume.
    Volume normalDiagonalVolume() const;

    /// Segments of the ray hitting pixel (u, v) of the given view.
    RaySegmentList raySegments(std::uint32_t view, std::uint32_t u, std::uint32_t v) const;

private:
    enum class Accumulate { Value, SquaredWeight };
    void backprojectInto(std::span<const double> y, std::span<double> out, Accumulate mode) const;

    VolumeGeometry volume_;
    TrajectoryGeometry trajectory_;
    unsigned workers_;
};

} // namespace cbct
