#include "cbct/operator.hpp"

#include "cbct/errors.hpp"
#include "parallel.hpp"
#include "siddon.hpp"

#include <algorithm>
#include <string>

namespace cbct {

namespace {

    void checkSize(std::size_t got, std::size_t expected, const char* what)
    {
        if(got != expected)
        {
            throw GeometryMismatchError(std::string(what) + " has " + std::to_string(got)
                                        + " elements, operator expects "
                                        + std::to_string(expected));
        }
    }

} // namespace

RaySegmentList traceRay(const VolumeGeometry& geom, Vec3 from, Vec3 to)
{
    geom.validate();
    RaySegmentList segments;
    detail::walkRay(detail::Grid(geom), from, to, [&](std::size_t voxel, double length) {
        segments.push_back(RaySegment{voxel, length});
    });
    return segments;
}

CbctOperator::CbctOperator(const VolumeGeometry& volume, const TrajectoryGeometry& trajectory,
                           unsigned workers)
    : volume_(volume)
    , trajectory_(trajectory)
    , workers_(std::max(1u, workers))
{
    volume_.validate();
    trajectory_.validate();
}

void CbctOperator::apply(std::span<const double> x, std::span<double> out) const
{
    checkSize(x.size(), domainSize(), "volume");
    checkSize(out.size(), rangeSize(), "projection output");
    const detail::Grid grid(volume_);
    const DetectorGeometry& det = trajectory_.detector;
    const std::size_t pixels = det.pixelCount();
    detail::parallelChunks(workers_, trajectory_.nViews,
                           [&](unsigned, std::size_t viewBegin, std::size_t viewEnd) {
                               for(std::size_t view = viewBegin; view < viewEnd; ++view)
                               {
                                   const ViewFrame frame = viewFrame(trajectory_, std::uint32_t(view));
                                   double* row = out.data() + view * pixels;
                                   for(std::uint32_t v = 0; v < det.nv; ++v)
                                   {
                                       for(std::uint32_t u = 0; u < det.nu; ++u)
                                       {
                                           const Vec2 p = pixelCoordinates(det, u, v);
                                           double sum = 0.0;
                                           detail::walkRay(grid, frame.source,
                                                           frame.detectorPoint(p.u, p.v),
                                                           [&](std::size_t voxel, double len) {
                                                               sum += len * x[voxel];
                                                           });
                                           row[std::size_t(v) * det.nu + u] = sum;
                                       }
                                   }
                               }
                           });
}

void CbctOperator::backprojectInto(std::span<const double> y, std::span<double> out,
                                   Accumulate mode) const
{
    checkSize(out.size(), domainSize(), "volume output");
    const detail::Grid grid(volume_);
    const DetectorGeometry& det = trajectory_.detector;
    const std::size_t pixels = det.pixelCount();
    const std::size_t n = domainSize();
    const unsigned workers = unsigned(std::min<std::size_t>(workers_, trajectory_.nViews));
    std::vector<std::vector<double>> partial(workers > 0 ? workers - 1 : 0);
    detail::parallelChunks(
        workers, trajectory_.nViews, [&](unsigned w, std::size_t viewBegin, std::size_t viewEnd) {
            std::span<double> acc = out;
            if(w > 0)
            {
                partial[w - 1].assign(n, 0.0);
                acc = partial[w - 1];
            } else
            {
                std::fill(out.begin(), out.end(), 0.0);
            }
            for(std::size_t view = viewBegin; view < viewEnd; ++view)
            {
                const ViewFrame frame = viewFrame(trajectory_, std::uint32_t(view));
                for(std::uint32_t v = 0; v < det.nv; ++v)
                {
                    for(std::uint32_t u = 0; u < det.nu; ++u)
                    {
                        const Vec2 p = pixelCoordinates(det, u, v);
                        const Vec3 target = frame.detectorPoint(p.u, p.v);
                        if(mode == Accumulate::Value)
                        {
                            const double value = y[view * pixels + std::size_t(v) * det.nu + u];
                            if(value == 0.0)
                            {
                                continue;
                            }
                            detail::walkRay(grid, frame.source, target,
                                            [&](std::size_t voxel, double len) {
                                                acc[voxel] += len * value;
                                            });
                        } else
                        {
                            detail::walkRay(grid, frame.source, target,
                                            [&](std::size_t voxel, double len) {
                                                acc[voxel] += len * len;
                                            });
                        }
                    }
                }
            }
        });
    // fixed-order merge
    for(const auto& p : partial)
    {
        for(std::size_t j = 0; j < n; ++j)
        {
            out[j] += p[j];
        }
    }
}

void CbctOperator::applyAdjoint(std::span<const double> y, std::span<double> out) const
{
    checkSize(y.size(), rangeSize(), "projections");
    backprojectInto(y, out, Accumulate::Value);
}

std::vector<double> CbctOperator::normalDiagonal() const
{
    std::vector<double> diag(domainSize());
    backprojectInto({}, diag, Accumulate::SquaredWeight);
    return diag;
}

ProjectionStack CbctOperator::project(const Volume& x) const
{
    if(!(x.geometry == volume_))
    {
        throw GeometryMismatchError("volume geometry differs from the operator volume geometry");
    }
    ProjectionStack b(trajectory_);
    apply(x.data, b.data);
    return b;
}

Volume CbctOperator::backproject(const ProjectionStack& b) const
{
    if(!(b.trajectory == trajectory_))
    {
        throw GeometryMismatchError("projection trajectory differs from the operator trajectory");
    }
    Volume x(volume_);
    applyAdjoint(b.data, x.data);
    return x;
}

ProjectionStack CbctOperator::rowSums() const { return project(Volume(volume_, 1.0)); }

Volume CbctOperator::colSums() const { return backproject(ProjectionStack(trajectory_, 1.0)); }

Volume CbctOperator::normalDiagonalVolume() const { return Volume(volume_, normalDiagonal()); }

RaySegmentList CbctOperator::raySegments(std::uint32_t view, std::uint32_t u, std::uint32_t v) const
{
    return traceRay(volume_, sourcePosition(trajectory_, view),
                    detectorPixelCenter(trajectory_, view, u, v));
}

} // namespace cbct
