#pragma once

// Internal Siddon traversal kernel shared by the projector, the backprojector
// and traceRay.

#include "cbct/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>

namespace cbct::detail {

constexpr double kMinSegmentLength = 1e-12; // mm
constexpr double kParallelEpsilon = 1e-12;  // voxel pitches

struct Grid
{
    double min[3];
    double pitch[3];
    long n[3];
    std::size_t stride[3];

    explicit Grid(const VolumeGeometry& g)
    {
        const Vec3 lo = g.boxMin();
        min[0] = lo.x;
        min[1] = lo.y;
        min[2] = lo.z;
        pitch[0] = g.voxelSize.x;
        pitch[1] = g.voxelSize.y;
        pitch[2] = g.voxelSize.z;
        n[0] = g.nx;
        n[1] = g.ny;
        n[2] = g.nz;
        stride[0] = 1;
        stride[1] = std::size_t(g.nx);
        stride[2] = std::size_t(g.nx) * g.ny;
    }

    // Single source of plane positions for clipping and traversal.
    double plane(int axis, long k) const { return min[axis] + double(k) * pitch[axis]; }
};

/// Calls visit(voxelIndex, lengthMm) for every voxel the segment a -> b crosses, in ray order.
template <typename Visit>
inline void walkRay(const Grid& g, const Vec3& a, const Vec3& b, Visit&& visit)
{
    const double start[3] = {a.x, a.y, a.z};
    const double d[3] = {b.x - a.x, b.y - a.y, b.z - a.z};
    const double length = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
    if(!(length > 0.0))
    {
        return;
    }
    constexpr double inf = std::numeric_limits<double>::infinity();
    double tEnter = 0.0;
    double tExit = 1.0;
    double inv[3];
    bool parallel[3];
    for(int ax = 0; ax < 3; ++ax)
    {
        parallel[ax] = std::fabs(d[ax]) <= kParallelEpsilon * g.pitch[ax];
        if(parallel[ax])
        {
            inv[ax] = 0.0;
            if(!(start[ax] >= g.plane(ax, 0) && start[ax] < g.plane(ax, g.n[ax])))
            {
                return;
            }
        } else
        {
            inv[ax] = 1.0 / d[ax];
            double t0 = (g.plane(ax, 0) - start[ax]) * inv[ax];
            double t1 = (g.plane(ax, g.n[ax]) - start[ax]) * inv[ax];
            if(t0 > t1)
            {
                std::swap(t0, t1);
            }
            tEnter = std::max(tEnter, t0);
            tExit = std::min(tExit, t1);
        }
    }
    if(!(tExit > tEnter))
    {
        return;
    }

    long idx[3];
    long up[3];               // 1 when moving towards higher indices
    std::ptrdiff_t stride[3]; // signed voxel index change per step
    double tNext[3];
    std::size_t voxel = 0;
    for(int ax = 0; ax < 3; ++ax)
    {
        long i;
        if(parallel[ax])
        {
            i = long(std::floor((start[ax] - g.min[ax]) / g.pitch[ax]));
            up[ax] = 0;
        } else
        {
            const double s = (start[ax] + tEnter * d[ax] - g.min[ax]) / g.pitch[ax];
            if(d[ax] > 0.0)
            {
                i = long(std::floor(s));
                up[ax] = 1;
            } else
            {
                i = long(std::ceil(s)) - 1;
                up[ax] = 0;
            }
        }
        i = std::clamp(i, 0L, g.n[ax] - 1);
        idx[ax] = i;
        voxel += std::size_t(i) * g.stride[ax];
        stride[ax] = up[ax] ? std::ptrdiff_t(g.stride[ax]) : -std::ptrdiff_t(g.stride[ax]);
        tNext[ax] = parallel[ax] ? inf : (g.plane(ax, i + up[ax]) - start[ax]) * inv[ax];
    }

    double t = tEnter;
    while(true)
    {
        int ax;
        if(tNext[0] <= tNext[1] && tNext[0] <= tNext[2])
        {
            ax = 0;
        } else
        {
            ax = tNext[1] <= tNext[2] ? 1 : 2;
        }
        const double tn = tNext[ax];
        const double segment = (std::min(tn, tExit) - t) * length;
        if(segment > kMinSegmentLength)
        {
            visit(voxel, segment);
        }
        if(tn >= tExit)
        {
            break;
        }
        t = std::max(t, tn);
        const long i = idx[ax] + (up[ax] ? 1 : -1);
        if(i < 0 || i >= g.n[ax])
        {
            break;
        }
        idx[ax] = i;
        voxel += stride[ax];
        tNext[ax] = (g.plane(ax, i + up[ax]) - start[ax]) * inv[ax];
    }
}

} // namespace cbct::detail
