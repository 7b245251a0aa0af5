#include "dense_oracle.hpp"

#include "cbct/errors.hpp"
#include "cbct/operator.hpp"
#include "cbct/phantom.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>
#include <random>

using namespace cbct;
using namespace cbct::testing;

namespace {

const double kTwoPi = 2.0 * std::numbers::pi;

double maxAbsDiff(const std::vector<double>& a, const Eigen::VectorXd& b)
{
    double m = 0.0;
    for(std::size_t i = 0; i < a.size(); ++i)
    {
        m = std::max(m, std::abs(a[i] - b[Eigen::Index(i)]));
    }
    return m;
}

/// Largest entrywise deviation relative to the largest reference entry.
double relativeMaxError(const std::vector<double>& got, const Eigen::VectorXd& want)
{
    return maxAbsDiff(got, want) / want.cwiseAbs().maxCoeff();
}

double dotStd(const std::vector<double>& a, const std::vector<double>& b)
{
    return toEigen(a).dot(toEigen(b));
}

class DenseOracle : public ::testing::Test
{
protected:
    void SetUp() override
    {
        vol = oracleVolume();
        traj = oracleTrajectory();
        A = assembleSystemMatrix(vol, traj);
    }

    VolumeGeometry vol;
    TrajectoryGeometry traj;
    Eigen::MatrixXd A;
};

} // namespace

TEST_F(DenseOracle, InstanceIsNonTrivial)
{
    EXPECT_EQ(A.rows(), 512);
    EXPECT_EQ(A.cols(), 216);
    EXPECT_GT((A.array() > 0).count(), 1500);
    EXPECT_GT((A.colwise().sum().array() > 0).count(), 200);
}

TEST_F(DenseOracle, ProjectAndBackproject)
{
    std::mt19937_64 rng(7);
    for(unsigned workers : {1u, 3u})
    {
        const CbctOperator op(vol, traj, workers);
        for(int trial = 0; trial < 5; ++trial)
        {
            const Volume x(vol, randomVector(vol.voxelCount(), rng));
            EXPECT_LE(relativeMaxError(op.project(x).data, A * toEigen(x.data)), 1e-10);
            const ProjectionStack y(traj, randomVector(traj.projectionSize(), rng));
            EXPECT_LE(relativeMaxError(op.backproject(y).data, A.transpose() * toEigen(y.data)),
                      1e-10);
        }
    }
}

TEST_F(DenseOracle, RowColumnSumsAndNormalDiagonal)
{
    const CbctOperator op(vol, traj, 2);
    EXPECT_LE(relativeMaxError(op.rowSums().data, A.rowwise().sum()), 1e-10);
    EXPECT_LE(relativeMaxError(op.colSums().data, A.colwise().sum().transpose()), 1e-10);
    const Eigen::VectorXd diag = A.array().square().colwise().sum().transpose();
    EXPECT_LE(relativeMaxError(op.normalDiagonalVolume().data, diag), 1e-10);
    EXPECT_LE(relativeMaxError(op.normalDiagonal(), diag), 1e-10);
}

TEST_F(DenseOracle, RaySegmentsAreMatrixRows)
{
    const CbctOperator op(vol, traj);
    Eigen::Index row = 0;
    for(std::uint32_t view = 0; view < traj.nViews; ++view)
    {
        for(std::uint32_t v = 0; v < 8; ++v)
        {
            for(std::uint32_t u = 0; u < 8; ++u, ++row)
            {
                Eigen::VectorXd dense = Eigen::VectorXd::Zero(A.cols());
                for(const RaySegment& s : op.raySegments(view, u, v))
                {
                    EXPECT_GT(s.length, 0.0);
                    dense[Eigen::Index(s.voxel)] += s.length;
                }
                EXPECT_LE((dense - A.row(row).transpose()).cwiseAbs().maxCoeff(), 1e-10);
            }
        }
    }
}

TEST(Operator, AdjointnessRandomPairs)
{
    VolumeGeometry vol;
    vol.nx = vol.ny = vol.nz = 32;
    vol.voxelSize = {1.0, 1.0, 1.0};
    DetectorGeometry det;
    det.nu = 48;
    det.nv = 32;
    det.pixelSize = {1.5, 1.5};
    const TrajectoryGeometry traj = makeCircularTrajectory(100, 200, 16, 0.0, kTwoPi, det);
    const CbctOperator op(vol, traj, 4);
    std::mt19937_64 rng(11);
    for(int trial = 0; trial < 10; ++trial)
    {
        const std::vector<double> x = randomVector(vol.voxelCount(), rng);
        const std::vector<double> y = randomVector(traj.projectionSize(), rng);
        std::vector<double> ax(op.rangeSize()), aty(op.domainSize());
        op.apply(x, ax);
        op.applyAdjoint(y, aty);
        const double lhs = dotStd(ax, y);
        const double rhs = dotStd(x, aty);
        const double scale = toEigen(ax).norm() * toEigen(y).norm();
        EXPECT_LE(std::abs(lhs - rhs) / scale, 1e-10);
    }
}

TEST(Operator, AxialChordThroughTenMillimetreCube)
{
    VolumeGeometry vol;
    vol.nx = vol.ny = vol.nz = 10;
    vol.voxelSize = {1.0, 1.0, 1.0};
    DetectorGeometry det;
    det.nu = det.nv = 1;
    det.pixelSize = {1.0, 1.0};
    const TrajectoryGeometry traj = makeCircularTrajectory(100, 200, 4, 0.0, kTwoPi, det);
    const CbctOperator op(vol, traj);
    const ProjectionStack p = op.project(Volume(vol, 1.0));
    for(double value : p.data)
    {
        EXPECT_NEAR(value, 10.0, 1e-9);
    }
    // The central ray runs along the y = 0 and z = 0 planes and belongs to
    // the voxels above them.
    const RaySegmentList segments = op.raySegments(0, 0, 0);
    ASSERT_EQ(segments.size(), 10u);
    for(std::size_t i = 0; i < segments.size(); ++i)
    {
        EXPECT_EQ(segments[i].voxel, vol.index(std::uint32_t(i), 5, 5));
        EXPECT_NEAR(segments[i].length, 1.0, 1e-12);
    }
}

TEST(Operator, SegmentLengthsSumToBoxChord)
{
    VolumeGeometry vol;
    vol.nx = 13;
    vol.ny = 9;
    vol.nz = 7;
    vol.voxelSize = {0.86, 1.1, 3.44};
    vol.centerOffset = {0.3, -0.7, 1.1};
    const Vec3 lo = vol.boxMin();
    const Vec3 hi = vol.boxMax();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> pos(-30.0, 30.0);
    int hits = 0;
    for(int trial = 0; trial < 2000; ++trial)
    {
        const Vec3 a{pos(rng), pos(rng), pos(rng)};
        const Vec3 b{pos(rng), pos(rng), pos(rng)};
        const double chord = clippedLength({a.x, a.y, a.z}, {b.x, b.y, b.z}, {lo.x, lo.y, lo.z},
                                           {hi.x, hi.y, hi.z});
        double sum = 0.0;
        for(const RaySegment& s : traceRay(vol, a, b))
        {
            ASSERT_GT(s.length, 0.0);
            ASSERT_LT(s.voxel, vol.voxelCount());
            sum += s.length;
        }
        if(chord > 0.0)
        {
            ++hits;
            EXPECT_NEAR(sum / chord, 1.0, 1e-9);
        } else
        {
            EXPECT_EQ(sum, 0.0);
        }
    }
    EXPECT_GT(hits, 100);
}

TEST(Operator, AxisParallelAndGrazingRays)
{
    VolumeGeometry vol;
    vol.nx = vol.ny = vol.nz = 4;
    vol.voxelSize = {1.0, 1.0, 1.0};
    // Along the lower face y = -2: inside the half-open box.
    RaySegmentList s = traceRay(vol, {-10, -2, 0.5}, {10, -2, 0.5});
    ASSERT_EQ(s.size(), 4u);
    for(std::uint32_t i = 0; i < 4; ++i)
    {
        EXPECT_EQ(s[i].voxel, vol.index(i, 0, 2));
        EXPECT_NEAR(s[i].length, 1.0, 1e-12);
    }
    // Along the upper face y = 2: outside.
    EXPECT_TRUE(traceRay(vol, {-10, 2, 0.5}, {10, 2, 0.5}).empty());
    // Reversed direction visits voxels in ray order.
    s = traceRay(vol, {10, 0.5, 0.5}, {-10, 0.5, 0.5});
    ASSERT_EQ(s.size(), 4u);
    EXPECT_EQ(s.front().voxel, vol.index(3, 2, 2));
    EXPECT_EQ(s.back().voxel, vol.index(0, 2, 2));
    // Segment ending inside the volume.
    s = traceRay(vol, {-10, 0.5, 0.5}, {0.25, 0.5, 0.5});
    double sum = 0.0;
    for(const RaySegment& seg : s)
    {
        sum += seg.length;
    }
    EXPECT_NEAR(sum, 2.25, 1e-12);
    EXPECT_TRUE(traceRay(vol, {1, 1, 1}, {1, 1, 1}).empty());
}

TEST(Operator, ZeroInputsGiveZeroOutputs)
{
    const CbctOperator op(oracleVolume(), oracleTrajectory(), 2);
    const ProjectionStack p = op.project(Volume(oracleVolume()));
    EXPECT_TRUE(std::all_of(p.data.begin(), p.data.end(), [](double v) { return v == 0.0; }));
    const Volume b = op.backproject(ProjectionStack(oracleTrajectory()));
    EXPECT_TRUE(std::all_of(b.data.begin(), b.data.end(), [](double v) { return v == 0.0; }));
}

TEST(Operator, Linearity)
{
    const CbctOperator op(oracleVolume(), oracleTrajectory());
    std::mt19937_64 rng(3);
    const Volume x1(oracleVolume(), randomVector(216, rng));
    const Volume x2(oracleVolume(), randomVector(216, rng));
    Volume sum(oracleVolume());
    for(std::size_t i = 0; i < sum.data.size(); ++i)
    {
        sum.data[i] = x1.data[i] + x2.data[i];
    }
    const ProjectionStack p1 = op.project(x1);
    const ProjectionStack p2 = op.project(x2);
    const ProjectionStack ps = op.project(sum);
    for(std::size_t i = 0; i < ps.data.size(); ++i)
    {
        const double expected = p1.data[i] + p2.data[i];
        EXPECT_LE(std::abs(ps.data[i] - expected),
                  1e-12 * (std::abs(p1.data[i]) + std::abs(p2.data[i]) + 1e-300));
    }
}

TEST(Operator, SinglePixelBackprojection)
{
    const CbctOperator op(oracleVolume(), oracleTrajectory(), 3);
    ProjectionStack b(oracleTrajectory());
    b.data[b.index(5, 3, 4)] = 2.5;
    const Volume bp = op.backproject(b);
    std::vector<double> expected(bp.data.size(), 0.0);
    for(const RaySegment& s : op.raySegments(5, 3, 4))
    {
        expected[s.voxel] = 2.5 * s.length;
    }
    EXPECT_EQ(bp.data, expected);
}

TEST(Operator, SumsAreDefinitionalIdentities)
{
    const VolumeGeometry vol = oracleVolume();
    const TrajectoryGeometry traj = oracleTrajectory();
    const CbctOperator op(vol, traj, 3);
    const ProjectionStack rows = op.rowSums();
    EXPECT_EQ(rows.data, op.project(Volume(vol, 1.0)).data);
    EXPECT_TRUE(std::all_of(rows.data.begin(), rows.data.end(), [](double v) { return v >= 0.0; }));
    const Volume cols = op.colSums();
    EXPECT_EQ(cols.data, op.backproject(ProjectionStack(traj, 1.0)).data);
    const Volume diag = op.normalDiagonalVolume();
    EXPECT_TRUE(std::all_of(diag.data.begin(), diag.data.end(), [](double v) { return v >= 0.0; }));
}

TEST(Operator, MissingRaysAndUnseenVoxels)
{
    VolumeGeometry vol;
    vol.nx = vol.ny = vol.nz = 8;
    vol.voxelSize = {1.0, 1.0, 1.0};
    DetectorGeometry det;
    det.nu = 16;
    det.nv = 3;
    det.pixelSize = {2.0, 0.5};
    // Narrow detector rows: the outer z slices are never hit.
    const TrajectoryGeometry traj = makeCircularTrajectory(100, 200, 6, 0.0, kTwoPi, det);
    const CbctOperator op(vol, traj);
    const ProjectionStack rows = op.rowSums();
    EXPECT_EQ(rows.data[rows.index(0, 0, 1)], 0.0);
    EXPECT_EQ(rows.data[rows.index(0, 15, 1)], 0.0);
    EXPECT_GT(rows.data[rows.index(0, 8, 1)], 0.0);
    const Volume cols = op.colSums();
    EXPECT_EQ(cols.at(4, 4, 0), 0.0);
    EXPECT_EQ(cols.at(4, 4, 7), 0.0);
    EXPECT_GT(cols.at(4, 4, 4), 0.0);
}

TEST(Operator, NormalDiagonalSmallOnConeBoundary)
{
    VolumeGeometry vol;
    vol.nx = vol.ny = 32;
    vol.nz = 16;
    vol.voxelSize = {1.0, 1.0, 1.0};
    DetectorGeometry det;
    det.nu = 40;
    det.nv = 16;
    det.pixelSize = {1.0, 1.0};
    // The cone covers about 8 of the 16 slices at the isocenter.
    const TrajectoryGeometry traj = makeCircularTrajectory(100, 200, 60, 0.0, kTwoPi, det);
    const CbctOperator op(vol, traj, 4);
    std::vector<double> diag = op.normalDiagonal();
    const double peak = *std::max_element(diag.begin(), diag.end());
    std::vector<double> positive;
    std::copy_if(diag.begin(), diag.end(), std::back_inserter(positive),
                 [](double v) { return v > 0.0; });
    ASSERT_FALSE(positive.empty());
    const double smallest = *std::min_element(positive.begin(), positive.end());
    EXPECT_LT(smallest, 1e-3 * peak);
    EXPECT_GT(std::count(diag.begin(), diag.end(), 0.0), 0);
    const double central = diag[vol.index(16, 16, 8)];
    EXPECT_GT(central, 0.1 * peak);
}

TEST(Operator, OffCenterShiftIsBitwise)
{
    VolumeGeometry original;
    original.nx = 8;
    original.ny = 6;
    original.nz = 4;
    original.voxelSize = {1.0, 1.0, 1.0};
    VolumeGeometry shifted = original;
    shifted.centerOffset = {1.0, 0.0, 0.0};
    DetectorGeometry det;
    det.nu = 24;
    det.nv = 12;
    det.pixelSize = {1.0, 1.0};
    det.principalPointOffset = {0.25, -0.125};
    const TrajectoryGeometry traj = makeCircularTrajectory(64, 128, 12, 0.1, kTwoPi, det);

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> dist(0.0, 1.0);
    Volume a(original);
    Volume b(shifted);
    for(std::uint32_t k = 0; k < 4; ++k)
    {
        for(std::uint32_t j = 0; j < 6; ++j)
        {
            for(std::uint32_t i = 1; i < 7; ++i)
            {
                const double v = dist(rng);
                a.at(i, j, k) = v;
                b.at(i - 1, j, k) = v;
            }
        }
    }
    const ProjectionStack pa = CbctOperator(original, traj).project(a);
    const ProjectionStack pb = CbctOperator(shifted, traj).project(b);
    ASSERT_GT(*std::max_element(pa.data.begin(), pa.data.end()), 0.0);
    EXPECT_EQ(pa.data, pb.data);
}

TEST(Operator, DeterministicAcrossRunsAndWorkers)
{
    VolumeGeometry vol;
    vol.nx = vol.ny = 24;
    vol.nz = 8;
    vol.voxelSize = {1.0, 1.0, 2.0};
    DetectorGeometry det;
    det.nu = 32;
    det.nv = 12;
    det.pixelSize = {1.5, 1.5};
    const TrajectoryGeometry traj = makeCircularTrajectory(120, 200, 20, 0.05, kTwoPi, det);
    const Volume x = generatePhantom(sheppLogan3d(), vol);
    std::mt19937_64 rng(1);
    const ProjectionStack y(traj, randomVector(traj.projectionSize(), rng));

    const CbctOperator serial(vol, traj, 1);
    const ProjectionStack p1 = serial.project(x);
    for(unsigned workers : {2u, 5u, 8u})
    {
        const CbctOperator op(vol, traj, workers);
        EXPECT_EQ(op.project(x).data, p1.data);
        const Volume first = op.backproject(y);
        EXPECT_EQ(op.backproject(y).data, first.data);
        EXPECT_LE(relativeMaxError(first.data, toEigen(serial.backproject(y).data)), 1e-12);
    }
}

TEST(Operator, GeometryMismatch)
{
    const CbctOperator op(oracleVolume(), oracleTrajectory());
    VolumeGeometry other = oracleVolume();
    other.nx = 5;
    EXPECT_THROW(op.project(Volume(other)), GeometryMismatchError);
    other = oracleVolume();
    other.voxelSize.x = 2.0;
    EXPECT_THROW(op.project(Volume(other)), GeometryMismatchError);
    TrajectoryGeometry t = oracleTrajectory();
    t.sid = 90.0;
    EXPECT_THROW(op.backproject(ProjectionStack(t)), GeometryMismatchError);
    EXPECT_THROW(Volume(oracleVolume(), std::vector<double>(5)), GeometryMismatchError);
}
