#include "dense_oracle.hpp"

#include "cbct/analysis.hpp"
#include "cbct/errors.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace cbct;
using namespace cbct::testing;

TEST(Analysis, ZeroVolumeGivesOne)
{
    const CbctOperator op(oracleVolume(), oracleTrajectory());
    std::mt19937_64 rng(2);
    const ProjectionStack b(oracleTrajectory(), randomVector(512, rng));
    const DiscrepancyMetric e = relativeDiscrepancy(op, Volume(oracleVolume()), b);
    EXPECT_EQ(e.value, 1.0);
    EXPECT_EQ(e.numerator, e.denominator);
}

TEST(Analysis, MatchesDenseComputation)
{
    const Eigen::MatrixXd A = assembleSystemMatrix(oracleVolume(), oracleTrajectory());
    const CbctOperator op(oracleVolume(), oracleTrajectory(), 3);
    std::mt19937_64 rng(12);
    const Volume x(oracleVolume(), randomVector(216, rng));
    const ProjectionStack b(oracleTrajectory(), randomVector(512, rng));
    const DiscrepancyMetric e = relativeDiscrepancy(op, x, b);
    const Eigen::VectorXd res = A * toEigen(x.data) - toEigen(b.data);
    EXPECT_NEAR(e.numerator, res.norm(), 1e-10 * res.norm());
    EXPECT_NEAR(e.denominator, toEigen(b.data).norm(), 1e-12 * e.denominator);
    EXPECT_NEAR(e.value, res.norm() / toEigen(b.data).norm(), 1e-10);
}

TEST(Analysis, ExactDataGivesZero)
{
    const CbctOperator op(oracleVolume(), oracleTrajectory());
    const Volume x(oracleVolume(), 0.5);
    EXPECT_EQ(relativeDiscrepancy(op, x, op.project(x)).value, 0.0);
}

TEST(Analysis, ScaleInvariance)
{
    const CbctOperator op(oracleVolume(), oracleTrajectory());
    std::mt19937_64 rng(13);
    Volume x(oracleVolume(), randomVector(216, rng));
    ProjectionStack b(oracleTrajectory(), randomVector(512, rng));
    const double base = relativeDiscrepancy(op, x, b).value;
    for(double c : {0.001, 0.3, 7.0, 1e5})
    {
        Volume cx = x;
        ProjectionStack cb = b;
        for(double& v : cx.data)
        {
            v *= c;
        }
        for(double& v : cb.data)
        {
            v *= c;
        }
        EXPECT_NEAR(relativeDiscrepancy(op, cx, cb).value / base, 1.0, 1e-12);
    }
}

TEST(Analysis, Errors)
{
    const CbctOperator op(oracleVolume(), oracleTrajectory());
    EXPECT_THROW(relativeDiscrepancy(op, Volume(oracleVolume(), 1.0), ProjectionStack(oracleTrajectory())),
                 ZeroRhsError);
    TrajectoryGeometry other = oracleTrajectory();
    other.nViews = 4;
    EXPECT_THROW(relativeDiscrepancy(op, Volume(oracleVolume()), ProjectionStack(other, 1.0)),
                 GeometryMismatchError);
    VolumeGeometry small = oracleVolume();
    small.nz = 2;
    EXPECT_THROW(relativeDiscrepancy(op, Volume(small), ProjectionStack(oracleTrajectory(), 1.0)),
                 GeometryMismatchError);
}

TEST(Analysis, IterationsToTolerance)
{
    std::vector<ConvergenceRecord> history;
    for(double e : {1.0, 0.5, 0.2, 0.009, 0.004})
    {
        ConvergenceRecord r;
        r.iteration = std::uint32_t(history.size());
        r.relDiscrepancy = e;
        history.push_back(r);
    }
    EXPECT_EQ(iterationsToTolerance(history, 0.01), 3u);
    EXPECT_EQ(iterationsToTolerance(history, 0.2), 2u);
    EXPECT_EQ(iterationsToTolerance(history, 1.0), 0u);
    EXPECT_FALSE(iterationsToTolerance(history, 0.001).has_value());
    EXPECT_FALSE(iterationsToTolerance({}, 0.5).has_value());
    EXPECT_THROW(iterationsToTolerance(history, 0.0), ConfigError);
}
