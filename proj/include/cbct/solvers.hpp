#pragma once

#include "cbct/operator.hpp"
#include "cbct/volume.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cbct {

enum class Method { CGLS, LSQR, SIRT, PSIRT };

std::string_view methodName(Method m);
/// Accepts cgls, lsqr, sirt, psirt (case insensitive), throws ConfigError otherwise.
Method parseMethod(std::string_view name);
inline bool isKrylov(Method m) { return m == Method::CGLS || m == Method::LSQR; }

struct BoxBounds
{
    double lo = 0.0;
    double hi = 1.0;
};

struct SolverConfig
{
    Method method = Method::CGLS;
    std::uint32_t maxIterations = 40;
    /// Stop once ||b - Ax|| / ||b|| <= relDiscrepancyTol; 0 runs until maxIterations.
    double relDiscrepancyTol = 0.0;
    std::optional<std::vector<double>> initialX;
    double tikhonovLambda = 0.0;
    bool jacobiPrecondition = false;
    /// Floor of the Jacobi diagonal as a fraction of its maximum.
    double jacobiFloor = 1e-6;
    /// Voxelwise clamp, classical methods only.
    std::optional<BoxBounds> boxBounds;
    /// Relaxation of SIRT and PSIRT.
    double relaxation = 1.0;
    /// Recompute ||b - Ax|| / ||b|| every k iterations for monitoring, 0 = never.
    std::uint32_t trueDiscrepancyEvery = 0;

    /// Throws ConfigError on invalid settings, box bounds with a Krylov method included.
    void validate() const;
};

struct ConvergenceRecord
{
    std::uint32_t iteration = 0;
    double wallSeconds = 0.0;
    /// Relative discrepancy from the iterated residual.
    double relDiscrepancy = 0.0;
    /// Relative discrepancy recomputed from x when scheduled.
    std::optional<double> trueRelDiscrepancy;
};

/// Stagnation: the least-squares optimality condition holds to working precision,
/// further Krylov steps would only amplify rounding errors.
enum class StopReason { Tolerance, IterationLimit, Breakdown, Stagnation };

struct SolverResult
{
    std::vector<double> x;
    std::uint32_t iterations = 0;
    /// ||b - Ax|| over the data rows.
    double finalDiscrepancyNorm = 0.0;
    /// One record per iterate, record 0 describes the initial vector.
    std::vector<ConvergenceRecord> history;
    StopReason stopReason = StopReason::IterationLimit;
    unsigned workerCount = 1;
    /// Domain- and range-sized work vectors allocated by the solver, b excluded.
    unsigned domainVectors = 0;
    unsigned rangeVectors = 0;

    double finalRelDiscrepancy() const
    {
        return history.empty() ? 0.0 : history.back().relDiscrepancy;
    }
};

struct SolverReport
{
    Volume finalX;
    std::uint32_t iterations = 0;
    double finalDiscrepancyNorm = 0.0;
    std::vector<ConvergenceRecord> history;
    StopReason stopReason = StopReason::IterationLimit;
    unsigned workerCount = 1;

    double finalRelDiscrepancy() const
    {
        return history.empty() ? 0.0 : history.back().relDiscrepancy;
    }
};

// Solvers on an abstract operator. b has op.rangeSize() entries; only the
// first op.dataSize() of them enter the reported discrepancy.

/// CGLS with the residual update delayed to the start of the next iteration:
/// 2 projections and 1 backprojection before the loop, then 1 of each per
/// loop iteration.
SolverResult cgls(const LinearOperator& op, std::span<const double> b, const SolverConfig& cfg);
/// Paige-Saunders LSQR started from cfg.initialX.
SolverResult lsqr(const LinearOperator& op, std::span<const double> b, const SolverConfig& cfg);
/// x <- clamp(x + w C^-1 A^T R^-1 (b - Ax)), R and C the row and column sums.
SolverResult sirt(const LinearOperator& op, std::span<const double> b, const SolverConfig& cfg);
/// x <- clamp(x + w / max(C) A^T R^-1 (b - Ax)).
SolverResult psirt(const LinearOperator& op, std::span<const double> b, const SolverConfig& cfg);

/// Stacked operator [A; lambda I] whose range holds A's data rows followed by
/// n regularization rows.
class TikhonovOperator : public LinearOperator
{
public:
    TikhonovOperator(const LinearOperator& inner, double lambda);

    std::size_t domainSize() const override { return inner_.domainSize(); }
    std::size_t rangeSize() const override { return inner_.rangeSize() + inner_.domainSize(); }
    std::size_t dataSize() const override { return inner_.dataSize(); }
    unsigned workerCount() const override { return inner_.workerCount(); }

    void apply(std::span<const double> x, std::span<double> out) const override;
    void applyAdjoint(std::span<const double> y, std::span<double> out) const override;
    std::vector<double> normalDiagonal() const override;

    /// [b; 0]
    std::vector<double> augmentData(std::span<const double> b) const;

private:
    const LinearOperator& inner_;
    double lambda_;
};

/// Right scaling A S with S = diag(scale).
class ScaledOperator : public LinearOperator
{
public:
    ScaledOperator(const LinearOperator& inner, std::vector<double> scale);

    std::size_t domainSize() const override { return inner_.domainSize(); }
    std::size_t rangeSize() const override { return inner_.rangeSize(); }
    std::size_t dataSize() const override { return inner_.dataSize(); }
    unsigned workerCount() const override { return inner_.workerCount(); }

    void apply(std::span<const double> x, std::span<double> out) const override;
    void applyAdjoint(std::span<const double> y, std::span<double> out) const override;
    std::vector<double> normalDiagonal() const override;

    const std::vector<double>& scale() const { return scale_; }

private:
    const LinearOperator& inner_;
    std::vector<double> scale_;
};

/// Jacobi scaling D^-1/2 with D_j = max(diag(A^T A)_j, floor * max_k diag(A^T A)_k).
std::vector<double> jacobiScaling(const LinearOperator& op, double floor);

/// Runs cfg.method on op with the configured Tikhonov augmentation and Jacobi
/// scaling. History always reports the discrepancy of x against the original b.
SolverResult solve(const LinearOperator& op, std::span<const double> b, const SolverConfig& cfg);

/// Volume level entry point, dispatches on cfg.method.
SolverReport reconstruct(const CbctOperator& op, const ProjectionStack& b, const SolverConfig& cfg);
SolverReport cgls(const CbctOperator& op, const ProjectionStack& b, const SolverConfig& cfg);
SolverReport lsqr(const CbctOperator& op, const ProjectionStack& b, const SolverConfig& cfg);
SolverReport sirt(const CbctOperator& op, const ProjectionStack& b, const SolverConfig& cfg);
SolverReport psirt(const CbctOperator& op, const ProjectionStack& b, const SolverConfig& cfg);

/// CSV with header iter,seconds,rel_discrepancy,true_rel_discrepancy.
void writeConvergenceCsv(std::ostream& out, const std::vector<ConvergenceRecord>& history);
void writeConvergenceCsv(const std::string& path, const std::vector<ConvergenceRecord>& history);

} // namespace cbct
