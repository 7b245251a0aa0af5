#include "cbct/solvers.hpp"

#include "cbct/errors.hpp"
#include "cbct/linalg.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>

namespace cbct {

namespace la = linalg;

namespace {

    using Clock = std::chrono::steady_clock;

    double relative(double nb, double nb0)
    {
        if(nb0 > 0.0)
        {
            return nb / nb0;
        }
        return nb == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }

    std::span<const double> dataPart(const LinearOperator& op, std::span<const double> v)
    {
        return v.first(op.dataSize());
    }

    // Squared norm of a range vector, data rows and augmented rows reduced separately.
    double rangeSumSquares(const LinearOperator& op, std::span<const double> v)
    {
        const std::size_t m = op.dataSize();
        return la::sumSquares(v.first(m)) + la::sumSquares(v.subspan(m));
    }

    double dataNorm(const LinearOperator& op, std::span<const double> v)
    {
        return std::sqrt(la::sumSquares(dataPart(op, v)));
    }

    /// Allocates the solver work vectors and keeps count of them.
    class Workspace
    {
    public:
        explicit Workspace(const LinearOperator& op)
            : op_(op)
        {
        }
        std::vector<double> domain(double fill = 0.0)
        {
            ++domainCount;
            return std::vector<double>(op_.domainSize(), fill);
        }
        std::vector<double> range(double fill = 0.0)
        {
            ++rangeCount;
            return std::vector<double>(op_.rangeSize(), fill);
        }
        unsigned domainCount = 0;
        unsigned rangeCount = 0;

    private:
        const LinearOperator& op_;
    };

    /// Collects the convergence history and recomputes the true discrepancy when due.
    class Monitor
    {
    public:
        Monitor(const LinearOperator& op, std::span<const double> b, const SolverConfig& cfg,
                Workspace& ws, double nb0)
            : op_(op)
            , b_(b)
            , every_(cfg.trueDiscrepancyEvery)
            , ws_(ws)
            , nb0_(nb0)
            , start_(Clock::now())
        {
        }

        void record(std::uint32_t iteration, double nb, std::span<const double> x)
        {
            ConvergenceRecord r;
            r.iteration = iteration;
            r.relDiscrepancy = relative(nb, nb0_);
            if(every_ > 0 && iteration > 0 && iteration % every_ == 0)
            {
                if(scratch_.empty())
                {
                    scratch_ = ws_.range();
                }
                op_.apply(x, scratch_);
                const std::size_t m = op_.dataSize();
                la::subtract(b_.first(m), std::span<const double>(scratch_).first(m),
                             std::span<double>(scratch_).first(m));
                r.trueRelDiscrepancy = relative(dataNorm(op_, scratch_), nb0_);
            }
            r.wallSeconds = std::chrono::duration<double>(Clock::now() - start_).count();
            history.push_back(r);
        }

        std::vector<ConvergenceRecord> history;

    private:
        const LinearOperator& op_;
        std::span<const double> b_;
        std::uint32_t every_;
        Workspace& ws_;
        double nb0_;
        Clock::time_point start_;
        std::vector<double> scratch_;
    };

    void checkProblem(const LinearOperator& op, std::span<const double> b, const SolverConfig& cfg)
    {
        cfg.validate();
        if(b.size() != op.rangeSize())
        {
            throw GeometryMismatchError("right hand side has " + std::to_string(b.size())
                                        + " entries, operator range is "
                                        + std::to_string(op.rangeSize()));
        }
        if(cfg.initialX && cfg.initialX->size() != op.domainSize())
        {
            throw GeometryMismatchError("initial vector has " + std::to_string(cfg.initialX->size())
                                        + " entries, operator domain is "
                                        + std::to_string(op.domainSize()));
        }
    }

    void initialVector(const SolverConfig& cfg, std::vector<double>& x)
    {
        if(cfg.initialX)
        {
            std::copy(cfg.initialX->begin(), cfg.initialX->end(), x.begin());
        }
    }

    SolverResult finish(std::vector<double> x, std::uint32_t iterations, double nb,
                        Monitor& monitor, StopReason reason, const LinearOperator& op,
                        const Workspace& ws)
    {
        SolverResult r;
        r.x = std::move(x);
        r.iterations = iterations;
        r.finalDiscrepancyNorm = nb;
        r.history = std::move(monitor.history);
        r.stopReason = reason;
        r.workerCount = op.workerCount();
        r.domainVectors = ws.domainCount;
        r.rangeVectors = ws.rangeCount;
        return r;
    }

    void clampTo(const std::optional<BoxBounds>& box, std::span<double> x)
    {
        if(!box)
        {
            return;
        }
        for(double& v : x)
        {
            v = std::clamp(v, box->lo, box->hi);
        }
    }

    enum class ColumnScaling { PerVoxel, Scalar };

    SolverResult simultaneous(const LinearOperator& op, std::span<const double> b,
                              const SolverConfig& cfg, ColumnScaling scaling)
    {
        checkProblem(op, b, cfg);
        Workspace ws(op);
        const double nb0 = dataNorm(op, b);

        // R^-1 = 1 / A1 with zero rows left at zero.
        std::vector<double> rowWeights = ws.range();
        {
            std::vector<double> ones(op.domainSize(), 1.0);
            op.apply(ones, rowWeights);
        }
        bool anyRow = false;
        for(double& r : rowWeights)
        {
            anyRow = anyRow || r > 0.0;
            r = r > 0.0 ? 1.0 / r : 0.0;
        }

        std::vector<double> colWeights; // SIRT only
        double scalarStep = cfg.relaxation;
        {
            std::vector<double> colSums = scaling == ColumnScaling::PerVoxel
                ? ws.domain()
                : std::vector<double>(op.domainSize());
            std::vector<double> ones(op.rangeSize(), 1.0);
            op.applyAdjoint(ones, colSums);
            const double maxCol = la::maxValue(colSums);
            if(!anyRow || !(maxCol > 0.0))
            {
                throw DegenerateOperatorError(
                    "operator has all-zero row or column sums, rays miss the volume");
            }
            if(scaling == ColumnScaling::PerVoxel)
            {
                for(double& c : colSums)
                {
                    c = c > 0.0 ? cfg.relaxation / c : 0.0;
                }
                colWeights = std::move(colSums);
            } else
            {
                // The column sums only provide this scalar and are released here.
                scalarStep = cfg.relaxation / maxCol;
            }
        }

        std::vector<double> x = ws.domain();
        std::vector<double> update = ws.domain();
        std::vector<double> residual = ws.range();
        initialVector(cfg, x);
        clampTo(cfg.boxBounds, x);

        Monitor monitor(op, b, cfg, ws, nb0);
        std::uint32_t k = 0;
        double nb = 0.0;
        while(true)
        {
            op.apply(x, residual);
            la::subtract(b, residual, residual);
            nb = dataNorm(op, residual);
            monitor.record(k, nb, x);
            if(relative(nb, nb0) <= cfg.relDiscrepancyTol)
            {
                return finish(std::move(x), k, nb, monitor, StopReason::Tolerance, op, ws);
            }
            if(k >= cfg.maxIterations)
            {
                return finish(std::move(x), k, nb, monitor, StopReason::IterationLimit, op, ws);
            }
            la::multiply(rowWeights, residual);
            op.applyAdjoint(residual, update);
            if(scaling == ColumnScaling::PerVoxel)
            {
                la::multiply(colWeights, update);
                la::axpy(1.0, update, x);
            } else
            {
                la::axpy(scalarStep, update, x);
            }
            clampTo(cfg.boxBounds, x);
            ++k;
        }
    }

} // namespace

std::string_view methodName(Method m)
{
    switch(m)
    {
    case Method::CGLS: return "cgls";
    case Method::LSQR: return "lsqr";
    case Method::SIRT: return "sirt";
    case Method::PSIRT: return "psirt";
    }
    return "unknown";
}

Method parseMethod(std::string_view name)
{
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return char(std::tolower(c)); });
    for(Method m : {Method::CGLS, Method::LSQR, Method::SIRT, Method::PSIRT})
    {
        if(lower == methodName(m))
        {
            return m;
        }
    }
    throw ConfigError("unknown method '" + std::string(name) + "', expected cgls, lsqr, sirt or psirt");
}

void SolverConfig::validate() const
{
    if(maxIterations < 1)
    {
        throw ConfigError("maximum number of iterations must be at least 1");
    }
    if(!(relDiscrepancyTol >= 0.0 && relDiscrepancyTol <= 1.0))
    {
        throw ConfigError("relative discrepancy tolerance must lie in [0, 1]");
    }
    if(!(tikhonovLambda >= 0.0) || !std::isfinite(tikhonovLambda))
    {
        throw ConfigError("Tikhonov lambda must be non-negative");
    }
    if(!(jacobiFloor > 0.0))
    {
        throw ConfigError("Jacobi floor must be positive");
    }
    if(!(relaxation > 0.0) || !std::isfinite(relaxation))
    {
        throw ConfigError("relaxation must be positive");
    }
    if(boxBounds)
    {
        if(isKrylov(method))
        {
            throw ConfigError("box bounds can not be combined with " + std::string(methodName(method))
                              + ", clamping breaks the Krylov recurrences");
        }
        if(!(boxBounds->lo <= boxBounds->hi))
        {
            throw ConfigError("box bounds need lo <= hi");
        }
    }
    if(!isKrylov(method) && (tikhonovLambda > 0.0 || jacobiPrecondition))
    {
        throw ConfigError("Tikhonov regularization and Jacobi preconditioning apply to cgls and lsqr only");
    }
}

SolverResult cgls(const LinearOperator& A, std::span<const double> b, const SolverConfig& cfg)
{
    checkProblem(A, b, cfg);
    Workspace ws(A);
    std::vector<double> x = ws.domain();
    std::vector<double> d_x = ws.domain();
    std::vector<double> r_x = ws.domain();
    std::vector<double> e_b = ws.range();
    std::vector<double> p_b = ws.range();

    const double NB0 = dataNorm(A, b);
    Monitor monitor(A, b, cfg, ws, NB0);
    initialVector(cfg, x);
    A.apply(x, p_b);
    la::subtract(b, p_b, e_b);
    double NB = dataNorm(A, e_b);
    monitor.record(0, NB, x);

    A.applyAdjoint(e_b, r_x);
    d_x = r_x;
    double NR2_old = la::sumSquares(r_x);
    if(NR2_old == 0.0)
    {
        return finish(std::move(x), 0, NB, monitor, StopReason::Breakdown, A, ws);
    }
    A.apply(d_x, p_b);
    double NP2 = rangeSumSquares(A, p_b);
    if(NP2 == 0.0)
    {
        return finish(std::move(x), 0, NB, monitor, StopReason::Breakdown, A, ws);
    }
    double alpha = NR2_old / NP2;
    la::axpy(alpha, d_x, x);
    la::axpy(-alpha, p_b, e_b);
    NB = dataNorm(A, e_b);
    std::uint32_t i = 1;
    monitor.record(i, NB, x);

    while(relative(NB, NB0) > cfg.relDiscrepancyTol && i < cfg.maxIterations)
    {
        // delayed residual update
        A.applyAdjoint(e_b, r_x);
        const double NR2_now = la::sumSquares(r_x);
        if(NR2_now == 0.0)
        {
            return finish(std::move(x), i, NB, monitor, StopReason::Breakdown, A, ws);
        }
        const double beta = NR2_now / NR2_old;
        la::xpby(r_x, beta, d_x);
        NR2_old = NR2_now;
        // A step along d_x changes ||e_b||^2 by alpha * (NR2 - 2 <r_x, d_x>).
        if(la::dot(r_x, d_x) <= 0.5 * NR2_old)
        {
            return finish(std::move(x), i, NB, monitor, StopReason::Stagnation, A, ws);
        }
        A.apply(d_x, p_b);
        NP2 = rangeSumSquares(A, p_b);
        if(NP2 == 0.0)
        {
            return finish(std::move(x), i, NB, monitor, StopReason::Breakdown, A, ws);
        }
        alpha = NR2_old / NP2;
        la::axpy(alpha, d_x, x);
        la::axpy(-alpha, p_b, e_b);
        NB = dataNorm(A, e_b);
        ++i;
        monitor.record(i, NB, x);
    }
    const StopReason reason = relative(NB, NB0) <= cfg.relDiscrepancyTol ? StopReason::Tolerance
                                                                         : StopReason::IterationLimit;
    return finish(std::move(x), i, NB, monitor, reason, A, ws);
}

SolverResult lsqr(const LinearOperator& A, std::span<const double> b, const SolverConfig& cfg)
{
    checkProblem(A, b, cfg);
    Workspace ws(A);
    std::vector<double> x = ws.domain();
    std::vector<double> v = ws.domain();
    std::vector<double> w = ws.domain();
    std::vector<double> q = ws.domain();
    std::vector<double> u = ws.range();
    std::vector<double> r = ws.range();  // b - A x, updated recursively
    std::vector<double> p = ws.range();  // A v_k
    std::vector<double> Aw = ws.range(); // A w_k, updated recursively

    const double NB0 = dataNorm(A, b);
    Monitor monitor(A, b, cfg, ws, NB0);
    initialVector(cfg, x);
    A.apply(x, u);
    la::subtract(b, u, r);
    u = r;
    double NB = dataNorm(A, r);
    monitor.record(0, NB, x);

    double beta = std::sqrt(rangeSumSquares(A, u));
    if(beta == 0.0)
    {
        return finish(std::move(x), 0, NB, monitor, StopReason::Breakdown, A, ws);
    }
    la::scale(1.0 / beta, u);
    A.applyAdjoint(u, v);
    double alpha = la::norm2(v);
    if(alpha == 0.0)
    {
        return finish(std::move(x), 0, NB, monitor, StopReason::Breakdown, A, ws);
    }
    la::scale(1.0 / alpha, v);
    w = v;
    double phiBar = beta;
    double rhoBar = alpha;
    double anorm2 = 0.0; // ||B_k||_F^2, estimates ||A||^2
    double theta = 0.0;   // theta_k, zero for k = 1
    double rhoPrev = 1.0; // rho_{k-1}

    std::uint32_t i = 0;
    while(true)
    {
        // bidiagonalization: beta u = A v - alpha u, alpha v = A^T u - beta v
        A.apply(v, p);
        for(std::size_t k = 0; k < u.size(); ++k)
        {
            u[k] = p[k] - alpha * u[k];
        }
        beta = std::sqrt(rangeSumSquares(A, u));
        double alphaNext = 0.0;
        if(beta > 0.0)
        {
            la::scale(1.0 / beta, u);
            A.applyAdjoint(u, q);
            for(std::size_t k = 0; k < v.size(); ++k)
            {
                v[k] = q[k] - beta * v[k];
            }
            alphaNext = la::norm2(v);
            if(alphaNext > 0.0)
            {
                la::scale(1.0 / alphaNext, v);
            }
        }

        // A w_k = A v_k - (theta_k / rho_{k-1}) A w_{k-1}
        const double awCoef = theta / rhoPrev;
        for(std::size_t k = 0; k < Aw.size(); ++k)
        {
            Aw[k] = p[k] - awCoef * Aw[k];
        }

        // plane rotation
        const double rho = std::hypot(rhoBar, beta);
        const double c = rhoBar / rho;
        const double s = beta / rho;
        theta = s * alphaNext;
        rhoBar = -c * alphaNext;
        const double phi = c * phiBar;
        phiBar = s * phiBar;

        anorm2 += alpha * alpha + beta * beta;
        const double step = phi / rho;
        la::axpy(step, w, x);
        la::axpy(-step, Aw, r);
        la::xpby(v, -theta / rho, w);
        rhoPrev = rho;
        alpha = alphaNext;

        NB = dataNorm(A, r);
        ++i;
        monitor.record(i, NB, x);

        if(beta == 0.0 || alphaNext == 0.0)
        {
            return finish(std::move(x), i, NB, monitor, StopReason::Breakdown, A, ws);
        }
        if(relative(NB, NB0) <= cfg.relDiscrepancyTol)
        {
            return finish(std::move(x), i, NB, monitor, StopReason::Tolerance, A, ws);
        }
        // ||A^T r|| = phiBar alpha |c| against eps ||A|| ||r|| with ||r|| = phiBar
        if(alpha * std::abs(c) <= std::numeric_limits<double>::epsilon() * std::sqrt(anorm2))
        {
            return finish(std::move(x), i, NB, monitor, StopReason::Stagnation, A, ws);
        }
        if(i >= cfg.maxIterations)
        {
            return finish(std::move(x), i, NB, monitor, StopReason::IterationLimit, A, ws);
        }
    }
}

SolverResult sirt(const LinearOperator& op, std::span<const double> b, const SolverConfig& cfg)
{
    return simultaneous(op, b, cfg, ColumnScaling::PerVoxel);
}

SolverResult psirt(const LinearOperator& op, std::span<const double> b, const SolverConfig& cfg)
{
    return simultaneous(op, b, cfg, ColumnScaling::Scalar);
}

TikhonovOperator::TikhonovOperator(const LinearOperator& inner, double lambda)
    : inner_(inner)
    , lambda_(lambda)
{
    if(!(lambda >= 0.0) || !std::isfinite(lambda))
    {
        throw ConfigError("Tikhonov lambda must be non-negative");
    }
}

void TikhonovOperator::apply(std::span<const double> x, std::span<double> out) const
{
    const std::size_t m = inner_.rangeSize();
    inner_.apply(x, out.first(m));
    std::span<double> reg = out.subspan(m);
    for(std::size_t j = 0; j < reg.size(); ++j)
    {
        reg[j] = lambda_ * x[j];
    }
}

void TikhonovOperator::applyAdjoint(std::span<const double> y, std::span<double> out) const
{
    const std::size_t m = inner_.rangeSize();
    inner_.applyAdjoint(y.first(m), out);
    la::axpy(lambda_, y.subspan(m), out);
}

std::vector<double> TikhonovOperator::normalDiagonal() const
{
    std::vector<double> d = inner_.normalDiagonal();
    for(double& v : d)
    {
        v += lambda_ * lambda_;
    }
    return d;
}

std::vector<double> TikhonovOperator::augmentData(std::span<const double> b) const
{
    if(b.size() != inner_.rangeSize())
    {
        throw GeometryMismatchError("right hand side size differs from operator range");
    }
    std::vector<double> out(rangeSize(), 0.0);
    std::copy(b.begin(), b.end(), out.begin());
    return out;
}

ScaledOperator::ScaledOperator(const LinearOperator& inner, std::vector<double> scale)
    : inner_(inner)
    , scale_(std::move(scale))
{
    if(scale_.size() != inner_.domainSize())
    {
        throw GeometryMismatchError("scaling vector size differs from operator domain");
    }
}

void ScaledOperator::apply(std::span<const double> x, std::span<double> out) const
{
    std::vector<double> sx(x.begin(), x.end());
    la::multiply(scale_, sx);
    inner_.apply(sx, out);
}

void ScaledOperator::applyAdjoint(std::span<const double> y, std::span<double> out) const
{
    inner_.applyAdjoint(y, out);
    la::multiply(scale_, out);
}

std::vector<double> ScaledOperator::normalDiagonal() const
{
    std::vector<double> d = inner_.normalDiagonal();
    for(std::size_t j = 0; j < d.size(); ++j)
    {
        d[j] *= scale_[j] * scale_[j];
    }
    return d;
}

std::vector<double> jacobiScaling(const LinearOperator& op, double floor)
{
    if(!(floor > 0.0))
    {
        throw ConfigError("Jacobi floor must be positive");
    }
    std::vector<double> d = op.normalDiagonal();
    const double maxDiag = la::maxValue(d);
    if(!(maxDiag > 0.0))
    {
        throw DegenerateOperatorError("normal equations diagonal is zero, rays miss the volume");
    }
    const double lowest = floor * maxDiag;
    for(double& v : d)
    {
        v = 1.0 / std::sqrt(std::max(v, lowest));
    }
    return d;
}

SolverResult solve(const LinearOperator& op, std::span<const double> b, const SolverConfig& cfg)
{
    cfg.validate();
    if(b.size() != op.rangeSize())
    {
        throw GeometryMismatchError("right hand side size differs from operator range");
    }
    if(!isKrylov(cfg.method))
    {
        return cfg.method == Method::SIRT ? sirt(op, b, cfg) : psirt(op, b, cfg);
    }
    auto run = [&](const LinearOperator& A, std::span<const double> rhs, const SolverConfig& c) {
        return cfg.method == Method::CGLS ? cgls(A, rhs, c) : lsqr(A, rhs, c);
    };
    auto precondition = [&](const LinearOperator& A, std::span<const double> rhs) {
        if(!cfg.jacobiPrecondition)
        {
            return run(A, rhs, cfg);
        }
        ScaledOperator scaled(A, jacobiScaling(A, cfg.jacobiFloor));
        SolverConfig inner = cfg;
        if(inner.initialX)
        {
            // z0 = S^-1 x0
            for(std::size_t j = 0; j < inner.initialX->size(); ++j)
            {
                (*inner.initialX)[j] /= scaled.scale()[j];
            }
        }
        SolverResult r = run(scaled, rhs, inner);
        la::multiply(scaled.scale(), r.x);
        return r;
    };
    if(cfg.tikhonovLambda > 0.0)
    {
        TikhonovOperator augmented(op, cfg.tikhonovLambda);
        const std::vector<double> rhs = augmented.augmentData(b);
        return precondition(augmented, rhs);
    }
    return precondition(op, b);
}

namespace {

    SolverReport toReport(const CbctOperator& op, SolverResult&& r)
    {
        SolverReport report;
        report.finalX = Volume(op.volumeGeometry(), std::move(r.x));
        report.iterations = r.iterations;
        report.finalDiscrepancyNorm = r.finalDiscrepancyNorm;
        report.history = std::move(r.history);
        report.stopReason = r.stopReason;
        report.workerCount = r.workerCount;
        return report;
    }

    SolverReport runOn(const CbctOperator& op, const ProjectionStack& b, SolverConfig cfg,
                       Method method)
    {
        if(!(b.trajectory == op.trajectory()))
        {
            throw GeometryMismatchError("projection trajectory differs from the operator trajectory");
        }
        cfg.method = method;
        return toReport(op, solve(op, b.data, cfg));
    }

} // namespace

SolverReport reconstruct(const CbctOperator& op, const ProjectionStack& b, const SolverConfig& cfg)
{
    return runOn(op, b, cfg, cfg.method);
}

SolverReport cgls(const CbctOperator& op, const ProjectionStack& b, const SolverConfig& cfg)
{
    return runOn(op, b, cfg, Method::CGLS);
}

SolverReport lsqr(const CbctOperator& op, const ProjectionStack& b, const SolverConfig& cfg)
{
    return runOn(op, b, cfg, Method::LSQR);
}

SolverReport sirt(const CbctOperator& op, const ProjectionStack& b, const SolverConfig& cfg)
{
    return runOn(op, b, cfg, Method::SIRT);
}

SolverReport psirt(const CbctOperator& op, const ProjectionStack& b, const SolverConfig& cfg)
{
    return runOn(op, b, cfg, Method::PSIRT);
}

namespace {

    void appendNumber(std::string& line, double value)
    {
        std::array<char, 64> buf;
        const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
        line.append(buf.data(), res.ptr);
    }

} // namespace

void writeConvergenceCsv(std::ostream& out, const std::vector<ConvergenceRecord>& history)
{
    out << "iter,seconds,rel_discrepancy,true_rel_discrepancy\n";
    for(const ConvergenceRecord& r : history)
    {
        std::string line = std::to_string(r.iteration);
        line += ',';
        appendNumber(line, r.wallSeconds);
        line += ',';
        appendNumber(line, r.relDiscrepancy);
        line += ',';
        if(r.trueRelDiscrepancy)
        {
            appendNumber(line, *r.trueRelDiscrepancy);
        }
        line += '\n';
        out << line;
    }
}

void writeConvergenceCsv(const std::string& path, const std::vector<ConvergenceRecord>& history)
{
    std::ofstream out(path, std::ios::binary);
    if(!out)
    {
        throw IOError("can not write " + path);
    }
    writeConvergenceCsv(out, history);
    if(!out)
    {
        throw IOError("write failed for " + path);
    }
}

} // namespace cbct
