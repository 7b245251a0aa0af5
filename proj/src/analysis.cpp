#include "cbct/analysis.hpp"

#include "cbct/errors.hpp"
#include "cbct/linalg.hpp"

#include <cmath>

namespace cbct {

DiscrepancyMetric relativeDiscrepancy(const CbctOperator& op, const Volume& x,
                                      const ProjectionStack& b)
{
    if(!(b.trajectory == op.trajectory()))
    {
        throw GeometryMismatchError("projection trajectory differs from the operator trajectory");
    }
    DiscrepancyMetric m;
    m.denominator = linalg::norm2(b.data);
    if(!(m.denominator > 0.0))
    {
        throw ZeroRhsError("relative discrepancy is undefined for zero projection data");
    }
    ProjectionStack ax = op.project(x);
    linalg::subtract(ax.data, b.data, ax.data);
    m.numerator = linalg::norm2(ax.data);
    m.value = m.numerator / m.denominator;
    return m;
}

std::optional<std::uint32_t> iterationsToTolerance(const std::vector<ConvergenceRecord>& history,
                                                   double tol)
{
    if(!(tol > 0.0))
    {
        throw ConfigError("tolerance must be positive");
    }
    for(const ConvergenceRecord& r : history)
    {
        if(r.relDiscrepancy <= tol)
        {
            return r.iteration;
        }
    }
    return std::nullopt;
}

} // namespace cbct
