#pragma once

#include "cbct/operator.hpp"
#include "cbct/solvers.hpp"
#include "cbct/volume.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace cbct {

/// e = ||A x - b|| / ||b||
struct DiscrepancyMetric
{
    double numerator = 0.0;
    double denominator = 0.0;
    double value = 0.0;
};

/// One forward projection of x. Throws ZeroRhsError when ||b|| = 0.
DiscrepancyMetric relativeDiscrepancy(const CbctOperator& op, const Volume& x,
                                      const ProjectionStack& b);

/// Iteration number of the first record with relDiscrepancy <= tol, nullopt if none.
std::optional<std::uint32_t> iterationsToTolerance(const std::vector<ConvergenceRecord>& history,
                                                   double tol);

} // namespace cbct
