#pragma once

#include <cstddef>
#include <span>

// Vector kernels shared by the solvers. Reductions use a fixed pairwise
// summation tree so results depend only on the vector length.
namespace cbct::linalg {

double dot(std::span<const double> a, std::span<const double> b);
double sumSquares(std::span<const double> a);
double norm2(std::span<const double> a);

/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
/// y = x + beta * y
void xpby(std::span<const double> x, double beta, std::span<double> y);
/// out = a - b
void subtract(std::span<const double> a, std::span<const double> b, std::span<double> out);
void scale(double alpha, std::span<double> x);
void multiply(std::span<const double> a, std::span<double> inout);

double maxValue(std::span<const double> a);

} // namespace cbct::linalg
