#include "cbct/linalg.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

namespace cbct::linalg {

namespace {

    constexpr std::size_t kLeaf = 128;

    template <typename Term>
    double pairwiseSum(std::size_t begin, std::size_t end, const Term& term)
    {
        if(end - begin <= kLeaf)
        {
            double s = 0.0;
            for(std::size_t i = begin; i < end; ++i)
            {
                s += term(i);
            }
            return s;
        }
        const std::size_t mid = begin + (end - begin) / 2;
        return pairwiseSum(begin, mid, term) + pairwiseSum(mid, end, term);
    }

} // namespace

double dot(std::span<const double> a, std::span<const double> b)
{
    assert(a.size() == b.size());
    return pairwiseSum(0, a.size(), [&](std::size_t i) { return a[i] * b[i]; });
}

double sumSquares(std::span<const double> a)
{
    return pairwiseSum(0, a.size(), [&](std::size_t i) { return a[i] * a[i]; });
}

double norm2(std::span<const double> a) { return std::sqrt(sumSquares(a)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y)
{
    assert(x.size() == y.size());
    for(std::size_t i = 0; i < y.size(); ++i)
    {
        y[i] += alpha * x[i];
    }
}

void xpby(std::span<const double> x, double beta, std::span<double> y)
{
    assert(x.size() == y.size());
    for(std::size_t i = 0; i < y.size(); ++i)
    {
        y[i] = x[i] + beta * y[i];
    }
}

void subtract(std::span<const double> a, std::span<const double> b, std::span<double> out)
{
    assert(a.size() == b.size() && a.size() == out.size());
    for(std::size_t i = 0; i < out.size(); ++i)
    {
        out[i] = a[i] - b[i];
    }
}

void scale(double alpha, std::span<double> x)
{
    for(double& v : x)
    {
        v *= alpha;
    }
}

void multiply(std::span<const double> a, std::span<double> inout)
{
    assert(a.size() == inout.size());
    for(std::size_t i = 0; i < inout.size(); ++i)
    {
        inout[i] *= a[i];
    }
}

double maxValue(std::span<const double> a)
{
    double m = -std::numeric_limits<double>::infinity();
    for(double v : a)
    {
        m = std::max(m, v);
    }
    return m;
}

} // namespace cbct::linalg
