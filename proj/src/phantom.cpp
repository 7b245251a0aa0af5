#include "cbct/phantom.hpp"

#include "cbct/errors.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace cbct {

namespace {

    // Rows of Q^T for Q = Rz(phi) Rx(theta) Rz(psi), maps world offsets into
    // the ellipsoid frame.
    struct Frame
    {
        double m[3][3];
    };

    Frame inverseOrientation(Vec3 euler)
    {
        const double c1 = std::cos(euler.x), s1 = std::sin(euler.x);
        const double c2 = std::cos(euler.y), s2 = std::sin(euler.y);
        const double c3 = std::cos(euler.z), s3 = std::sin(euler.z);
        // Q = Rz(phi) Rx(theta) Rz(psi)
        const double q[3][3] = {
            {c1 * c3 - s1 * c2 * s3, -c1 * s3 - s1 * c2 * c3, s1 * s2},
            {s1 * c3 + c1 * c2 * s3, -s1 * s3 + c1 * c2 * c3, -c1 * s2},
            {s2 * s3, s2 * c3, c2},
        };
        Frame f;
        for(int r = 0; r < 3; ++r)
        {
            for(int c = 0; c < 3; ++c)
            {
                f.m[r][c] = q[c][r];
            }
        }
        return f;
    }

    struct PreparedEllipsoid
    {
        Frame frame;
        Vec3 center;
        Vec3 invAxes;
        double intensity;

        explicit PreparedEllipsoid(const Ellipsoid& e)
            : frame(inverseOrientation(e.eulerAngles))
            , center(e.center)
            , invAxes{1.0 / e.semiAxes.x, 1.0 / e.semiAxes.y, 1.0 / e.semiAxes.z}
            , intensity(e.intensity)
        {
        }

        bool contains(Vec3 p) const
        {
            const Vec3 q = p - center;
            const auto& m = frame.m;
            const double a = (m[0][0] * q.x + m[0][1] * q.y + m[0][2] * q.z) * invAxes.x;
            const double b = (m[1][0] * q.x + m[1][1] * q.y + m[1][2] * q.z) * invAxes.y;
            const double c = (m[2][0] * q.x + m[2][1] * q.y + m[2][2] * q.z) * invAxes.z;
            return a * a + b * b + c * c <= 1.0;
        }
    };

    void validate(const Ellipsoid& e)
    {
        if(!(e.semiAxes.x > 0.0 && e.semiAxes.y > 0.0 && e.semiAxes.z > 0.0))
        {
            throw GeometryError("ellipsoid semi axes must be positive");
        }
    }

} // namespace

bool Ellipsoid::contains(Vec3 p) const
{
    validate(*this);
    return PreparedEllipsoid(*this).contains(p);
}

Volume generatePhantom(const std::vector<Ellipsoid>& ellipsoids, const VolumeGeometry& geom)
{
    geom.validate();
    std::vector<PreparedEllipsoid> prepared;
    prepared.reserve(ellipsoids.size());
    for(const Ellipsoid& e : ellipsoids)
    {
        validate(e);
        prepared.emplace_back(e);
    }
    Volume vol(geom);
    for(std::uint32_t k = 0; k < geom.nz; ++k)
    {
        const double z = (2.0 * k + 1.0) / geom.nz - 1.0;
        for(std::uint32_t j = 0; j < geom.ny; ++j)
        {
            const double y = (2.0 * j + 1.0) / geom.ny - 1.0;
            for(std::uint32_t i = 0; i < geom.nx; ++i)
            {
                const Vec3 p{(2.0 * i + 1.0) / geom.nx - 1.0, y, z};
                double value = 0.0;
                for(const PreparedEllipsoid& e : prepared)
                {
                    if(e.contains(p))
                    {
                        value += e.intensity;
                    }
                }
                vol.at(i, j, k) = value;
            }
        }
    }
    return vol;
}

std::vector<Ellipsoid> sheppLogan3d()
{
    constexpr double deg = std::numbers::pi / 180.0;
    // center, semi axes, (phi, theta, psi), intensity
    return {
        {{0.0, 0.0, 0.0}, {0.69, 0.92, 0.81}, {0.0, 0.0, 0.0}, 1.0},
        {{0.0, -0.0184, 0.0}, {0.6624, 0.874, 0.78}, {0.0, 0.0, 0.0}, -0.75},
        {{0.22, 0.0, 0.0}, {0.11, 0.31, 0.22}, {-18.0 * deg, 0.0, 10.0 * deg}, -0.25},
        {{-0.22, 0.0, 0.0}, {0.16, 0.41, 0.28}, {18.0 * deg, 0.0, 10.0 * deg}, -0.25},
        {{0.0, 0.35, -0.15}, {0.21, 0.25, 0.41}, {0.0, 0.0, 0.0}, 0.125},
        {{0.0, 0.1, 0.25}, {0.046, 0.046, 0.05}, {0.0, 0.0, 0.0}, 0.125},
        {{0.0, -0.1, 0.25}, {0.046, 0.046, 0.05}, {0.0, 0.0, 0.0}, 0.125},
        {{-0.08, -0.605, 0.0}, {0.046, 0.023, 0.05}, {0.0, 0.0, 0.0}, 0.125},
        {{0.0, -0.606, 0.0}, {0.023, 0.023, 0.02}, {0.0, 0.0, 0.0}, 0.125},
        {{0.06, -0.605, 0.0}, {0.023, 0.046, 0.02}, {0.0, 0.0, 0.0}, 0.125},
    };
}

std::vector<Ellipsoid> parseEllipsoids(std::istream& in)
{
    std::vector<Ellipsoid> out;
    std::string line;
    int lineNo = 0;
    while(std::getline(in, line))
    {
        ++lineNo;
        const auto first = line.find_first_not_of(" \t\r");
        if(first == std::string::npos || line[first] == '#')
        {
            continue;
        }
        std::istringstream row(line);
        double v[10];
        for(double& x : v)
        {
            if(!(row >> x))
            {
                throw ConfigError("ellipsoid table line " + std::to_string(lineNo)
                                  + ": expected 10 numbers");
            }
        }
        std::string rest;
        if(row >> rest)
        {
            throw ConfigError("ellipsoid table line " + std::to_string(lineNo)
                              + ": unexpected trailing field '" + rest + "'");
        }
        Ellipsoid e{{v[0], v[1], v[2]}, {v[3], v[4], v[5]}, {v[6], v[7], v[8]}, v[9]};
        if(!(e.semiAxes.x > 0.0 && e.semiAxes.y > 0.0 && e.semiAxes.z > 0.0))
        {
            throw ConfigError("ellipsoid table line " + std::to_string(lineNo)
                              + ": semi axes must be positive");
        }
        out.push_back(e);
    }
    return out;
}

std::vector<Ellipsoid> readEllipsoidFile(const std::string& path)
{
    std::ifstream in(path);
    if(!in)
    {
        throw IOError("can not open ellipsoid table " + path);
    }
    return parseEllipsoids(in);
}

} // namespace cbct
