#include "cbct/io.hpp"

#include "cbct/errors.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string_view>

namespace cbct::io {

namespace {

    constexpr std::uint8_t kVersion = 1;

    template <typename T>
    void putLE(std::vector<char>& buf, T value)
    {
        using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
        U bits = std::bit_cast<U>(value);
        for(std::size_t i = 0; i < sizeof(T); ++i)
        {
            buf.push_back(char(bits & 0xFF));
            bits >>= 8;
        }
    }

    template <typename U>
    U getLE(const unsigned char* p)
    {
        U v = 0;
        for(std::size_t i = sizeof(U); i-- > 0;)
        {
            v = (v << 8) | U(p[i]);
        }
        return v;
    }

    std::size_t sampleBytes(Dtype t) { return t == Dtype::Float32 ? 4 : 8; }

    void writeArray(const std::string& path, std::string_view magic,
                    const std::array<std::uint32_t, 3>& dims, const std::vector<double>& data,
                    Dtype dtype)
    {
        if(dtype != Dtype::Float32 && dtype != Dtype::Float64)
        {
            throw UnknownDtypeError("unknown dtype " + std::to_string(int(dtype)));
        }
        std::vector<char> buf;
        buf.reserve(kHeaderSize + data.size() * sampleBytes(dtype));
        buf.insert(buf.end(), magic.begin(), magic.end());
        buf.push_back(char(kVersion));
        buf.push_back(char(dtype));
        buf.push_back(0);
        buf.push_back(0);
        for(std::uint32_t d : dims)
        {
            putLE(buf, d);
        }
        for(double v : data)
        {
            if(dtype == Dtype::Float32)
            {
                putLE(buf, float(v));
            } else
            {
                putLE(buf, v);
            }
        }
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if(!out)
        {
            throw IOError("can not open " + path + " for writing");
        }
        out.write(buf.data(), std::streamsize(buf.size()));
        if(!out)
        {
            throw IOError("write failed for " + path);
        }
    }

    ArrayFile readArray(const std::string& path, std::string_view magic)
    {
        std::ifstream in(path, std::ios::binary);
        if(!in)
        {
            throw IOError("can not open " + path);
        }
        const std::vector<char> raw((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
        const auto* bytes = reinterpret_cast<const unsigned char*>(raw.data());
        if(raw.size() < 4 || std::memcmp(raw.data(), magic.data(), 4) != 0)
        {
            throw BadMagicError(path + ": expected magic " + std::string(magic));
        }
        if(raw.size() < kHeaderSize)
        {
            throw TruncatedFileError(path + ": header shorter than 20 bytes");
        }
        if(bytes[4] != kVersion)
        {
            throw VersionMismatchError(path + ": unsupported version " + std::to_string(bytes[4]));
        }
        if(bytes[5] > 1)
        {
            throw UnknownDtypeError(path + ": unknown dtype " + std::to_string(bytes[5]));
        }
        ArrayFile f;
        f.dtype = Dtype(bytes[5]);
        for(int i = 0; i < 3; ++i)
        {
            f.dims[i] = getLE<std::uint32_t>(bytes + 8 + 4 * i);
        }
        const std::size_t count = std::size_t(f.dims[0]) * f.dims[1] * f.dims[2];
        const std::size_t width = sampleBytes(f.dtype);
        const std::size_t expected = kHeaderSize + count * width;
        if(raw.size() < expected)
        {
            throw TruncatedFileError(path + ": expected " + std::to_string(expected)
                                     + " bytes, found " + std::to_string(raw.size()));
        }
        if(raw.size() > expected)
        {
            throw TrailingDataError(path + ": expected " + std::to_string(expected)
                                    + " bytes, found " + std::to_string(raw.size()));
        }
        f.data.resize(count);
        const unsigned char* p = bytes + kHeaderSize;
        for(std::size_t i = 0; i < count; ++i, p += width)
        {
            f.data[i] = f.dtype == Dtype::Float32
                ? double(std::bit_cast<float>(getLE<std::uint32_t>(p)))
                : std::bit_cast<double>(getLE<std::uint64_t>(p));
        }
        return f;
    }

    std::string dimsText(const std::array<std::uint32_t, 3>& d)
    {
        return std::to_string(d[0]) + "x" + std::to_string(d[1]) + "x" + std::to_string(d[2]);
    }

} // namespace

void writeVolume(const std::string& path, const Volume& vol, Dtype dtype)
{
    const VolumeGeometry& g = vol.geometry;
    writeArray(path, "KVOL", {g.nx, g.ny, g.nz}, vol.data, dtype);
}

ArrayFile readVolumeFile(const std::string& path) { return readArray(path, "KVOL"); }

Volume readVolume(const std::string& path, const VolumeGeometry& geom)
{
    ArrayFile f = readVolumeFile(path);
    const std::array<std::uint32_t, 3> expected{geom.nx, geom.ny, geom.nz};
    if(f.dims != expected)
    {
        throw DimensionMismatchError(path + ": volume is " + dimsText(f.dims) + ", config expects "
                                     + dimsText(expected));
    }
    return Volume(geom, std::move(f.data));
}

void writeProjections(const std::string& path, const ProjectionStack& prj, Dtype dtype)
{
    const DetectorGeometry& d = prj.trajectory.detector;
    writeArray(path, "KPRJ", {d.nu, d.nv, prj.trajectory.nViews}, prj.data, dtype);
}

ArrayFile readProjectionFile(const std::string& path) { return readArray(path, "KPRJ"); }

ProjectionStack readProjections(const std::string& path, const TrajectoryGeometry& traj)
{
    ArrayFile f = readProjectionFile(path);
    const std::array<std::uint32_t, 3> expected{traj.detector.nu, traj.detector.nv, traj.nViews};
    if(f.dims != expected)
    {
        throw DimensionMismatchError(path + ": projections are " + dimsText(f.dims)
                                     + ", config expects " + dimsText(expected));
    }
    return ProjectionStack(traj, std::move(f.data));
}

std::uint8_t windowLevel(double value, double lo, double hi)
{
    const double level = std::floor((value - lo) / (hi - lo) * 255.0 + 0.5);
    if(!(level > 0.0))
    {
        return 0;
    }
    if(level >= 255.0)
    {
        return 255;
    }
    return std::uint8_t(level);
}

void exportSlicePgm(const Volume& vol, Axis axis, std::uint32_t index, double lo, double hi,
                    const std::string& path)
{
    if(!(lo < hi))
    {
        throw ConfigError("slice window needs lo < hi");
    }
    const VolumeGeometry& g = vol.geometry;
    const std::uint32_t extent = axis == Axis::X ? g.nx : axis == Axis::Y ? g.ny : g.nz;
    if(index >= extent)
    {
        throw std::out_of_range("slice index " + std::to_string(index) + " out of range [0, "
                                + std::to_string(extent) + ")");
    }
    std::uint32_t width, height;
    switch(axis)
    {
    case Axis::X: width = g.ny, height = g.nz; break;
    case Axis::Y: width = g.nx, height = g.nz; break;
    default: width = g.nx, height = g.ny; break;
    }
    std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
    for(std::uint32_t row = 0; row < height; ++row)
    {
        for(std::uint32_t col = 0; col < width; ++col)
        {
            double v;
            switch(axis)
            {
            case Axis::X: v = vol.at(index, col, row); break;
            case Axis::Y: v = vol.at(col, index, row); break;
            default: v = vol.at(col, row, index); break;
            }
            out.push_back(char(windowLevel(v, lo, hi)));
        }
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if(!f)
    {
        throw IOError("can not open " + path + " for writing");
    }
    f.write(out.data(), std::streamsize(out.size()));
    if(!f)
    {
        throw IOError("write failed for " + path);
    }
}

} // namespace cbct::io
