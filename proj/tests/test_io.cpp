#include "cbct/errors.hpp"
#include "cbct/io.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <random>

using namespace cbct;
namespace fs = std::filesystem;

namespace {

class IoTest : public ::testing::Test
{
protected:
    void SetUp() override
    {
        dir = fs::temp_directory_path()
            / ("cbct_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_"
               + ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir);
    }
    void TearDown() override { fs::remove_all(dir); }

    std::string path(const std::string& name) const { return (dir / name).string(); }

    fs::path dir;
};

VolumeGeometry grid(std::uint32_t nx, std::uint32_t ny, std::uint32_t nz)
{
    VolumeGeometry g;
    g.nx = nx;
    g.ny = ny;
    g.nz = nz;
    return g;
}

TrajectoryGeometry trajectory(std::uint32_t nu, std::uint32_t nv, std::uint32_t views)
{
    DetectorGeometry d;
    d.nu = nu;
    d.nv = nv;
    return makeCircularTrajectory(100, 200, views, 0, 6.283185307179586, d);
}

std::vector<double> awkwardValues(std::size_t n, unsigned seed)
{
    std::mt19937_64 rng(seed);
    std::vector<double> v(n);
    for(double& x : v)
    {
        x = std::bit_cast<double>(rng() & 0x7FEFFFFFFFFFFFFFull) * ((rng() & 1) ? 1.0 : -1.0);
    }
    v[0] = std::numeric_limits<double>::denorm_min();
    v[1] = -0.0;
    v[2] = std::numeric_limits<double>::max();
    return v;
}

std::vector<unsigned char> bytes(const std::string& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void writeBytes(const std::string& p, const std::vector<unsigned char>& data)
{
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(data.data()), std::streamsize(data.size()));
}

} // namespace

TEST_F(IoTest, VolumeRoundTripIsBitwise)
{
    const VolumeGeometry g = grid(8, 8, 8);
    const Volume v(g, awkwardValues(g.voxelCount(), 1));
    io::writeVolume(path("v.kvol"), v);
    const Volume back = io::readVolume(path("v.kvol"), g);
    ASSERT_EQ(back.data.size(), v.data.size());
    EXPECT_EQ(std::memcmp(back.data.data(), v.data.data(), v.data.size() * sizeof(double)), 0);
    EXPECT_EQ(io::readVolumeFile(path("v.kvol")).dtype, io::Dtype::Float64);
}

TEST_F(IoTest, ProjectionRoundTripIsBitwise)
{
    const TrajectoryGeometry t = trajectory(5, 3, 7);
    const ProjectionStack p(t, awkwardValues(t.projectionSize(), 2));
    io::writeProjections(path("p.kprj"), p);
    const ProjectionStack back = io::readProjections(path("p.kprj"), t);
    EXPECT_EQ(std::memcmp(back.data.data(), p.data.data(), p.data.size() * sizeof(double)), 0);
    const io::ArrayFile raw = io::readProjectionFile(path("p.kprj"));
    EXPECT_EQ(raw.dims, (std::array<std::uint32_t, 3>{5, 3, 7}));
}

TEST_F(IoTest, SinglePrecisionRoundTrip)
{
    const VolumeGeometry g = grid(4, 3, 2);
    std::vector<double> values(g.voxelCount());
    for(std::size_t i = 0; i < values.size(); ++i)
    {
        values[i] = double(float(0.1 * double(i) - 1.0));
    }
    io::writeVolume(path("f.kvol"), Volume(g, values), io::Dtype::Float32);
    EXPECT_EQ(io::readVolume(path("f.kvol"), g).data, values);
    EXPECT_EQ(io::readVolumeFile(path("f.kvol")).dtype, io::Dtype::Float32);
}

TEST_F(IoTest, FileSizesAndHeaderLayout)
{
    io::writeVolume(path("a.kvol"), Volume(grid(2, 2, 2), 1.5));
    EXPECT_EQ(fs::file_size(path("a.kvol")), io::kHeaderSize + 64);
    io::writeProjections(path("b.kprj"), ProjectionStack(trajectory(4, 4, 2), 2.0), io::Dtype::Float32);
    EXPECT_EQ(fs::file_size(path("b.kprj")), io::kHeaderSize + 128);

    const std::vector<unsigned char> h = bytes(path("a.kvol"));
    EXPECT_EQ(std::memcmp(h.data(), "KVOL", 4), 0);
    EXPECT_EQ(h[4], 1);
    EXPECT_EQ(h[5], 1);
    EXPECT_EQ(h[6], 0);
    EXPECT_EQ(h[7], 0);
    const std::vector<unsigned char> dims{2, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0};
    EXPECT_TRUE(std::equal(dims.begin(), dims.end(), h.begin() + 8));
    // 1.5 = 0x3FF8000000000000, little-endian
    const std::vector<unsigned char> first{0, 0, 0, 0, 0, 0, 0xF8, 0x3F};
    EXPECT_TRUE(std::equal(first.begin(), first.end(), h.begin() + 20));

    const std::vector<unsigned char> p = bytes(path("b.kprj"));
    EXPECT_EQ(std::memcmp(p.data(), "KPRJ", 4), 0);
    EXPECT_EQ(p[5], 0);
    EXPECT_EQ(p[16], 2);
}

TEST_F(IoTest, MalformedHeadersRaiseDistinctErrors)
{
    const VolumeGeometry g = grid(2, 2, 2);
    io::writeVolume(path("ok.kvol"), Volume(g, 1.0));
    const std::vector<unsigned char> good = bytes(path("ok.kvol"));

    std::vector<unsigned char> f = good;
    f[0] = 'X';
    writeBytes(path("magic.kvol"), f);
    EXPECT_THROW(io::readVolume(path("magic.kvol"), g), BadMagicError);

    f = good;
    f[4] = 2;
    writeBytes(path("version.kvol"), f);
    EXPECT_THROW(io::readVolume(path("version.kvol"), g), VersionMismatchError);

    f = good;
    f[5] = 7;
    writeBytes(path("dtype.kvol"), f);
    EXPECT_THROW(io::readVolume(path("dtype.kvol"), g), UnknownDtypeError);

    f.assign(good.begin(), good.end() - 3);
    writeBytes(path("short.kvol"), f);
    EXPECT_THROW(io::readVolume(path("short.kvol"), g), TruncatedFileError);

    f.assign(good.begin(), good.begin() + 10);
    writeBytes(path("header.kvol"), f);
    EXPECT_THROW(io::readVolume(path("header.kvol"), g), TruncatedFileError);

    f = good;
    f.push_back(0);
    writeBytes(path("long.kvol"), f);
    EXPECT_THROW(io::readVolume(path("long.kvol"), g), TrailingDataError);

    f = good;
    f[8] = 3; // declares 3x2x2 against a 2x2x2 payload
    writeBytes(path("dims.kvol"), f);
    EXPECT_THROW(io::readVolume(path("dims.kvol"), g), TruncatedFileError);

    EXPECT_THROW(io::readVolume(path("ok.kvol"), grid(2, 2, 3)), DimensionMismatchError);
    EXPECT_THROW(io::readProjectionFile(path("ok.kvol")), BadMagicError);
    EXPECT_THROW(io::readVolume(path("missing.kvol"), g), IOError);
    EXPECT_THROW(io::writeVolume((dir / "no" / "such" / "dir.kvol").string(), Volume(g)), IOError);
}

TEST_F(IoTest, ErrorsShareFormatBase)
{
    writeBytes(path("x.kprj"), {'K', 'P', 'R', 'J', 9});
    EXPECT_THROW(io::readProjectionFile(path("x.kprj")), FormatError);
    const TrajectoryGeometry t = trajectory(2, 2, 2);
    io::writeProjections(path("p.kprj"), ProjectionStack(t, 1.0));
    EXPECT_THROW(io::readProjections(path("p.kprj"), trajectory(2, 2, 3)), DimensionMismatchError);
}

TEST_F(IoTest, PgmWindowing)
{
    EXPECT_EQ(io::windowLevel(1.0, 0.0, 1.0), 255);
    EXPECT_EQ(io::windowLevel(0.5, 0.0, 1.0), 128);
    EXPECT_EQ(io::windowLevel(-0.2, 0.0, 1.0), 0);
    EXPECT_EQ(io::windowLevel(3.0, 0.0, 1.0), 255);
    EXPECT_EQ(io::windowLevel(0.0, 0.0, 1.0), 0);
    EXPECT_EQ(io::windowLevel(1.5, 1.0, 2.0), 128);

    const VolumeGeometry g = grid(3, 2, 2);
    io::exportSlicePgm(Volume(g, 2.0), io::Axis::Z, 1, 0.0, 2.0, path("hi.pgm"));
    const std::vector<unsigned char> img = bytes(path("hi.pgm"));
    const std::string header = "P5\n3 2\n255\n";
    ASSERT_EQ(img.size(), header.size() + 6);
    EXPECT_TRUE(std::equal(header.begin(), header.end(), img.begin()));
    EXPECT_TRUE(std::all_of(img.begin() + long(header.size()), img.end(),
                            [](unsigned char c) { return c == 255; }));
}

TEST_F(IoTest, PgmSliceOrientation)
{
    const VolumeGeometry g = grid(3, 2, 2);
    Volume v(g);
    for(std::uint32_t k = 0; k < 2; ++k)
    {
        for(std::uint32_t j = 0; j < 2; ++j)
        {
            for(std::uint32_t i = 0; i < 3; ++i)
            {
                v.at(i, j, k) = (i + 3 * j + 6 * k) / 255.0;
            }
        }
    }
    io::exportSlicePgm(v, io::Axis::Z, 1, 0.0, 1.0, path("z.pgm"));
    std::vector<unsigned char> img = bytes(path("z.pgm"));
    std::vector<unsigned char> pixels(img.end() - 6, img.end());
    EXPECT_EQ(pixels, (std::vector<unsigned char>{6, 7, 8, 9, 10, 11}));

    io::exportSlicePgm(v, io::Axis::X, 2, 0.0, 1.0, path("x.pgm"));
    img = bytes(path("x.pgm"));
    EXPECT_EQ(std::string(img.begin(), img.begin() + 11), "P5\n2 2\n255\n");
    pixels.assign(img.end() - 4, img.end());
    EXPECT_EQ(pixels, (std::vector<unsigned char>{2, 5, 8, 11}));

    io::exportSlicePgm(v, io::Axis::Y, 0, 0.0, 1.0, path("y.pgm"));
    img = bytes(path("y.pgm"));
    pixels.assign(img.end() - 6, img.end());
    EXPECT_EQ(pixels, (std::vector<unsigned char>{0, 1, 2, 6, 7, 8}));

    EXPECT_THROW(io::exportSlicePgm(v, io::Axis::Z, 2, 0.0, 1.0, path("bad.pgm")), std::out_of_range);
    EXPECT_THROW(io::exportSlicePgm(v, io::Axis::Z, 0, 1.0, 1.0, path("bad.pgm")), ConfigError);
}
