#include "cbct/config.hpp"

#include "cbct/errors.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string_view>

namespace cbct {

namespace {

    constexpr std::array<std::string_view, 20> kKeys = {
        "sid_mm",          "sdd_mm",          "n_views",         "start_angle_rad",
        "angular_span_rad", "det_nu",          "det_nv",          "det_pitch_u_mm",
        "det_pitch_v_mm",  "det_offset_u_mm", "det_offset_v_mm", "vol_nx",
        "vol_ny",          "vol_nz",          "vox_x_mm",        "vox_y_mm",
        "vox_z_mm",        "vol_offset_x_mm", "vol_offset_y_mm", "vol_offset_z_mm"};

    std::string_view trim(std::string_view s)
    {
        const auto b = s.find_first_not_of(" \t\r");
        if(b == std::string_view::npos)
        {
            return {};
        }
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    class Values
    {
    public:
        explicit Values(std::map<std::string, std::string, std::less<>> v)
            : values_(std::move(v))
        {
        }

        double real(std::string_view key, std::optional<double> fallback = std::nullopt) const
        {
            const auto it = values_.find(key);
            if(it == values_.end())
            {
                if(fallback)
                {
                    return *fallback;
                }
                throw ConfigError("missing config key " + std::string(key));
            }
            const std::string& text = it->second;
            double v = 0.0;
            const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
            if(res.ec != std::errc() || res.ptr != text.data() + text.size())
            {
                throw ConfigError("config key " + std::string(key) + ": '" + text
                                  + "' is not a number");
            }
            return v;
        }

        std::uint32_t count(std::string_view key) const
        {
            const auto it = values_.find(key);
            if(it == values_.end())
            {
                throw ConfigError("missing config key " + std::string(key));
            }
            const std::string& text = it->second;
            std::uint32_t v = 0;
            const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
            if(res.ec != std::errc() || res.ptr != text.data() + text.size())
            {
                throw ConfigError("config key " + std::string(key) + ": '" + text
                                  + "' is not a non-negative integer");
            }
            return v;
        }

    private:
        std::map<std::string, std::string, std::less<>> values_;
    };

    void appendReal(std::ostringstream& out, std::string_view key, double v)
    {
        std::array<char, 64> buf;
        const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
        out << key << " = " << std::string_view(buf.data(), res.ptr - buf.data()) << '\n';
    }

} // namespace

GeometryConfig parseGeometryConfig(std::istream& in)
{
    std::map<std::string, std::string, std::less<>> raw;
    std::string line;
    int lineNo = 0;
    while(std::getline(in, line))
    {
        ++lineNo;
        std::string_view body = line;
        if(const auto hash = body.find('#'); hash != std::string_view::npos)
        {
            body = body.substr(0, hash);
        }
        body = trim(body);
        if(body.empty())
        {
            continue;
        }
        const auto eq = body.find('=');
        if(eq == std::string_view::npos)
        {
            throw ConfigError("config line " + std::to_string(lineNo) + ": expected key = value");
        }
        const std::string key(trim(body.substr(0, eq)));
        const std::string value(trim(body.substr(eq + 1)));
        if(std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end())
        {
            throw ConfigError("config line " + std::to_string(lineNo) + ": unknown key '" + key + "'");
        }
        if(value.empty())
        {
            throw ConfigError("config line " + std::to_string(lineNo) + ": empty value for " + key);
        }
        if(!raw.emplace(key, value).second)
        {
            throw ConfigError("config line " + std::to_string(lineNo) + ": duplicate key " + key);
        }
    }
    const Values v(std::move(raw));

    GeometryConfig cfg;
    cfg.volume.nx = v.count("vol_nx");
    cfg.volume.ny = v.count("vol_ny");
    cfg.volume.nz = v.count("vol_nz");
    cfg.volume.voxelSize = {v.real("vox_x_mm"), v.real("vox_y_mm"), v.real("vox_z_mm")};
    cfg.volume.centerOffset = {v.real("vol_offset_x_mm", 0.0), v.real("vol_offset_y_mm", 0.0),
                               v.real("vol_offset_z_mm", 0.0)};
    cfg.volume.validate();

    DetectorGeometry det;
    det.nu = v.count("det_nu");
    det.nv = v.count("det_nv");
    det.pixelSize = {v.real("det_pitch_u_mm"), v.real("det_pitch_v_mm")};
    det.principalPointOffset = {v.real("det_offset_u_mm", 0.0), v.real("det_offset_v_mm", 0.0)};
    cfg.trajectory = makeCircularTrajectory(v.real("sid_mm"), v.real("sdd_mm"), v.count("n_views"),
                                            v.real("start_angle_rad", 0.0),
                                            v.real("angular_span_rad", 2.0 * std::numbers::pi), det);
    return cfg;
}

GeometryConfig readGeometryConfig(const std::string& path)
{
    std::ifstream in(path);
    if(!in)
    {
        throw ConfigError("can not open config " + path);
    }
    return parseGeometryConfig(in);
}

std::string formatGeometryConfig(const GeometryConfig& cfg)
{
    std::ostringstream out;
    const TrajectoryGeometry& t = cfg.trajectory;
    const VolumeGeometry& g = cfg.volume;
    appendReal(out, "sid_mm", t.sid);
    appendReal(out, "sdd_mm", t.sdd);
    out << "n_views = " << t.nViews << '\n';
    appendReal(out, "start_angle_rad", t.startAngle);
    appendReal(out, "angular_span_rad", t.angularSpan);
    out << "det_nu = " << t.detector.nu << '\n';
    out << "det_nv = " << t.detector.nv << '\n';
    appendReal(out, "det_pitch_u_mm", t.detector.pixelSize.u);
    appendReal(out, "det_pitch_v_mm", t.detector.pixelSize.v);
    appendReal(out, "det_offset_u_mm", t.detector.principalPointOffset.u);
    appendReal(out, "det_offset_v_mm", t.detector.principalPointOffset.v);
    out << "vol_nx = " << g.nx << '\n';
    out << "vol_ny = " << g.ny << '\n';
    out << "vol_nz = " << g.nz << '\n';
    appendReal(out, "vox_x_mm", g.voxelSize.x);
    appendReal(out, "vox_y_mm", g.voxelSize.y);
    appendReal(out, "vox_z_mm", g.voxelSize.z);
    appendReal(out, "vol_offset_x_mm", g.centerOffset.x);
    appendReal(out, "vol_offset_y_mm", g.centerOffset.y);
    appendReal(out, "vol_offset_z_mm", g.centerOffset.z);
    return out.str();
}

} // namespace cbct
