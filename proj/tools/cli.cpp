#include "cli.hpp"

#include "cbct/analysis.hpp"
#include "cbct/config.hpp"
#include "cbct/errors.hpp"
#include "cbct/io.hpp"
#include "cbct/operator.hpp"
#include "cbct/phantom.hpp"
#include "cbct/solvers.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#ifndef CBCT_VERSION
#define CBCT_VERSION "unknown"
#endif

namespace cbct::cli {

namespace {

    namespace fs = std::filesystem;

    std::string number(double v)
    {
        std::array<char, 64> buf;
        const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
        return std::string(buf.data(), res.ptr);
    }

    /// key = value record written next to every output.
    class Manifest
    {
    public:
        Manifest(std::string command, const std::string& configPath, unsigned workers)
        {
            add("command", std::move(command));
            add("config", configPath);
            add("version", CBCT_VERSION);
            add("worker_count", std::to_string(workers));
            add("seed", "none");
        }

        void add(const std::string& key, const std::string& value)
        {
            lines_ += key + " = " + value + "\n";
        }
        void add(const std::string& key, double value) { add(key, number(value)); }

        void addGeometry(const GeometryConfig& g)
        {
            lines_ += "# resolved geometry\n" + formatGeometryConfig(g);
        }

        void write(const std::string& path) const
        {
            std::ofstream f(path, std::ios::binary | std::ios::trunc);
            if(!f)
            {
                throw IOError("can not write manifest " + path);
            }
            f << lines_;
        }

    private:
        std::string lines_;
    };

    io::Dtype parseDtype(const std::string& s)
    {
        if(s == "f64")
        {
            return io::Dtype::Float64;
        }
        if(s == "f32")
        {
            return io::Dtype::Float32;
        }
        throw ConfigError("dtype must be f32 or f64");
    }

    BoxBounds parseBox(const std::string& s)
    {
        const auto comma = s.find(',');
        if(comma == std::string::npos)
        {
            throw ConfigError("--box expects lo,hi");
        }
        BoxBounds box;
        const std::string lo = s.substr(0, comma);
        const std::string hi = s.substr(comma + 1);
        const auto r1 = std::from_chars(lo.data(), lo.data() + lo.size(), box.lo);
        const auto r2 = std::from_chars(hi.data(), hi.data() + hi.size(), box.hi);
        if(r1.ec != std::errc() || r1.ptr != lo.data() + lo.size() || r2.ec != std::errc()
           || r2.ptr != hi.data() + hi.size())
        {
            throw ConfigError("--box expects two numbers lo,hi");
        }
        return box;
    }

    std::string toleranceText(const std::optional<std::uint32_t>& n)
    {
        return n ? std::to_string(*n) : std::string("none");
    }

    struct Options
    {
        unsigned workers = 8;
        std::string config;
        std::string out;
        std::string dtype = "f64";
        std::string ellipsoids;
        std::string vol;
        std::string prj;
        std::string method;
        std::uint32_t iters = 40;
        double err = 0.0;
        std::string x0;
        double lambda = 0.0;
        bool jacobi = false;
        double jacobiFloor = 1e-6;
        std::string box;
        double relax = 1.0;
        std::uint32_t trueEvery = 0;
        std::string csv;
        double tol = 0.01;
        std::string outdir;
    };

    int cmdPhantom(const Options& o, std::ostream& out)
    {
        const GeometryConfig g = readGeometryConfig(o.config);
        const std::vector<Ellipsoid> table
            = o.ellipsoids.empty() ? sheppLogan3d() : readEllipsoidFile(o.ellipsoids);
        const Volume vol = generatePhantom(table, g.volume);
        io::writeVolume(o.out, vol, parseDtype(o.dtype));
        Manifest m("phantom", o.config, o.workers);
        m.add("out", o.out);
        m.add("dtype", o.dtype);
        m.add("ellipsoids", o.ellipsoids.empty() ? std::string("builtin:shepp_logan_3d") : o.ellipsoids);
        m.add("ellipsoid_count", std::to_string(table.size()));
        m.addGeometry(g);
        m.write(o.out + ".manifest");
        out << "wrote phantom " << g.volume.nx << "x" << g.volume.ny << "x" << g.volume.nz << " to "
            << o.out << "\n";
        return kSuccess;
    }

    int cmdProject(const Options& o, std::ostream& out)
    {
        const GeometryConfig g = readGeometryConfig(o.config);
        const Volume x = io::readVolume(o.vol, g.volume);
        const CbctOperator op(g.volume, g.trajectory, o.workers);
        io::writeProjections(o.out, op.project(x), parseDtype(o.dtype));
        Manifest m("project", o.config, o.workers);
        m.add("vol", o.vol);
        m.add("out", o.out);
        m.add("dtype", o.dtype);
        m.addGeometry(g);
        m.write(o.out + ".manifest");
        out << "wrote projections to " << o.out << "\n";
        return kSuccess;
    }

    int cmdBackproject(const Options& o, std::ostream& out)
    {
        const GeometryConfig g = readGeometryConfig(o.config);
        const ProjectionStack b = io::readProjections(o.prj, g.trajectory);
        const CbctOperator op(g.volume, g.trajectory, o.workers);
        io::writeVolume(o.out, op.backproject(b), parseDtype(o.dtype));
        Manifest m("backproject", o.config, o.workers);
        m.add("prj", o.prj);
        m.add("out", o.out);
        m.add("dtype", o.dtype);
        m.addGeometry(g);
        m.write(o.out + ".manifest");
        out << "wrote backprojection to " << o.out << "\n";
        return kSuccess;
    }

    SolverConfig solverConfig(const Options& o, const GeometryConfig& g, Method method)
    {
        SolverConfig cfg;
        cfg.method = method;
        cfg.maxIterations = o.iters;
        cfg.relDiscrepancyTol = o.err;
        cfg.tikhonovLambda = o.lambda;
        cfg.jacobiPrecondition = o.jacobi;
        cfg.jacobiFloor = o.jacobiFloor;
        cfg.relaxation = o.relax;
        cfg.trueDiscrepancyEvery = o.trueEvery;
        if(!o.box.empty())
        {
            cfg.boxBounds = parseBox(o.box);
        }
        cfg.validate();
        if(!o.x0.empty())
        {
            cfg.initialX = io::readVolume(o.x0, g.volume).data;
        }
        return cfg;
    }

    int cmdReconstruct(const Options& o, std::ostream& out)
    {
        const GeometryConfig g = readGeometryConfig(o.config);
        const SolverConfig cfg = solverConfig(o, g, parseMethod(o.method));
        const ProjectionStack b = io::readProjections(o.prj, g.trajectory);
        const CbctOperator op(g.volume, g.trajectory, o.workers);
        const SolverReport report = reconstruct(op, b, cfg);
        io::writeVolume(o.out, report.finalX, parseDtype(o.dtype));
        const std::string csv = o.csv.empty() ? o.out + ".csv" : o.csv;
        writeConvergenceCsv(csv, report.history);

        Manifest m("reconstruct", o.config, report.workerCount);
        m.add("prj", o.prj);
        m.add("out", o.out);
        m.add("csv", csv);
        m.add("method", std::string(methodName(cfg.method)));
        m.add("iters", std::to_string(cfg.maxIterations));
        m.add("err", cfg.relDiscrepancyTol);
        m.add("x0", o.x0.empty() ? std::string("zero") : o.x0);
        m.add("lambda", cfg.tikhonovLambda);
        m.add("jacobi", cfg.jacobiPrecondition ? "true" : "false");
        m.add("jacobi_floor", cfg.jacobiFloor);
        m.add("box", o.box.empty() ? std::string("none") : o.box);
        m.add("relax", cfg.relaxation);
        m.add("true_every", std::to_string(cfg.trueDiscrepancyEvery));
        m.add("dtype", o.dtype);
        m.add("iterations_done", std::to_string(report.iterations));
        m.add("final_rel_discrepancy", report.finalRelDiscrepancy());
        m.addGeometry(g);
        m.write(o.out + ".manifest");

        out << methodName(cfg.method) << ": " << report.iterations
            << " iterations, relative discrepancy " << report.finalRelDiscrepancy() << "\n";
        if(report.stopReason == StopReason::Breakdown
           && report.finalRelDiscrepancy() > cfg.relDiscrepancyTol)
        {
            out << "solver stopped on a breakdown guard\n";
            return kSolverBreakdown;
        }
        return kSuccess;
    }

    int cmdCompare(const Options& o, std::ostream& out)
    {
        if(o.iters < 1)
        {
            throw ConfigError("--iters must be at least 1");
        }
        if(!(o.tol > 0.0))
        {
            throw ConfigError("--tol must be positive");
        }
        const GeometryConfig g = readGeometryConfig(o.config);
        const ProjectionStack b = io::readProjections(o.prj, g.trajectory);
        const CbctOperator op(g.volume, g.trajectory, o.workers);
        fs::create_directories(o.outdir);
        const fs::path dir(o.outdir);

        SolverConfig cfg;
        cfg.maxIterations = o.iters;
        cfg.relDiscrepancyTol = 0.0;
        cfg.relaxation = o.relax;

        std::ostringstream summary;
        summary << "iterations = " << o.iters << "\n";
        summary << "tolerance = " << number(o.tol) << "\n";
        std::optional<std::uint32_t> reached[2];
        const Method methods[2] = {Method::CGLS, Method::PSIRT};
        for(int k = 0; k < 2; ++k)
        {
            const std::string name(methodName(methods[k]));
            const SolverReport r = (methods[k] == Method::CGLS) ? cgls(op, b, cfg) : psirt(op, b, cfg);
            writeConvergenceCsv((dir / (name + ".csv")).string(), r.history);
            io::writeVolume((dir / (name + ".kvol")).string(), r.finalX);
            io::exportSlicePgm(r.finalX, io::Axis::Z, g.volume.nz / 2, 0.0, 1.0,
                               (dir / (name + "_center.pgm")).string());
            reached[k] = iterationsToTolerance(r.history, o.tol);
            summary << name << "_rel_discrepancy = " << number(r.finalRelDiscrepancy()) << "\n";
            summary << name << "_iterations_to_tolerance = " << toleranceText(reached[k]) << "\n";
            out << name << ": e(" << r.iterations << ") = " << r.finalRelDiscrepancy()
                << ", iterations to " << o.tol << ": " << toleranceText(reached[k]) << "\n";
        }
        if(reached[0] && reached[1] && *reached[0] > 0)
        {
            summary << "iteration_ratio = " << number(double(*reached[1]) / double(*reached[0]))
                    << "\n";
        } else
        {
            summary << "iteration_ratio = none\n";
        }
        {
            std::ofstream f(dir / "summary.txt", std::ios::binary | std::ios::trunc);
            if(!f)
            {
                throw IOError("can not write summary in " + o.outdir);
            }
            f << summary.str();
        }
        Manifest m("compare", o.config, o.workers);
        m.add("prj", o.prj);
        m.add("outdir", o.outdir);
        m.add("iters", std::to_string(o.iters));
        m.add("tol", o.tol);
        m.add("relax", o.relax);
        m.addGeometry(g);
        m.write((dir / "manifest.txt").string());
        return kSuccess;
    }

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    Options o;
    CLI::App app{"Matrix-free cone beam CT reconstruction with Krylov and SIRT-type solvers",
                 "cbct"};
    app.require_subcommand(1);
    app.add_option("--workers", o.workers, "Worker threads of the projector")
        ->check(CLI::Range(1u, 1024u))
        ->capture_default_str();
    app.set_version_flag("--version", std::string(CBCT_VERSION));

    auto addConfig = [&](CLI::App* sub) {
        sub->add_option("config", o.config, "Geometry config file")->required();
        sub->add_option("--dtype", o.dtype, "Output sample type, f32 or f64")
            ->check(CLI::IsMember({"f32", "f64"}))
            ->capture_default_str();
    };

    CLI::App* phantom = app.add_subcommand("phantom", "Voxelize the 3D Shepp-Logan or a custom ellipsoid table");
    addConfig(phantom);
    phantom->add_option("--out", o.out, "Output volume")->required();
    phantom->add_option("--ellipsoids", o.ellipsoids, "Ellipsoid table replacing the built-in phantom");

    CLI::App* project = app.add_subcommand("project", "Forward project a volume");
    addConfig(project);
    project->add_option("--vol", o.vol, "Input volume")->required();
    project->add_option("--out", o.out, "Output projections")->required();

    CLI::App* backproject = app.add_subcommand("backproject", "Backproject projections");
    addConfig(backproject);
    backproject->add_option("--prj", o.prj, "Input projections")->required();
    backproject->add_option("--out", o.out, "Output volume")->required();

    CLI::App* recon = app.add_subcommand("reconstruct", "Iterative reconstruction");
    addConfig(recon);
    recon->add_option("--prj", o.prj, "Input projections")->required();
    recon->add_option("--method", o.method, "cgls, lsqr, sirt or psirt")->required();
    recon->add_option("--iters", o.iters, "Maximum number of iterations")->capture_default_str();
    recon->add_option("--err", o.err, "Relative discrepancy tolerance, 0 runs all iterations")
        ->capture_default_str();
    recon->add_option("--out", o.out, "Output volume")->required();
    recon->add_option("--x0", o.x0, "Initial volume");
    recon->add_option("--lambda", o.lambda, "Tikhonov regularization strength")->capture_default_str();
    recon->add_flag("--jacobi", o.jacobi, "Jacobi preconditioning (cgls, lsqr)");
    recon->add_option("--jacobi-floor", o.jacobiFloor, "Jacobi floor as fraction of the maximal diagonal")
        ->capture_default_str();
    recon->add_option("--box", o.box, "Box constraints lo,hi (sirt, psirt)");
    recon->add_option("--relax", o.relax, "Relaxation of sirt and psirt")->capture_default_str();
    recon->add_option("--true-every", o.trueEvery, "Recompute the true discrepancy every k iterations")
        ->capture_default_str();
    recon->add_option("--csv", o.csv, "Convergence history, defaults to OUT.csv");

    CLI::App* compare = app.add_subcommand("compare", "CGLS versus PSIRT convergence experiment");
    compare->add_option("config", o.config, "Geometry config file")->required();
    compare->add_option("--prj", o.prj, "Input projections")->required();
    compare->add_option("--iters", o.iters, "Iterations of both methods")->capture_default_str();
    compare->add_option("--tol", o.tol, "Relative discrepancy threshold")->capture_default_str();
    compare->add_option("--relax", o.relax, "PSIRT relaxation")->capture_default_str();
    compare->add_option("--outdir", o.outdir, "Output directory")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try
    {
        app.parse(reversed);
    } catch(const CLI::ParseError& e)
    {
        std::ostringstream helpOut, errOut;
        const int code = app.exit(e, helpOut, errOut);
        out << helpOut.str();
        err << errOut.str();
        return code == 0 ? kSuccess : kUsageError;
    }

    try
    {
        if(phantom->parsed())
        {
            return cmdPhantom(o, out);
        }
        if(project->parsed())
        {
            return cmdProject(o, out);
        }
        if(backproject->parsed())
        {
            return cmdBackproject(o, out);
        }
        if(recon->parsed())
        {
            return cmdReconstruct(o, out);
        }
        return cmdCompare(o, out);
    } catch(const ConfigError& e)
    {
        err << "configuration error: " << e.what() << "\n";
        return kUsageError;
    } catch(const GeometryError& e)
    {
        err << "geometry error: " << e.what() << "\n";
        return kUsageError;
    } catch(const DimensionMismatchError& e)
    {
        err << "dimension mismatch: " << e.what() << "\n";
        return kIOError;
    } catch(const FormatError& e)
    {
        err << "format error: " << e.what() << "\n";
        return kIOError;
    } catch(const IOError& e)
    {
        err << "io error: " << e.what() << "\n";
        return kIOError;
    } catch(const fs::filesystem_error& e)
    {
        err << "io error: " << e.what() << "\n";
        return kIOError;
    } catch(const DegenerateOperatorError& e)
    {
        err << "solver error: " << e.what() << "\n";
        return kSolverBreakdown;
    } catch(const GeometryMismatchError& e)
    {
        err << "geometry mismatch: " << e.what() << "\n";
        return kUsageError;
    }
}

} // namespace cbct::cli
