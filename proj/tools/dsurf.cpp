#include <dsurf/config.hpp>
#include <dsurf/geometry.hpp>
#include <dsurf/mesh_io.hpp>
#include <dsurf/parallel.hpp>
#include <dsurf/pipeline.hpp>
#include <dsurf/sif.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace dsurf;

namespace {

struct Common
{
    std::string config;
    unsigned threads = 1;
    std::optional<std::uint64_t> seed;
    std::string out = ".";
};

int exit_code(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::Argument: return 2;
    case ErrorKind::Numeric:
    case ErrorKind::DegenerateGeometry:
    case ErrorKind::OptimizationFailure:
    case ErrorKind::ProjectionFailure: return 3;
    case ErrorKind::Io:
    case ErrorKind::Structural:
    case ErrorKind::Shape: return 4;
    }
    return 1;
}

PipelineConfig load_config(const Common& c)
{
    PipelineConfig cfg = c.config.empty() ? PipelineConfig{} : load_pipeline_config(c.config);
    if (c.seed) cfg.seed = *c.seed;
    return cfg;
}

fs::path out_dir(const Common& c)
{
    fs::create_directories(c.out);
    return c.out;
}

void write_json(const fs::path& path, const nlohmann::json& j)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
    out << j.dump(2) << '\n';
}

void emit(const nlohmann::json& j)
{
    std::cout << j.dump(2) << '\n';
}

void add_common(CLI::App* app, Common& c)
{
    app->add_option("--config", c.config, "pipeline JSON config; relevant sections apply");
    app->add_option("--threads", c.threads, "worker thread cap (1 = bit-reproducible)")->check(CLI::Range(1u, 1024u));
    app->add_option("--seed", c.seed, "global random seed");
    app->add_option("--out", c.out, "output directory");
}

nlohmann::json mesh_summary(const TriangleMesh& mesh)
{
    return {{"vertices", mesh.num_vertices()},
            {"faces", mesh.num_faces()},
            {"euler_characteristic", euler_characteristic(mesh)},
            {"closed", mesh.is_closed()},
            {"area", total_area(mesh)}};
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Diffeomorphic cortical surface toolkit"};
    app.require_subcommand(1);
    Common common;
    std::function<void()> action;

    // gen
    auto* gen = app.add_subcommand("gen", "generate a synthetic surface (and optional volume)");
    add_common(gen, common);
    std::string gen_kind = "sphere";
    SyntheticParams gp;
    std::vector<double> gen_axes;
    std::vector<double> ramp;
    std::vector<double> shell;
    int vol_dims = 32;
    gen->add_option("--kind", gen_kind, "sphere|ellipsoid|bumpy_sphere");
    gen->add_option("--level", gp.level, "icosphere level")->check(CLI::Range(0, 8));
    gen->add_option("--radius", gp.radius, "radius (mm)");
    gen->add_option("--axes", gen_axes, "ellipsoid semi-axes")->expected(3);
    gen->add_option("--amplitude", gp.amplitude, "bump amplitude, fraction of radius");
    gen->add_option("--lobes", gp.lobes, "bump order");
    gen->add_option("--inner-scale", gp.inner_scale, "also write the surface scaled by this factor");
    gen->add_option("--ramp-volume", ramp, "write volume.json with value = g . x + c (4 numbers)")->expected(4);
    gen->add_option("--shell-mask", shell, "write mask.json, 1 for r_inner <= |x| <= r_outer")->expected(2);
    gen->add_option("--volume-dims", vol_dims, "voxels per axis of generated volumes")->check(CLI::Range(2, 512));
    gen->callback([&] {
        action = [&] {
            const auto cfg = load_config(common);
            gp.kind = parse_synthetic_kind(gen_kind);
            if (!gen_axes.empty()) gp.axes = Vec3(gen_axes[0], gen_axes[1], gen_axes[2]);
            const auto dir = out_dir(common);
            const auto s = gen_synthetic(gp, cfg.seed);
            io::write_mesh(dir / "surface.obj", s.surface);
            if (s.inner) io::write_mesh(dir / "inner.obj", *s.inner);
            auto summary = mesh_summary(s.surface);
            if (!ramp.empty() || !shell.empty()) {
                GridSpec spec;
                spec.dims = {vol_dims, vol_dims, vol_dims};
                const auto grid = spec.resolve(s.surface.vertices());
                if (!ramp.empty()) {
                    io::write_scalar_volume(dir / "volume.json", ramp_volume(grid, Vec3(ramp[0], ramp[1], ramp[2]), ramp[3]));
                }
                if (!shell.empty()) io::write_scalar_volume(dir / "mask.json", shell_mask(grid, Vec3::Zero(), shell[0], shell[1]));
            }
            emit(summary);
        };
    });

    // fit
    auto* fit = app.add_subcommand("fit", "fit a multiscale SVF stack deforming a template onto a target");
    add_common(fit, common);
    std::string fit_template, fit_target;
    fit->add_option("--template", fit_template, "template mesh (default: icosphere at template_level)");
    fit->add_option("--target", fit_target, "target mesh")->required();
    fit->callback([&] {
        action = [&] {
            const auto cfg = load_config(common);
            const auto target = io::read_mesh(fit_target);
            TriangleMesh tmpl;
            if (!fit_template.empty()) {
                tmpl = io::read_mesh(fit_template);
            } else {
                const double r = std::sqrt(total_area(target) / (4.0 * std::acos(-1.0)));
                tmpl = rigid_transform(icosphere(cfg.template_level, r).mesh(), Mat3::Identity(), centroid(target));
            }
            std::vector<Vec3> pts = tmpl.vertices();
            pts.insert(pts.end(), target.vertices().begin(), target.vertices().end());
            StackGeometry geom{cfg.grid.resolve(pts), cfg.levels};
            const auto dir = out_dir(common);
            const auto r = fit_svf_stack(tmpl, target.vertices(), geom, cfg.loss, cfg.resolved_integration(geom.full), cfg.optimizer,
                                         [](const FitHistoryEntry& e) {
                                             std::cerr << "iter " << e.iteration << " loss " << e.loss.total << '\n';
                                         });
            io::write_mesh(dir / "fitted.obj", r.final_surface);
            io::write_stack(dir / "stack.json", r.stack);
            io::write_fit_history_csv(dir / "history.csv", r.history);
            nlohmann::json j = {{"accepted_steps", r.history.size() - 1},
                                {"rejected_trials", r.rejected_trials},
                                {"stop_reason", r.stop_reason},
                                {"initial_loss", r.history.front().loss.total},
                                {"final_loss", r.history.back().loss.total},
                                {"sif", to_json(count_sif(r.final_surface))},
                                {"surface", mesh_summary(r.final_surface)}};
            write_json(dir / "fit.json", j);
            emit(j);
        };
    });

    // deform
    auto* deform = app.add_subcommand("deform", "apply a stored SVF stack to a surface");
    add_common(deform, common);
    std::string deform_surface, deform_stack;
    bool deform_all = false;
    deform->add_option("--surface", deform_surface, "input mesh")->required();
    deform->add_option("--stack", deform_stack, "stack manifest JSON")->required();
    deform->add_flag("--trajectory", deform_all, "also write every intermediate surface");
    deform->callback([&] {
        action = [&] {
            const auto mesh = io::read_mesh(deform_surface);
            const auto stack = io::read_stack(deform_stack);
            const auto dir = out_dir(common);
            const auto traj = multiscale_deform(mesh, stack);
            io::write_mesh(dir / "deformed.obj", traj.back());
            if (deform_all) {
                for (std::size_t l = 1; l + 1 < traj.size(); ++l) {
                    io::write_mesh(dir / ("stage" + std::to_string(l) + ".obj"), traj[l]);
                }
            }
            emit(mesh_summary(traj.back()));
        };
    });

    // integrate
    auto* integ = app.add_subcommand("integrate", "integrate one SVF into a deformation field");
    add_common(integ, common);
    std::string integ_svf, integ_method;
    std::optional<int> integ_k;
    std::optional<double> integ_sigma;
    integ->add_option("--svf", integ_svf, "vector field sidecar JSON")->required();
    integ->add_option("--steps", integ_k, "K (or Euler step count for forward-euler)");
    integ->add_option("--sigma", integ_sigma, "smoothing sigma (mm), 0 disables");
    integ->add_option("--method", integ_method, "scaling-squaring|forward-euler");
    integ->callback([&] {
        action = [&] {
            auto cfg = load_config(common).integration;
            if (integ_k) cfg.steps_K = *integ_k;
            if (integ_sigma) cfg.smoothing_sigma = *integ_sigma;
            if (!integ_method.empty()) cfg.method = parse_integration_method(integ_method);
            const auto svf = io::read_vector_field(integ_svf);
            const auto dir = out_dir(common);
            const auto phi = integrate(svf, cfg);
            io::write_vector_field(dir / "deformation.json", phi);
            emit({{"method", to_string(cfg.method)},
                  {"steps", cfg.steps_K},
                  {"jacobian_min_determinant", jacobian_min_determinant(phi)}});
        };
    });

    // taubin
    auto* taubin = app.add_subcommand("taubin", "Taubin lambda|mu smoothing");
    add_common(taubin, common);
    std::string taubin_surface;
    std::optional<double> t_lambda, t_mu;
    std::optional<int> t_iter;
    taubin->add_option("--surface", taubin_surface, "input mesh")->required();
    taubin->add_option("--lambda", t_lambda, "positive step");
    taubin->add_option("--mu", t_mu, "negative step");
    taubin->add_option("--iterations", t_iter, "lambda|mu pass pairs");
    taubin->callback([&] {
        action = [&] {
            auto p = load_config(common).taubin;
            if (t_lambda) p.lambda_step = *t_lambda;
            if (t_mu) p.mu_step = *t_mu;
            if (t_iter) p.iterations = *t_iter;
            const auto dir = out_dir(common);
            const auto smooth = taubin_smooth(io::read_mesh(taubin_surface), p);
            io::write_mesh(dir / "smoothed.obj", smooth);
            emit(mesh_summary(smooth));
        };
    });

    // inflate
    auto* inflate_cmd = app.add_subcommand("inflate", "inflate a surface and accumulate sulcal depth");
    add_common(inflate_cmd, common);
    std::string inf_surface, inf_mode;
    std::optional<int> inf_iter;
    inflate_cmd->add_option("--surface", inf_surface, "input mesh")->required();
    inflate_cmd->add_option("--mode", inf_mode, "inflated|very-inflated");
    inflate_cmd->add_option("--iterations", inf_iter, "iterations (0 = mode default)");
    auto inflation_config = [&] {
        auto c = load_config(common).inflation;
        if (inf_mode == "very-inflated") c.mode = InflationMode::VeryInflated;
        else if (inf_mode == "inflated") c.mode = InflationMode::Inflated;
        else if (!inf_mode.empty()) fail(ErrorKind::Argument, "--mode must be inflated|very-inflated");
        if (inf_iter) c.iterations = *inf_iter;
        return c;
    };
    inflate_cmd->callback([&] {
        action = [&] {
            const auto c = inflation_config();
            const auto dir = out_dir(common);
            const auto r = inflate(io::read_mesh(inf_surface), c);
            io::write_mesh(dir / "inflated.obj", r.inflated);
            io::write_scalars(dir / "sulcal_depth.csv", r.sulcal_depth);
            emit({{"substeps_per_iteration", r.substeps_per_iteration}, {"surface", mesh_summary(r.inflated)}});
        };
    });

    // features
    auto* features = app.add_subcommand("features", "per-vertex cortical features");
    features->require_subcommand(1);
    auto* f_thick = features->add_subcommand("thickness", "pial/wm nearest-vertex thickness");
    auto* f_curv = features->add_subcommand("curvature", "cotangent mean curvature");
    auto* f_depth = features->add_subcommand("depth", "sulcal depth by inflation");
    auto* f_vol = features->add_subcommand("sample-volume", "thickness-scaled Gaussian volume sampling");
    for (auto* sub : {f_thick, f_curv, f_depth, f_vol}) add_common(sub, common);
    std::string f_wm, f_pial, f_surface, f_volume, f_thickness, f_mask;
    f_thick->add_option("--wm", f_wm, "white-matter mesh")->required();
    f_thick->add_option("--pial", f_pial, "pial mesh")->required();
    f_curv->add_option("--surface", f_surface, "input mesh")->required();
    f_depth->add_option("--surface", f_surface, "input mesh")->required();
    f_depth->add_option("--mode", inf_mode, "inflated|very-inflated");
    f_depth->add_option("--iterations", inf_iter, "iterations (0 = mode default)");
    f_vol->add_option("--surface", f_surface, "sampling mesh")->required();
    f_vol->add_option("--volume", f_volume, "scalar volume sidecar JSON")->required();
    f_vol->add_option("--thickness", f_thickness, "per-vertex thickness (csv or CFS1)")->required();
    f_vol->add_option("--mask", f_mask, "ribbon mask sidecar JSON");
    f_thick->callback([&] {
        action = [&] {
            const auto dir = out_dir(common);
            const auto t = cortical_thickness(io::read_mesh(f_wm), io::read_mesh(f_pial));
            io::write_scalars(dir / "thickness.csv", t);
        };
    });
    f_curv->callback([&] {
        action = [&] {
            const auto dir = out_dir(common);
            const auto r = mean_curvature(io::read_mesh(f_surface));
            io::write_scalars(dir / "curvature.csv", r.mean_curvature);
            std::size_t n = 0;
            for (char c : r.barycentric_fallback) n += static_cast<std::size_t>(c);
            emit({{"barycentric_fallback_vertices", n}});
        };
    });
    f_depth->callback([&] {
        action = [&] {
            const auto c = inflation_config();
            const auto dir = out_dir(common);
            io::write_scalars(dir / "sulcal_depth.csv", inflate(io::read_mesh(f_surface), c).sulcal_depth);
        };
    });
    f_vol->callback([&] {
        action = [&] {
            const auto mesh = io::read_mesh(f_surface);
            const auto volume = io::read_scalar_volume(f_volume);
            const auto thickness = io::read_scalars(f_thickness);
            std::optional<ScalarVolume> mask;
            if (!f_mask.empty()) mask = io::read_scalar_volume(f_mask);
            const auto dir = out_dir(common);
            io::write_scalars(dir / "volume_samples.csv",
                              volume_to_surface(volume, mesh, thickness, mask ? &*mask : nullptr));
        };
    });

    // project
    auto* project = app.add_subcommand("project", "distortion-minimizing spherical projection");
    add_common(project, common);
    std::string p_surface, p_sphere;
    std::optional<int> p_iter, p_resample;
    project->add_option("--surface", p_surface, "cortical surface")->required();
    project->add_option("--sphere", p_sphere, "initial sphere (default: radial projection of the surface)");
    project->add_option("--iterations", p_iter, "projection iterations");
    project->add_option("--resample-level", p_resample, "also write the icosphere barycentric table at this level");
    project->callback([&] {
        action = [&] {
            auto pc = load_config(common).projection;
            if (p_iter) pc.iterations = *p_iter;
            const auto surface = io::read_mesh(p_surface);
            const double radius = std::sqrt(total_area(surface) / (4.0 * std::acos(-1.0)));
            const SphereMesh initial =
                p_sphere.empty()
                    ? SphereMesh::radial_projection(rigid_transform(surface, Mat3::Identity(), -centroid(surface)), radius)
                    : SphereMesh::from_mesh(io::read_mesh(p_sphere));
            const auto r = project_to_sphere(surface, initial, pc);
            const auto dir = out_dir(common);
            io::write_mesh(dir / "sphere.obj", r.sphere.mesh());
            nlohmann::json j = {{"initial", to_json(r.initial)},
                                {"final", to_json(r.final)},
                                {"weighted_initial", r.initial.weighted(pc.lambda_e, pc.lambda_a)},
                                {"weighted_final", r.final.weighted(pc.lambda_e, pc.lambda_a)},
                                {"accepted_steps", r.history.size() - 1},
                                {"inverted_faces", count_inverted_faces(r.sphere.mesh())}};
            if (p_resample) {
                const auto t = barycentric_table(r.sphere, icosphere(*p_resample, r.sphere.radius()));
                j["final"]["n_fallback_queries"] = t.n_fallback_queries;
            }
            write_json(dir / "distortion.json", j);
            emit(j);
        };
    });

    // sif
    auto* sif = app.add_subcommand("sif", "count self-intersecting faces");
    add_common(sif, common);
    std::string sif_surface;
    bool sif_brute = false;
    sif->add_option("--surface", sif_surface, "input mesh")->required();
    sif->add_flag("--brute-force", sif_brute, "exhaustive pair test instead of the AABB tree");
    sif->callback([&] {
        action = [&] {
            const auto r = count_sif(io::read_mesh(sif_surface), sif_brute ? SifMode::BruteForce : SifMode::Accelerated);
            const auto j = to_json(r);
            if (sif->count("--out")) write_json(out_dir(common) / "sif.json", j);
            emit(j);
        };
    });

    // report
    auto* report = app.add_subcommand("report", "summarize a mesh, a sphere pairing or a pipeline run");
    add_common(report, common);
    std::string r_surface, r_sphere, r_manifest;
    report->add_option("--surface", r_surface, "mesh to summarize");
    report->add_option("--sphere", r_sphere, "sphere with the surface's connectivity (adds distortion)");
    report->add_option("--manifest", r_manifest, "pipeline manifest.json");
    report->callback([&] {
        action = [&] {
            nlohmann::json j;
            if (!r_surface.empty()) {
                const auto mesh = io::read_mesh(r_surface);
                j["surface"] = mesh_summary(mesh);
                j["surface"]["sif"] = count_sif(mesh).count;
                if (!r_sphere.empty()) j["distortion"] = to_json(distortion_report(io::read_mesh(r_sphere), mesh));
            }
            if (!r_manifest.empty()) {
                std::ifstream in(r_manifest);
                if (!in) fail(ErrorKind::Io, "cannot open " + r_manifest);
                nlohmann::json m;
                try {
                    in >> m;
                } catch (const nlohmann::json::exception& e) {
                    fail(ErrorKind::Io, r_manifest + ": " + e.what());
                }
                nlohmann::json stages = nlohmann::json::array();
                for (const auto& s : m.value("stages", nlohmann::json::array())) {
                    stages.push_back({{"name", s.value("name", "")},
                                      {"status", s.value("status", "")},
                                      {"wall_seconds", s.value("wall_seconds", 0.0)},
                                      {"outputs", s.value("outputs", nlohmann::json::array()).size()}});
                }
                j["run"] = {{"status", m.value("status", "")}, {"stages", stages}};
                if (m.contains("error")) j["run"]["error"] = m["error"];
            }
            if (j.is_null()) fail(ErrorKind::Argument, "report needs --surface and/or --manifest");
            if (report->count("--out")) write_json(out_dir(common) / "report.json", j);
            emit(j);
        };
    });

    // pipeline
    auto* pipeline = app.add_subcommand("pipeline", "fit -> taubin -> inflate -> features -> project");
    add_common(pipeline, common);
    pipeline->callback([&] {
        action = [&] {
            const auto cfg = load_config(common);
            const auto r = run_pipeline(cfg, out_dir(common), [](const std::string& s) { std::cerr << s << '\n'; });
            emit({{"status", r.manifest["status"]}, {"outputs", r.output_hashes.size()}});
        };
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    try {
        set_thread_count(common.threads);
        if (action) action();
    } catch (const Error& e) {
        std::cerr << "dsurf: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const fs::filesystem_error& e) {
        std::cerr << "dsurf: io-error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "dsurf: internal error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
