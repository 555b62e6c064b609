#include <dsurf/geometry.hpp>
#include <dsurf/hash.hpp>
#include <dsurf/mesh_io.hpp>
#include <dsurf/parallel.hpp>
#include <dsurf/pipeline.hpp>
#include <dsurf/sif.hpp>

#include <chrono>
#include <fstream>
#include <numbers>

namespace dsurf {

namespace fs = std::filesystem;

namespace {

void write_json(const fs::path& path, const nlohmann::json& j)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out) fail(ErrorKind::Io, "cannot write " + path.string());
    out << j.dump(2) << '\n';
    if (!out) fail(ErrorKind::Io, "write failed: " + path.string());
}

/// Every regular file under dir, sorted, relative to root, with its digest.
nlohmann::json hash_tree(const fs::path& root, const fs::path& dir, std::map<std::string, std::string>& hashes)
{
    std::vector<fs::path> files;
    if (fs::exists(dir)) {
        for (const auto& e : fs::recursive_directory_iterator(dir)) {
            if (e.is_regular_file()) files.push_back(e.path());
        }
    }
    std::sort(files.begin(), files.end());
    nlohmann::json out = nlohmann::json::array();
    for (const auto& f : files) {
        const std::string rel = fs::relative(f, root).generic_string();
        const std::string h = sha256_file(f);
        hashes[rel] = h;
        out.push_back({{"path", rel}, {"sha256", h}});
    }
    return out;
}

double equivalent_radius(const TriangleMesh& mesh)
{
    return std::sqrt(total_area(mesh) / (4.0 * std::numbers::pi));
}

TriangleMesh translated(const TriangleMesh& mesh, const Vec3& t)
{
    return rigid_transform(mesh, Mat3::Identity(), t);
}

nlohmann::json sif_json(const TriangleMesh& mesh)
{
    auto j = to_json(count_sif(mesh));
    j["euler_characteristic"] = euler_characteristic(mesh);
    return j;
}

struct State
{
    TriangleMesh template_mesh;
    TriangleMesh wm_target;
    TriangleMesh pial_target;
    TriangleMesh wm;
    TriangleMesh pial;
    TriangleMesh wm_smooth;
    TriangleMesh inflated;
    VertexScalarField depth;
    VertexScalarField thickness;
    VertexScalarField curvature;
    std::optional<VertexScalarField> sampled;
};

} // namespace

PipelineRun run_pipeline(const PipelineConfig& config, const fs::path& out_dir,
                         const std::function<void(const std::string&)>& log)
{
    config.validate();
    auto say = [&](const std::string& s) {
        if (log) log(s);
    };
    fs::create_directories(out_dir);
    const fs::path manifest_path = out_dir / "manifest.json";

    PipelineRun run;
    const auto canonical = to_json(config);
    auto& m = run.manifest;
    m["config"] = canonical;
    m["config_sha256"] = sha256_hex(canonical.dump());
    m["threads"] = thread_count();
    m["status"] = "RUNNING";
    m["inputs"] = nlohmann::json::array();
    m["stages"] = nlohmann::json::array();

    State s;
    // inputs are loaded or generated before any stage runs
    {
        std::vector<fs::path> inputs;
        if (config.wm_target) {
            s.wm_target = io::read_mesh(*config.wm_target);
            s.pial_target = io::read_mesh(*config.pial_target);
            inputs.push_back(*config.wm_target);
            inputs.push_back(*config.pial_target);
        } else {
            const fs::path dir = out_dir / "inputs";
            fs::create_directories(dir);
            s.wm_target = gen_synthetic(config.synthetic.params, config.seed).surface;
            s.pial_target = scaled(s.wm_target, config.synthetic.pial_scale);
            io::write_mesh(dir / "wm_target.obj", s.wm_target);
            io::write_mesh(dir / "pial_target.obj", s.pial_target);
            inputs.push_back(dir / "wm_target.obj");
            inputs.push_back(dir / "pial_target.obj");
        }
        const Vec3 c = centroid(s.wm_target);
        if (config.template_mesh) {
            s.template_mesh = io::read_mesh(*config.template_mesh);
            inputs.push_back(*config.template_mesh);
        } else {
            // template sphere centred on the target with its equivalent radius
            s.template_mesh = translated(icosphere(config.template_level, equivalent_radius(s.wm_target)).mesh(), c);
        }
        if (config.volume) inputs.push_back(*config.volume);
        if (config.ribbon_mask) inputs.push_back(*config.ribbon_mask);
        for (const auto& p : inputs) {
            const fs::path rel = fs::relative(p, out_dir);
            const bool inside = !rel.empty() && *rel.begin() != "..";
            m["inputs"].push_back({{"path", inside ? rel.generic_string() : p.generic_string()}, {"sha256", sha256_file(p)}});
        }
    }
    write_json(manifest_path, m);

    std::vector<Vec3> all_points = s.template_mesh.vertices();
    all_points.insert(all_points.end(), s.wm_target.vertices().begin(), s.wm_target.vertices().end());
    all_points.insert(all_points.end(), s.pial_target.vertices().begin(), s.pial_target.vertices().end());
    StackGeometry geometry;
    geometry.full = config.grid.resolve(all_points);
    geometry.levels = config.levels;

    auto stage_fit = [&](const fs::path& dir) {
        const IntegrationConfig integ = config.resolved_integration(geometry.full);
        auto wm = fit_svf_stack(s.template_mesh, s.wm_target.vertices(), geometry, config.loss, integ, config.optimizer);
        s.wm = wm.final_surface;
        say("fit wm: " + std::to_string(wm.history.size() - 1) + " accepted steps, " + wm.stop_reason);
        auto pial = fit_svf_stack(s.wm, s.pial_target.vertices(), geometry, config.loss, integ, config.optimizer);
        s.pial = pial.final_surface;
        say("fit pial: " + std::to_string(pial.history.size() - 1) + " accepted steps, " + pial.stop_reason);
        io::write_mesh(dir / "wm.obj", s.wm);
        io::write_mesh(dir / "pial.obj", s.pial);
        io::write_stack(dir / "wm_stack.json", wm.stack);
        io::write_stack(dir / "pial_stack.json", pial.stack);
        io::write_fit_history_csv(dir / "wm_history.csv", wm.history);
        io::write_fit_history_csv(dir / "pial_history.csv", pial.history);
        write_json(dir / "topology.json", {{"wm", sif_json(s.wm)}, {"pial", sif_json(s.pial)}});
    };
    auto stage_taubin = [&](const fs::path& dir) {
        s.wm_smooth = taubin_smooth(s.wm, config.taubin);
        io::write_mesh(dir / "wm_smooth.obj", s.wm_smooth);
    };
    auto stage_inflate = [&](const fs::path& dir) {
        const auto mid = midthickness(s.wm_smooth, s.pial);
        auto r = inflate(mid, config.inflation);
        s.inflated = std::move(r.inflated);
        s.depth = std::move(r.sulcal_depth);
        io::write_mesh(dir / "midthickness.obj", mid);
        io::write_mesh(dir / "inflated.obj", s.inflated);
        io::write_scalars(dir / "sulcal_depth.csv", s.depth);
        write_json(dir / "inflation.json", {{"iterations", config.inflation.resolved_iterations()},
                                           {"substeps_per_iteration", r.substeps_per_iteration},
                                           {"curvature_fallbacks", r.curvature_fallbacks}});
    };
    auto stage_features = [&](const fs::path& dir) {
        s.thickness = cortical_thickness(s.wm_smooth, s.pial);
        const auto curv = mean_curvature(s.wm_smooth);
        s.curvature = curv.mean_curvature;
        io::write_scalars(dir / "thickness.csv", s.thickness);
        io::write_scalars(dir / "curvature.csv", s.curvature);
        io::write_scalars(dir / "sulcal_depth.csv", s.depth);
        std::size_t fallbacks = 0;
        for (char c : curv.barycentric_fallback) fallbacks += static_cast<std::size_t>(c);
        nlohmann::json info = {{"curvature_barycentric_fallbacks", fallbacks}};
        if (config.volume) {
            const auto volume = io::read_scalar_volume(*config.volume);
            std::optional<ScalarVolume> mask;
            if (config.ribbon_mask) mask = io::read_scalar_volume(*config.ribbon_mask);
            const auto mid = midthickness(s.wm_smooth, s.pial);
            s.sampled = volume_to_surface(volume, mid, s.thickness, mask ? &*mask : nullptr);
            io::write_scalars(dir / "volume_samples.csv", *s.sampled);
        }
        write_json(dir / "features.json", info);
    };
    auto stage_project = [&](const fs::path& dir) {
        const double radius = equivalent_radius(s.wm_smooth);
        const auto centred = translated(s.inflated, -centroid(s.inflated));
        const auto initial = SphereMesh::radial_projection(centred, radius);
        const auto r = project_to_sphere(s.wm_smooth, initial, config.projection);
        io::write_mesh(dir / "sphere.obj", r.sphere.mesh());
        const auto target = icosphere(config.resample_level, r.sphere.radius());
        BarycentricCache cache;
        const auto& table = cache.get(r.sphere, target);
        auto resample = [&](const VertexScalarField& f, const char* name) {
            io::write_scalars(dir / name, VertexScalarField(barycentric_resample(f.values, r.sphere, target, &cache)));
        };
        resample(s.thickness, "thickness_resampled.csv");
        resample(s.curvature, "curvature_resampled.csv");
        resample(s.depth, "sulcal_depth_resampled.csv");
        if (s.sampled) resample(*s.sampled, "volume_samples_resampled.csv");
        auto initial_json = to_json(r.initial);
        auto final_json = to_json(r.final);
        final_json["n_fallback_queries"] = table.n_fallback_queries;
        const auto& pc = config.projection;
        write_json(dir / "distortion.json",
                   {{"initial", initial_json},
                    {"final", final_json},
                    {"weighted_initial", r.initial.weighted(pc.lambda_e, pc.lambda_a)},
                    {"weighted_final", r.final.weighted(pc.lambda_e, pc.lambda_a)},
                    {"accepted_steps", r.history.size() - 1},
                    {"inverted_faces", count_inverted_faces(r.sphere.mesh())},
                    {"resample_level", config.resample_level}});
    };

    const std::array<std::function<void(const fs::path&)>, 5> bodies{stage_fit, stage_taubin, stage_inflate,
                                                                      stage_features, stage_project};
    for (std::size_t i = 0; i < pipeline_stages.size(); ++i) {
        const std::string name = pipeline_stages[i];
        const fs::path dir = out_dir / name;
        fs::remove_all(dir);
        fs::create_directories(dir);
        say("stage " + name);
        const auto t0 = std::chrono::steady_clock::now();
        nlohmann::json rec = {{"name", name}};
        auto finish = [&](const char* status) {
            rec["status"] = status;
            rec["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            rec["outputs"] = hash_tree(out_dir, dir, run.output_hashes);
            m["stages"].push_back(rec);
        };
        try {
            bodies[i](dir);
        } catch (const Error& e) {
            finish("FAILED");
            m["status"] = "FAILED";
            m["failed_stage"] = name;
            m["error"] = {{"kind", to_string(e.kind())}, {"message", e.message()}};
            write_json(manifest_path, m);
            fail(e.kind(), "stage '" + name + "': " + e.message());
        } catch (const std::exception& e) {
            finish("FAILED");
            m["status"] = "FAILED";
            m["failed_stage"] = name;
            m["error"] = {{"kind", "internal"}, {"message", e.what()}};
            write_json(manifest_path, m);
            throw;
        }
        finish("OK");
        write_json(manifest_path, m);
    }
    if (!config.wm_target) hash_tree(out_dir, out_dir / "inputs", run.output_hashes);
    m["status"] = "OK";
    write_json(manifest_path, m);
    return run;
}

} // namespace dsurf
