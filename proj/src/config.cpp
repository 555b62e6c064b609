#include <dsurf/config.hpp>
#include <dsurf/geometry.hpp>

#include <fstream>

namespace dsurf {

ObjectReader::ObjectReader(const nlohmann::json& j, std::string where)
    : m_json(j)
    , m_where(std::move(where))
{
    if (!m_json.is_object()) fail(ErrorKind::Config, m_where + ": expected a JSON object");
}

bool ObjectReader::read(const char* key, Vec3& out)
{
    std::vector<double> v;
    if (!read(key, v)) return false;
    if (v.size() != 3) fail(ErrorKind::Config, m_where + "." + key + ": expected 3 numbers");
    out = Vec3(v[0], v[1], v[2]);
    return true;
}

bool ObjectReader::read(const char* key, std::array<int, 3>& out)
{
    std::vector<int> v;
    if (!read(key, v)) return false;
    if (v.size() != 3) fail(ErrorKind::Config, m_where + "." + key + ": expected 3 integers");
    out = {v[0], v[1], v[2]};
    return true;
}

std::optional<ObjectReader> ObjectReader::object(const char* key)
{
    m_seen.insert(key);
    if (!m_json.contains(key) || m_json.at(key).is_null()) return std::nullopt;
    return ObjectReader(m_json.at(key), m_where + "." + key);
}

void ObjectReader::finish() const
{
    for (const auto& item : m_json.items()) {
        if (!m_seen.count(item.key())) fail(ErrorKind::Config, m_where + ": unknown key '" + item.key() + "'");
    }
}

std::string to_string(IntegrationMethod m)
{
    return m == IntegrationMethod::ForwardEuler ? "forward-euler" : "scaling-squaring";
}

IntegrationMethod parse_integration_method(const std::string& s)
{
    if (s == "scaling-squaring") return IntegrationMethod::ScalingSquaring;
    if (s == "forward-euler") return IntegrationMethod::ForwardEuler;
    fail(ErrorKind::Config, "unknown integration method '" + s + "' (scaling-squaring|forward-euler)");
}

namespace {

std::string to_string(InflationMode m)
{
    return m == InflationMode::VeryInflated ? "very-inflated" : "inflated";
}

std::string synthetic_name(SyntheticKind k)
{
    switch (k) {
    case SyntheticKind::Sphere: return "sphere";
    case SyntheticKind::Ellipsoid: return "ellipsoid";
    case SyntheticKind::BumpySphere: return "bumpy_sphere";
    }
    return "sphere";
}

nlohmann::json vec(const Vec3& v)
{
    return nlohmann::json::array({v.x(), v.y(), v.z()});
}

/// Argument errors raised by validators surface as config errors.
template <typename F>
void as_config(F&& f)
{
    try {
        f();
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::Argument) fail(ErrorKind::Config, e.message());
        throw;
    }
}

} // namespace

void parse_section(ObjectReader& r, IntegrationConfig& c)
{
    r.read("steps_K", c.steps_K);
    r.read("sigma_mm", c.smoothing_sigma);
    std::string method;
    if (r.read("method", method)) c.method = parse_integration_method(method);
    as_config([&] { c.validate(); });
}

void parse_section(ObjectReader& r, LossWeights& c)
{
    r.read("lambda_edge", c.lambda_edge);
    r.read("lambda_nc", c.lambda_nc);
    as_config([&] { c.validate(); });
}

void parse_section(ObjectReader& r, FitConfig& c)
{
    r.read("iterations", c.iterations);
    r.read("step_size", c.step_size);
    r.read("beta1", c.beta1);
    r.read("beta2", c.beta2);
    r.read("epsilon", c.epsilon);
    r.read("tolerance", c.tolerance);
    r.read("patience", c.patience);
    r.read("target_points", c.target_points);
    as_config([&] { c.validate(); });
}

void parse_section(ObjectReader& r, TaubinParams& c)
{
    r.read("lambda", c.lambda_step);
    r.read("mu", c.mu_step);
    r.read("iterations", c.iterations);
    if (!(c.lambda_step > 0.0 && c.mu_step < 0.0 && -c.mu_step > c.lambda_step) || c.iterations < 0) {
        fail(ErrorKind::Config, r.where() + ": Taubin needs lambda > 0 > mu, |mu| > lambda, iterations >= 0");
    }
}

void parse_section(ObjectReader& r, InflationConfig& c)
{
    std::string mode;
    if (r.read("mode", mode)) {
        if (mode == "inflated") {
            c.mode = InflationMode::Inflated;
        } else if (mode == "very-inflated") {
            c.mode = InflationMode::VeryInflated;
        } else {
            fail(ErrorKind::Config, r.where() + ".mode: expected inflated|very-inflated");
        }
    }
    r.read("iterations", c.iterations);
    r.read("smoothing_weight", c.smoothing_weight);
    r.read("diffusion_scale", c.diffusion_scale);
    as_config([&] { c.validate(); });
}

void parse_section(ObjectReader& r, ProjectionConfig& c)
{
    r.read("lambda_e", c.lambda_e);
    r.read("lambda_a", c.lambda_a);
    r.read("iterations", c.iterations);
    r.read("step_size", c.step_size);
    r.read("smoothing_passes", c.smoothing_passes);
    r.read("tolerance", c.tolerance);
    as_config([&] { c.validate(); });
}

void parse_section(ObjectReader& r, GridSpec& c)
{
    r.read("dims", c.dims);
    Vec3 v;
    if (r.read("spacing_mm", v)) c.spacing = v;
    if (r.read("origin_mm", v)) c.origin = v;
    r.read("margin_mm", c.margin_mm);
    if (c.spacing.has_value() != c.origin.has_value()) {
        fail(ErrorKind::Config, r.where() + ": spacing_mm and origin_mm must be given together");
    }
    for (int d : c.dims) {
        if (d < 2) fail(ErrorKind::Config, r.where() + ".dims: every axis needs at least 2 voxels");
    }
    if (!(c.margin_mm >= 0.0)) fail(ErrorKind::Config, r.where() + ".margin_mm must be >= 0");
}

void parse_section(ObjectReader& r, SyntheticSpec& c)
{
    std::string kind;
    if (r.read("kind", kind)) as_config([&] { c.params.kind = parse_synthetic_kind(kind); });
    r.read("level", c.params.level);
    r.read("radius", c.params.radius);
    r.read("axes", c.params.axes);
    r.read("amplitude", c.params.amplitude);
    r.read("lobes", c.params.lobes);
    r.read("pial_scale", c.pial_scale);
    if (!(c.pial_scale > 1.0)) fail(ErrorKind::Config, r.where() + ".pial_scale must be > 1");
    if (c.params.level < 0 || c.params.level > 8) fail(ErrorKind::Config, r.where() + ".level must be in [0, 8]");
}

GridGeometry GridSpec::resolve(std::span<const Vec3> points) const
{
    GridGeometry g;
    g.dims = dims;
    if (spacing) {
        g.spacing = *spacing;
        g.origin = *origin;
    } else {
        if (points.empty()) fail(ErrorKind::Config, "grid: no surfaces to fit an automatic grid to");
        const auto box = bounding_box(points);
        const Vec3 lo = box.min.array() - margin_mm;
        const Vec3 hi = box.max.array() + margin_mm;
        double h = 0.0;
        for (int a = 0; a < 3; ++a) h = std::max(h, (hi[a] - lo[a]) / (dims[a] - 1));
        g.spacing = Vec3::Constant(h);
        for (int a = 0; a < 3; ++a) g.origin[a] = 0.5 * (lo[a] + hi[a]) - 0.5 * h * (dims[a] - 1);
    }
    as_config([&] { g.validate(); });
    return g;
}

IntegrationConfig PipelineConfig::resolved_integration(const GridGeometry& full) const
{
    IntegrationConfig c = integration;
    if (!sigma_explicit) c.smoothing_sigma = full.spacing.minCoeff();
    return c;
}

void PipelineConfig::validate() const
{
    if (template_level < 0 || template_level > 8) fail(ErrorKind::Config, "template_level must be in [0, 8]");
    if (resample_level < 0 || resample_level > 8) fail(ErrorKind::Config, "resample_level must be in [0, 8]");
    if (levels < 1 || levels > 8) fail(ErrorKind::Config, "deformation.levels must be in [1, 8]");
    if (wm_target.has_value() != pial_target.has_value()) {
        fail(ErrorKind::Config, "inputs: wm_target and pial_target must be given together");
    }
    as_config([&] {
        integration.validate();
        loss.validate();
        optimizer.validate();
        inflation.validate();
        projection.validate();
    });
}

PipelineConfig parse_pipeline_config(const nlohmann::json& j, const std::filesystem::path& base_dir)
{
    PipelineConfig c;
    ObjectReader root(j, "config");
    root.read("seed", c.seed);
    root.read("template_level", c.template_level);
    root.read("resample_level", c.resample_level);
    auto path = [&](const std::string& s) {
        std::filesystem::path p(s);
        return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
    };
    if (auto in = root.object("inputs")) {
        std::string s;
        if (in->read("template", s)) c.template_mesh = path(s);
        if (in->read("wm_target", s)) c.wm_target = path(s);
        if (in->read("pial_target", s)) c.pial_target = path(s);
        if (in->read("volume", s)) c.volume = path(s);
        if (in->read("ribbon_mask", s)) c.ribbon_mask = path(s);
        in->finish();
    }
    if (auto s = root.object("synthetic")) {
        parse_section(*s, c.synthetic);
        s->finish();
    }
    if (auto s = root.object("grid")) {
        parse_section(*s, c.grid);
        s->finish();
    }
    if (auto s = root.object("deformation")) {
        s->read("levels", c.levels);
        c.sigma_explicit = s->has("sigma_mm") && !s->has_null("sigma_mm");
        parse_section(*s, c.integration);
        s->finish();
    }
    if (auto s = root.object("loss")) {
        parse_section(*s, c.loss);
        s->finish();
    }
    if (auto s = root.object("optimizer")) {
        parse_section(*s, c.optimizer);
        s->finish();
    }
    if (auto s = root.object("taubin")) {
        parse_section(*s, c.taubin);
        s->finish();
    }
    if (auto s = root.object("inflation")) {
        parse_section(*s, c.inflation);
        s->finish();
    }
    if (auto s = root.object("projection")) {
        parse_section(*s, c.projection);
        s->finish();
    }
    root.finish();
    c.validate();
    return c;
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) fail(ErrorKind::Io, "cannot open config " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::Config, path.string() + ": " + e.what());
    }
    return parse_pipeline_config(j, path.parent_path());
}

nlohmann::json to_json(const PipelineConfig& c)
{
    nlohmann::json j;
    j["seed"] = c.seed;
    j["template_level"] = c.template_level;
    j["resample_level"] = c.resample_level;
    nlohmann::json in = nlohmann::json::object();
    auto put = [&](const char* key, const std::optional<std::filesystem::path>& p) {
        if (p) in[key] = p->generic_string();
    };
    put("template", c.template_mesh);
    put("wm_target", c.wm_target);
    put("pial_target", c.pial_target);
    put("volume", c.volume);
    put("ribbon_mask", c.ribbon_mask);
    j["inputs"] = in;
    j["synthetic"] = {{"kind", synthetic_name(c.synthetic.params.kind)},
                      {"level", c.synthetic.params.level},
                      {"radius", c.synthetic.params.radius},
                      {"axes", vec(c.synthetic.params.axes)},
                      {"amplitude", c.synthetic.params.amplitude},
                      {"lobes", c.synthetic.params.lobes},
                      {"pial_scale", c.synthetic.pial_scale}};
    nlohmann::json grid = {{"dims", c.grid.dims}, {"margin_mm", c.grid.margin_mm}};
    if (c.grid.spacing) {
        grid["spacing_mm"] = vec(*c.grid.spacing);
        grid["origin_mm"] = vec(*c.grid.origin);
    }
    j["grid"] = grid;
    j["deformation"] = {{"levels", c.levels},
                        {"steps_K", c.integration.steps_K},
                        {"sigma_mm", c.sigma_explicit ? nlohmann::json(c.integration.smoothing_sigma) : nlohmann::json()},
                        {"method", to_string(c.integration.method)}};
    j["loss"] = {{"lambda_edge", c.loss.lambda_edge}, {"lambda_nc", c.loss.lambda_nc}};
    j["optimizer"] = {{"iterations", c.optimizer.iterations}, {"step_size", c.optimizer.step_size},
                      {"beta1", c.optimizer.beta1},           {"beta2", c.optimizer.beta2},
                      {"epsilon", c.optimizer.epsilon},       {"tolerance", c.optimizer.tolerance},
                      {"patience", c.optimizer.patience},     {"target_points", c.optimizer.target_points}};
    j["taubin"] = {{"lambda", c.taubin.lambda_step}, {"mu", c.taubin.mu_step}, {"iterations", c.taubin.iterations}};
    j["inflation"] = {{"mode", to_string(c.inflation.mode)},
                      {"iterations", c.inflation.iterations},
                      {"smoothing_weight", c.inflation.smoothing_weight},
                      {"diffusion_scale", c.inflation.diffusion_scale}};
    j["projection"] = {{"lambda_e", c.projection.lambda_e},
                       {"lambda_a", c.projection.lambda_a},
                       {"iterations", c.projection.iterations},
                       {"step_size", c.projection.step_size},
                       {"smoothing_passes", c.projection.smoothing_passes},
                       {"tolerance", c.projection.tolerance}};
    return j;
}

} // namespace dsurf
