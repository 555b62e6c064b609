#include "fixtures.hpp"

#include <dsurf/config.hpp>
#include <dsurf/mesh_io.hpp>
#include <dsurf/parallel.hpp>
#include <dsurf/pipeline.hpp>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sys/wait.h>

using namespace dsurf;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path p = fs::temp_directory_path() / ("dsurf_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

nlohmann::json read_json(const fs::path& p)
{
    std::ifstream in(p);
    nlohmann::json j;
    in >> j;
    return j;
}

void write_text(const fs::path& p, const std::string& s)
{
    std::ofstream out(p);
    out << s;
}

/// Small pipeline: level-3 ellipsoid targets, 16^3 grid, short optimizations.
PipelineConfig smoke_config()
{
    PipelineConfig c;
    c.synthetic.params.level = 3;
    c.optimizer.iterations = 20;
    c.inflation.iterations = 20;
    c.projection.iterations = 20;
    c.resample_level = 3;
    return c;
}

int run_cli(const std::string& args)
{
    const std::string cmd = std::string(DSURF_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("synthetic generators")
{
    SyntheticParams p;
    p.level = 3;
    const auto sphere = gen_synthetic(p, 1).surface;
    CHECK(sphere.num_vertices() == 642);
    CHECK(euler_characteristic(sphere) == 2);

    p.kind = SyntheticKind::Ellipsoid;
    p.axes = Vec3(1.0, 0.8, 1.2);
    const auto box = bounding_box(gen_synthetic(p, 1).surface.vertices());
    CHECK((box.max - Vec3(1.0, 0.8, 1.2)).lpNorm<Eigen::Infinity>() <= 1e-9);
    CHECK((box.min + Vec3(1.0, 0.8, 1.2)).lpNorm<Eigen::Infinity>() <= 1e-9);

    p.kind = SyntheticKind::BumpySphere;
    CHECK(gen_synthetic(p, 42).surface.vertices() == gen_synthetic(p, 42).surface.vertices());
    CHECK(gen_synthetic(p, 42).surface.vertices() != gen_synthetic(p, 43).surface.vertices());

    p.inner_scale = 0.8;
    const auto pair = gen_synthetic(p, 42);
    REQUIRE(pair.inner);
    CHECK(pair.inner->same_connectivity(pair.surface));

    SyntheticParams bad;
    bad.kind = SyntheticKind::Ellipsoid;
    bad.axes = Vec3(1.0, -1.0, 1.0);
    CHECK_THROWS_AS(gen_synthetic(bad, 0), Error);
    bad = SyntheticParams{};
    bad.kind = SyntheticKind::BumpySphere;
    bad.amplitude = 1.0;
    CHECK_THROWS_AS(gen_synthetic(bad, 0), Error);
    CHECK_THROWS_AS(parse_synthetic_kind("torus"), Error);
}

TEST_CASE("pipeline config parsing")
{
    SUBCASE("defaults carry the published weights")
    {
        const auto c = parse_pipeline_config(nlohmann::json::object());
        CHECK(c.loss.lambda_edge == 0.3);
        CHECK(c.loss.lambda_nc == 3.0);
        CHECK(c.projection.lambda_e == 1.0);
        CHECK(c.projection.lambda_a == 0.5);
        CHECK(c.integration.steps_K == 7);
        CHECK_FALSE(c.sigma_explicit);
    }
    SUBCASE("unknown keys are rejected at any depth")
    {
        for (const char* text : {R"({"sed": 1})", R"({"loss": {"lambda_edge": 0.3, "lamda_nc": 1}})",
                                 R"({"grid": {"dims": [16, 16, 16], "extra": true}})"}) {
            try {
                parse_pipeline_config(nlohmann::json::parse(text));
                FAIL("expected an error");
            } catch (const Error& e) {
                CHECK(e.kind() == ErrorKind::Config);
            }
        }
    }
    SUBCASE("ill-typed and out-of-range values are config errors")
    {
        for (const char* text : {R"({"seed": "x"})", R"({"deformation": {"steps_K": 40}})",
                                 R"({"optimizer": {"iterations": 0}})", R"({"inflation": {"mode": "flat"}})"}) {
            try {
                parse_pipeline_config(nlohmann::json::parse(text));
                FAIL("expected an error");
            } catch (const Error& e) {
                CHECK(e.kind() == ErrorKind::Config);
            }
        }
    }
    SUBCASE("canonical form round-trips")
    {
        auto c = parse_pipeline_config(nlohmann::json::parse(R"({"seed": 7, "deformation": {"sigma_mm": 0.5}})"));
        CHECK(c.sigma_explicit);
        const auto j = to_json(c);
        const auto back = parse_pipeline_config(j);
        CHECK(to_json(back) == j);
        CHECK(back.seed == 7);
        CHECK(back.integration.smoothing_sigma == 0.5);
    }
    SUBCASE("sigma defaults to one voxel of the resolved grid")
    {
        const auto c = parse_pipeline_config(nlohmann::json::object());
        const auto g = fixtures::cube_grid(16, 1.5);
        CHECK(c.resolved_integration(g).smoothing_sigma == g.spacing.minCoeff());
    }
}

TEST_CASE("pipeline end to end")
{
    set_thread_count(1);
    const auto a = scratch("pipeline_a"), b = scratch("pipeline_b");
    const auto cfg = smoke_config();
    const auto ra = run_pipeline(cfg, a);
    const auto rb = run_pipeline(cfg, b);
    const auto m = read_json(a / "manifest.json");
    CHECK(m["status"] == "OK");
    REQUIRE(m["stages"].size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(m["stages"][i]["name"] == pipeline_stages[i]);
        CHECK(m["stages"][i]["status"] == "OK");
        CHECK(m["stages"][i]["wall_seconds"].get<double>() >= 0.0);
    }
    CHECK(m["config_sha256"].get<std::string>().size() == 64);
    CHECK(m["inputs"].size() == 2);
    SUBCASE("identical reruns give identical hashes")
    {
        CHECK(ra.output_hashes == rb.output_hashes);
        CHECK(ra.output_hashes.size() > 20);
    }
    SUBCASE("every emitted file is listed with its hash")
    {
        for (const auto& e : fs::recursive_directory_iterator(a)) {
            if (!e.is_regular_file() || e.path().filename() == "manifest.json") continue;
            const auto rel = fs::relative(e.path(), a).generic_string();
            CHECK_MESSAGE(ra.output_hashes.count(rel) == 1, rel);
        }
    }
    SUBCASE("stage outputs are well formed")
    {
        const auto wm = io::read_mesh(a / "fit" / "wm.obj");
        CHECK(euler_characteristic(wm) == 2);
        const auto topo = read_json(a / "fit" / "topology.json");
        CHECK(topo["wm"]["count"] == 0);
        const auto dist = read_json(a / "project" / "distortion.json");
        CHECK(dist["inverted_faces"] == 0);
        CHECK(dist["weighted_final"].get<double>() <= dist["weighted_initial"].get<double>());
        CHECK(io::read_scalars(a / "features" / "thickness.csv").size() == wm.num_vertices());
    }
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("failed stage leaves a FAILED manifest")
{
    set_thread_count(1);
    const auto dir = scratch("pipeline_fail");
    auto cfg = smoke_config();
    write_text(dir / "broken_volume.json", "{not json");
    cfg.volume = dir / "broken_volume.json";
    const auto out = dir / "run";
    try {
        run_pipeline(cfg, out);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("features") != std::string::npos);
    }
    const auto m = read_json(out / "manifest.json");
    CHECK(m["status"] == "FAILED");
    CHECK(m["failed_stage"] == "features");
    CHECK(m["stages"].size() == 4);
    CHECK(m["stages"][3]["status"] == "FAILED");
    CHECK(fs::exists(out / "fit" / "wm.obj"));
    fs::remove_all(dir);
}

TEST_CASE("cli exit codes")
{
    const auto dir = scratch("cli");
    const std::string out = " --out " + (dir / "gen").string();
    CHECK(run_cli("gen --kind sphere --level 3" + out) == 0);
    CHECK(io::read_mesh(dir / "gen" / "surface.obj").num_vertices() == 642);
    CHECK(run_cli("sif --surface " + (dir / "gen" / "surface.obj").string() + out) == 0);
    write_text(dir / "bad.json", R"({"unknown_key": 1})");
    CHECK(run_cli("gen --config " + (dir / "bad.json").string() + out) == 2);
    CHECK(run_cli("gen --kind torus" + out) == 2);
    CHECK(run_cli("no-such-command") == 2);
    CHECK(run_cli("sif --surface " + (dir / "missing.obj").string() + out) == 4);
    CHECK(run_cli("--help") == 0);
    fs::remove_all(dir);
}
