#include <cstdlib>
#include <doctest.h>
#include <fstream>
#include <iterator>
#include <json.hpp>
#include <string>
#include <sys/wait.h>

#include "ssf/io.hpp"
#include "ssf/geometry.hpp"
#include "test_support.hpp"

using ssf::testing::TempDir;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int code = -1;
    std::string output; ///< combined stdout + stderr
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

CliResult run_cli(const std::string& args, const fs::path& scratch) {
    const fs::path log = scratch / "cli_output.txt";
    const std::string cmd =
        std::string(SSF_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    CliResult result;
    result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.output = slurp(log);
    return result;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

fs::path make_scene(const TempDir& tmp, unsigned seed) {
    // A short 4.5 mm baseline puts the plane ~0.5 m away, matching the
    // default 0.02 m isolation radius (these runs use the stock config).
    return ssf::testing::write_plane_scene(tmp / "scene", 100, 80, 1, 6.0, 0.02, 0.0,
                                           800.0, 0.0045, seed)
        .dir;
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("selftest exits cleanly") {
    TempDir tmp("cli_selftest");
    const CliResult result = run_cli("selftest", tmp.path());
    CHECK(result.code == 0);
    CHECK(result.output.find("selftest passed") != std::string::npos);
}

TEST_CASE("annotate exits 0 on acceptance and 2 on density rejection") {
    TempDir tmp("cli_annotate");
    const fs::path scene = make_scene(tmp, 501);

    const CliResult ok = run_cli("annotate " + scene.string() + " " +
                                     (tmp / "out").string(),
                                 tmp.path());
    CHECK(ok.code == 0);
    CHECK(ok.output.find("accepted") != std::string::npos);
    CHECK(fs::is_regular_file(tmp / "out" / "disparity.pfm"));

    write_text(tmp / "strict.json", R"({"supervision": {"min_density": 1.0}})");
    const CliResult rejected =
        run_cli("--config " + (tmp / "strict.json").string() + " annotate " +
                    scene.string() + " " + (tmp / "out2").string(),
                tmp.path());
    CHECK(rejected.code == 2);
    CHECK(rejected.output.find("rejected") != std::string::npos);
}

TEST_CASE("annotate is deterministic across job counts") {
    TempDir tmp("cli_jobs");
    const fs::path scene = make_scene(tmp, 503);
    const CliResult one = run_cli(
        "annotate " + scene.string() + " " + (tmp / "j1").string() + " --jobs 1",
        tmp.path());
    const CliResult three = run_cli(
        "annotate " + scene.string() + " " + (tmp / "j3").string() + " --jobs 3",
        tmp.path());
    CHECK(one.code == 0);
    CHECK(three.code == 0);
    const std::string a = slurp(tmp / "j1" / "disparity.pfm");
    const std::string b = slurp(tmp / "j3" / "disparity.pfm");
    REQUIRE_FALSE(a.empty());
    CHECK(a == b);
}

TEST_CASE("subpixel and mode flags reach the pipeline") {
    TempDir tmp("cli_flags");
    const fs::path scene = make_scene(tmp, 505);
    const CliResult result = run_cli("annotate " + scene.string() + " " +
                                         (tmp / "out").string() + " --subpixel literal",
                                     tmp.path());
    CHECK(result.code == 0);
    std::ifstream in(tmp / "out" / "manifest.json");
    const nlohmann::json manifest = nlohmann::json::parse(in);
    CHECK(manifest.at("parameters").at("subpixel").get<std::string>() == "literal");
}

TEST_CASE("eval prints the aligned metric table") {
    TempDir tmp("cli_eval");
    ssf::DisparityMap map = ssf::DisparityMap::create(20, 15);
    for (int y = 0; y < 15; ++y)
        for (int x = 0; x < 20; ++x)
            map.set(x, y, 5.0 + 0.1 * x);
    ssf::write_disparity(map, tmp / "pred.pfm", ssf::DisparityFormat::FloatMap);
    ssf::write_disparity(map, tmp / "gt.pfm", ssf::DisparityFormat::FloatMap);
    ssf::RectificationSetup setup;
    setup.baseline = 0.1;
    setup.focal = 800.0;
    setup.scale_ratio = 2.0;
    ssf::save_rectification(setup, tmp / "setup.json");

    const CliResult result =
        run_cli("eval " + (tmp / "pred.pfm").string() + " " + (tmp / "gt.pfm").string() +
                    " " + (tmp / "setup.json").string() + " " + (tmp / "rep").string(),
                tmp.path());
    CHECK(result.code == 0);
    CHECK(result.output.find("D-AEPE") != std::string::npos);
    CHECK(result.output.find("bad_3") != std::string::npos);
    CHECK(fs::is_regular_file(tmp / "rep" / "report.json"));
    CHECK(fs::is_regular_file(tmp / "rep" / "report.txt"));

    // A custom tolerance list changes the reported columns.
    const CliResult custom =
        run_cli("eval " + (tmp / "pred.pfm").string() + " " + (tmp / "gt.pfm").string() +
                    " " + (tmp / "setup.json").string() + " " + (tmp / "rep2").string() +
                    " --taus 0.5,1.5",
                tmp.path());
    CHECK(custom.code == 0);
    CHECK(custom.output.find("bad_0.5") != std::string::npos);
    CHECK(custom.output.find("bad_1.5") != std::string::npos);
}

TEST_CASE("proxy batches are reproducible run to run") {
    TempDir tmp("cli_proxy");
    const ssf::testing::ProxyFixture fixture =
        ssf::testing::make_proxy_fixture(100, 80, 2, 0.0, 507);
    const fs::path scene = tmp / "dataset" / "scene0";
    fs::create_directories(scene);
    ssf::write_image(fixture.rgb, scene / "rgb.png");
    ssf::write_band_stack(fixture.ms, scene / "ms.json");
    write_text(scene / "proxy.json",
               R"({"rgb": "rgb.png", "rgb_layout": "color", "ms": "ms.json"})");

    // The 50x40 multi-spectral frame needs a matching range and density
    // floor sized for it; the stock 64-level range would eat half the width.
    write_text(tmp / "proxy_config.json",
               R"({"matching": {"d_max": 16}, "supervision": {"min_density": 0.3}})");
    const std::string config = " --config " + (tmp / "proxy_config.json").string();

    const std::string dataset = (tmp / "dataset").string();
    const CliResult first =
        run_cli("proxy " + dataset + " " + (tmp / "outA").string() + config, tmp.path());
    CHECK(first.code == 0);
    CHECK(first.output.find("scene0") != std::string::npos);
    const CliResult second =
        run_cli("proxy " + dataset + " " + (tmp / "outB").string() + config, tmp.path());
    CHECK(second.code == 0);
    const std::string a = slurp(tmp / "outA" / "scene0" / "proxy.pfm");
    const std::string b = slurp(tmp / "outB" / "scene0" / "proxy.pfm");
    REQUIRE_FALSE(a.empty());
    CHECK(a == b);

    // With an unreachable density floor no scene is delivered: exit code 2.
    write_text(tmp / "strict.json", R"({"supervision": {"min_density": 1.0}})");
    const CliResult rejected =
        run_cli("--config " + (tmp / "strict.json").string() + " proxy " + dataset +
                    " " + (tmp / "outC").string(),
                tmp.path());
    CHECK(rejected.code == 2);
}

TEST_CASE("register writes the sidecar from the command line") {
    TempDir tmp("cli_register");
    std::mt19937 rng(509);
    ssf::MultiBandImage ms = ssf::MultiBandImage::create(30, 20, 10);
    std::uniform_real_distribution<float> value(0.0f, 255.0f);
    for (float& v : ms.data)
        v = std::floor(value(rng));
    ssf::write_band_stack(ms, tmp / "ms.json");
    ssf::DisparityMap disp = ssf::DisparityMap::create(30, 20);
    for (int y = 0; y < 20; ++y)
        for (int x = 0; x < 30; ++x)
            disp.set(x, y, 2.0);
    ssf::write_disparity(disp, tmp / "disp.pfm", ssf::DisparityFormat::FloatMap);
    ssf::RectificationSetup setup;
    setup.baseline = 0.1;
    setup.focal = 800.0;
    setup.scale_ratio = 1.0;
    ssf::save_rectification(setup, tmp / "setup.json");

    const CliResult result =
        run_cli("register " + (tmp / "ms.json").string() + " " +
                    (tmp / "disp.pfm").string() + " " + (tmp / "setup.json").string() +
                    " " + (tmp / "aligned.json").string(),
                tmp.path());
    CHECK(result.code == 0);
    CHECK(fs::is_regular_file(tmp / "aligned.json"));
}

TEST_CASE("input problems exit with code 3") {
    TempDir tmp("cli_errors");
    const CliResult missing =
        run_cli("annotate " + (tmp / "nope").string() + " " + (tmp / "out").string(),
                tmp.path());
    CHECK(missing.code == 3);
    CHECK(missing.output.find("ssf: error:") != std::string::npos);

    const CliResult unknown_flag = run_cli("selftest --frobnicate", tmp.path());
    CHECK(unknown_flag.code == 3);

    const CliResult bad_taus =
        run_cli("--taus 1,x eval a b c d", tmp.path());
    CHECK(bad_taus.code == 3);

    const CliResult no_subcommand = run_cli("", tmp.path());
    CHECK(no_subcommand.code == 3);

    const CliResult bad_mode = run_cli("--mode sideways annotate a b", tmp.path());
    CHECK(bad_mode.code == 3);
    const CliResult bad_subpixel = run_cli("--subpixel cubic annotate a b", tmp.path());
    CHECK(bad_subpixel.code == 3);
}

} // TEST_SUITE
