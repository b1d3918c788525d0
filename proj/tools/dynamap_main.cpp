#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dynamap/errors.hpp"
#include "dynamap/pipeline.hpp"
#include "dynamap/strutil.hpp"

using namespace dynamap;

int main(int argc, char** argv) {
    CLI::App app{"time-of-day car accessibility: routing, fields, cartograms, map frames"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_override, weekday_override, direction_override;
    std::vector<std::string> mode_override;
    double beta_override = 0.0, fps_override = 0.0;
    long long seed_override = 0;
    int workers_override = 0;
    bool cube_csv_flag = false;

    app.add_option("-c,--config", config_path, "run configuration file (key = value lines)")->required();
    auto* opt_out = app.add_option("--out", out_override, "output directory override");
    auto* opt_beta = app.add_option("--beta", beta_override, "decay parameter per minute (< 0)");
    auto* opt_seed = app.add_option("--seed", seed_override, "random seed override");
    auto* opt_workers = app.add_option("--workers", workers_override, "worker thread count (0 = hardware)");
    auto* opt_weekday = app.add_option("--weekday", weekday_override, "weekday override (Mon..Sun)");
    auto* opt_fps = app.add_option("--fps", fps_override, "animation scenarios per second");
    auto* opt_mode = app.add_option("--mode", mode_override, "renderer selection (choropleth|extrusion|cartogram)");
    auto* opt_direction = app.add_option("--direction", direction_override, "cartogram direction (from|to|both)");
    auto* opt_cube_csv = app.add_flag("--cube-csv", cube_csv_flag, "also export the cube as CSV");

    CLI::App* sub_synth = app.add_subcommand("synth", "generate a synthetic dataset");
    CLI::App* sub_matrix = app.add_subcommand("matrix", "build the travel-time cube");
    CLI::App* sub_access = app.add_subcommand("access", "evaluate the accessibility field");
    CLI::App* sub_carto = app.add_subcommand("cartogram", "distort layers and report areas");
    CLI::App* sub_render = app.add_subcommand("render", "emit map frames and the animation manifest");
    CLI::App* sub_stats = app.add_subcommand("stats", "print network statistics");
    CLI::App* sub_all = app.add_subcommand("all", "matrix, access, cartogram and render in order");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        std::fprintf(stderr, "ERROR: %s\n", e.what());
        return 1;
    }

    try {
        RunConfig cfg = load_config(config_path);
        if (const char* env = std::getenv("DYNAMAP_OUT_DIR"); env != nullptr && *env != '\0')
            cfg.out_dir = env;  // env var overrides the config, flags beat both
        if (opt_out->count() > 0) cfg.out_dir = out_override;
        if (opt_beta->count() > 0) apply_config_entry(cfg, "beta", strprintf("%.17g", beta_override));
        if (opt_seed->count() > 0) apply_config_entry(cfg, "seed", std::to_string(seed_override));
        if (opt_workers->count() > 0) apply_config_entry(cfg, "workers", std::to_string(workers_override));
        if (opt_weekday->count() > 0) apply_config_entry(cfg, "weekday", weekday_override);
        if (opt_fps->count() > 0) apply_config_entry(cfg, "fps", strprintf("%.17g", fps_override));
        if (opt_direction->count() > 0) apply_config_entry(cfg, "carto_direction", direction_override);
        if (opt_mode->count() > 0) {
            std::string joined;
            for (const std::string& m : mode_override) joined += (joined.empty() ? "" : ",") + m;
            apply_config_entry(cfg, "render_modes", joined);
        }
        if (opt_cube_csv->count() > 0) cfg.cube_csv = true;
        validate_config(cfg);

        if (sub_synth->parsed()) cmd_synth(cfg);
        else if (sub_matrix->parsed()) cmd_matrix(cfg);
        else if (sub_access->parsed()) cmd_access(cfg);
        else if (sub_carto->parsed()) cmd_cartogram(cfg);
        else if (sub_render->parsed()) cmd_render(cfg);
        else if (sub_stats->parsed()) cmd_stats(cfg);
        else if (sub_all->parsed()) cmd_all(cfg);
        return 0;
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "ERROR: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "ERROR: %s\n", e.what());
        return 2;
    }
}
