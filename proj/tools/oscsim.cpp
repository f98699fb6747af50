#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "oscsim/config.hpp"
#include "oscsim/csv.hpp"
#include "oscsim/plot.hpp"
#include "oscsim/scenario.hpp"

namespace fs = std::filesystem;
using namespace oscsim;

namespace
{
struct Overrides
{
    std::vector<std::string> snapshots;
    std::optional<int> order_cap;
    std::optional<double> rtol;
    std::optional<double> atol;
};

ScenarioConfig load(std::string const& path, Overrides const& o)
{
    ScenarioConfig cfg = load_config(path);
    if (!o.snapshots.empty())
    {
        cfg.output.snapshots.clear();
        for (std::size_t k = 0; k < o.snapshots.size(); ++k)
            cfg.output.snapshots.push_back(
                parse_quantity(o.snapshots[k], "time", "--snapshots[" + std::to_string(k) + "]"));
    }
    if (o.order_cap)
        cfg.integrator.order_cap = *o.order_cap;
    if (o.rtol)
        cfg.integrator.rtol = *o.rtol;
    if (o.atol)
        cfg.atol_scale = *o.atol;
    cfg.validate();
    return cfg;
}

void print_summary(TransientRecord const& r)
{
    std::printf("%s: J = %.6g A/m^2 (steps %ld, rejected %ld)\n", r.name.c_str(), r.steady_current(), r.steps,
                r.rejections);
    if (r.mode == RunMode::steady)
        return;
    try
    {
        auto const rise = extract_rise_time(r.t, r.J);
        std::printf("  t10 = %.4g s, t50 = %.4g s, t90 = %.4g s, rise = %.4g s\n", rise.t10, rise.t50, rise.t90,
                    rise.rise_time());
    }
    catch (std::exception const& e)
    {
        std::printf("  rise time unavailable: %s\n", e.what());
    }
}

std::string label_for(fs::path const& p)
{
    auto const parent = p.parent_path().filename().string();
    return parent.empty() ? p.stem().string() : parent + "/" + p.stem().string();
}

int plot_files(std::vector<std::string> const& files, std::string style_name, fs::path const& output)
{
    std::vector<PlotSeries> series;
    std::string detected;
    for (auto const& f : files)
    {
        CsvTable const t = read_csv(f);
        std::string kind;
        if (t.header.size() >= 2 && t.header[0] == "t_s")
            kind = "transient";
        else if (!t.header.empty() && t.header[0] == "x_m")
            kind = "fields";
        else
            throw std::runtime_error(f + ": unrecognised CSV header");
        if (!detected.empty() && detected != kind)
            throw std::runtime_error("cannot overlay transient and field files");
        detected = kind;

        if (kind == "transient")
        {
            auto const tc = t.column("t_s");
            for (std::size_t c = 1; c < t.header.size(); ++c)
            {
                PlotSeries s;
                s.label = t.header.size() > 2 ? label_for(f) + ":" + t.header[c] : label_for(f);
                s.x = tc;
                s.y = t.column(t.header[c]);
                series.push_back(std::move(s));
            }
        }
        else
        {
            PlotSeries s;
            s.label = label_for(f);
            s.x = t.column("x_m");
            bool const density = style_name == "density";
            s.y = t.column(density ? "n_per_m3" : "E_V_per_m");
            series.push_back(std::move(s));
        }
    }
    PlotStyle style;
    if (style_name == "auto")
        style_name = detected == "transient" ? "transient" : "field";
    if (style_name == "transient")
        style = transient_style();
    else if (style_name == "field")
        style = field_style();
    else if (style_name == "density")
        style = density_style();
    else
        throw std::runtime_error("unknown plot style " + style_name);
    write_text(output, render_svg(series, style));
    std::printf("wrote %s\n", output.string().c_str());
    return 0;
}
}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Transient and stationary photocurrent simulator for organic solar cells"};
    app.require_subcommand(1);

    std::string out_dir = "out";
    Overrides over;
    bool seed_free = false;
    app.add_option("--out-dir", out_dir, "Directory for CSV and SVG output");
    app.add_option("--snapshots", over.snapshots, "Times with units for field snapshots, e.g. 1e-6s")
        ->delimiter(',');
    app.add_option("--order-cap", over.order_cap, "Maximum BDF order")->check(CLI::Range(1, 5));
    app.add_option("--rtol", over.rtol, "Integrator relative tolerance");
    app.add_option("--atol", over.atol, "Absolute tolerance as a fraction of each variable scale");
    app.add_flag("--seed-free", seed_free, "Assert that the run uses no random numbers");

    std::string config_path;
    auto* run_cmd = app.add_subcommand("run", "Run the scenario in its configured mode");
    run_cmd->add_option("config", config_path)->required()->check(CLI::ExistingFile);
    auto* steady_cmd = app.add_subcommand("steady", "Stationary solution");
    steady_cmd->add_option("config", config_path)->required()->check(CLI::ExistingFile);
    auto* compare_cmd = app.add_subcommand("compare", "Full and reduced transients side by side");
    compare_cmd->add_option("config", config_path)->required()->check(CLI::ExistingFile);
    auto* sweep_cmd = app.add_subcommand("sweep", "Cartesian parameter sweep");
    sweep_cmd->add_option("config", config_path)->required()->check(CLI::ExistingFile);

    std::vector<std::string> plot_inputs;
    std::string plot_style = "auto";
    std::string plot_output;
    auto* plot_cmd = app.add_subcommand("plot", "Render transient or field CSV files as SVG");
    plot_cmd->add_option("csv", plot_inputs)->required()->check(CLI::ExistingFile);
    plot_cmd->add_option("--style", plot_style, "auto, transient, field or density");
    plot_cmd->add_option("-o,--output", plot_output, "SVG path (default <out-dir>/plot.svg)");

    CLI11_PARSE(app, argc, argv);

    if (seed_free)
        std::printf("seed-free: no random number generator is used\n");

    fs::path const out(out_dir);
    try
    {
        if (*plot_cmd)
            return plot_files(plot_inputs, plot_style, plot_output.empty() ? out / "plot.svg" : fs::path(plot_output));

        ScenarioConfig cfg = load(config_path, over);
        if (*run_cmd || *steady_cmd)
        {
            if (*steady_cmd)
                cfg.mode = RunMode::steady;
            auto const record = run(cfg);
            write_record(out, cfg, record);
            print_summary(record);
            if (!record.bounds_report.empty())
                std::printf("%s", record.bounds_report.c_str());
            return 0;
        }
        if (*compare_cmd)
        {
            auto const result = run_compare(cfg);
            ScenarioConfig mean = cfg;
            mean.coefficients = CoefficientMode::mean_field;
            write_record(out / "full", mean, result.full);
            write_record(out / "reduced", mean, result.reduced);
            write_csv(out / "compare.csv", compare_table(result));
            PlotSeries full{"full", result.full.t, result.full.J};
            PlotSeries reduced{"reduced", result.reduced.t, result.reduced.J};
            std::vector<PlotSeries> both{full, reduced};
            write_text(out / "compare.svg", render_svg(both, transient_style()));
            print_summary(result.full);
            print_summary(result.reduced);
            std::printf("max deviation after 10%% crossing: %.4g, steady deviation: %.4g\n", result.max_deviation,
                        result.steady_deviation);
            return 0;
        }
        if (*sweep_cmd)
        {
            if (cfg.sweep.empty())
                throw ConfigError(config_path + ": [sweep] has no axes");
            auto const result = run_sweep(cfg);
            write_csv(out / "sweep.csv", sweep_table(result));
            auto const points = sweep_points(cfg);
            std::string log;
            int failures = 0;
            for (std::size_t k = 0; k < result.rows.size(); ++k)
            {
                auto const& row = result.rows[k];
                fs::path const dir = out / ("run_" + std::to_string(k));
                if (row.record)
                    write_record(dir, points[k].config, *row.record);
                if (!row.error.empty())
                {
                    ++failures;
                    log += "run_" + std::to_string(k) + ": " + row.error + "\n";
                    std::fprintf(stderr, "run_%zu failed: %s\n", k, row.error.c_str());
                }
            }
            write_text(out / "sweep_log.txt", log);
            std::printf("sweep: %zu runs, %d failed\n", result.rows.size(), failures);
            return failures == static_cast<int>(result.rows.size()) ? 1 : 0;
        }
    }
    catch (ConfigError const& e)
    {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }
    catch (std::exception const& e)
    {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
