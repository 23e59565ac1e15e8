#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "coxcal/analysis.hpp"
#include "coxcal/csv.hpp"
#include "coxcal/errors.hpp"
#include "coxcal/format.hpp"
#include "coxcal/kernel.hpp"
#include "coxcal/km.hpp"
#include "coxcal/simulation.hpp"

namespace fs = std::filesystem;
using namespace coxcal;

namespace {

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << content;
}

struct MappingFlags {
    std::string time_col = "time";
    std::string event_col = "event";
    std::string xtilde_col = "xtilde";
    std::string u_col = "u";
    std::vector<std::string> z_cols;
    std::string x_col;

    ColumnMapping to_mapping() const {
        ColumnMapping m;
        m.time = time_col;
        m.event = event_col;
        m.xtilde = xtilde_col;
        m.u = u_col;
        m.z_columns = z_cols;
        if (!x_col.empty()) m.x_true = x_col;
        return m;
    }
};

void add_mapping_flags(CLI::App* cmd, MappingFlags& flags) {
    cmd->add_option("--time-col", flags.time_col, "Observed time column");
    cmd->add_option("--event-col", flags.event_col, "Event indicator column (0/1)");
    cmd->add_option("--xtilde-col", flags.xtilde_col, "Distorted covariate column");
    cmd->add_option("--u-col", flags.u_col, "Confounder column");
    cmd->add_option("--z-cols", flags.z_cols, "Adjustment covariate columns")->delimiter(',');
    cmd->add_option("--x-col", flags.x_col, "True covariate column (oracle method)");
}

Dataset ingest_reporting(const std::string& input, const ColumnMapping& mapping) {
    std::vector<std::string> skipped;
    Dataset data = ingest_csv(input, mapping, &skipped);
    for (const auto& line : skipped) std::cerr << input << ": " << line << "\n";
    return data;
}

std::string km_step_svg(const std::vector<std::pair<std::string, KMCurve>>& curves,
                        double t_max) {
    constexpr int kW = 640, kH = 420, kPad = 50;
    static const char* colors[] = {"#1f6fb2", "#c24f38", "#3f8f55", "#8157a8",
                                   "#b08a2e", "#527682"};
    auto sx = [&](double t) { return kPad + (kW - 2 * kPad) * (t_max > 0 ? t / t_max : 0.0); };
    auto sy = [&](double s) { return kH - kPad - (kH - 2 * kPad) * s; };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
        << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<line x1=\"" << kPad << "\" y1=\"" << kH - kPad << "\" x2=\"" << kW - kPad
        << "\" y2=\"" << kH - kPad << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << kPad << "\" y1=\"" << kPad << "\" x2=\"" << kPad << "\" y2=\""
        << kH - kPad << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 12
        << "\" text-anchor=\"middle\" font-size=\"13\">time</text>\n";
    svg << "<text x=\"14\" y=\"" << kH / 2 << "\" text-anchor=\"middle\" font-size=\"13\" "
        << "transform=\"rotate(-90 14 " << kH / 2 << ")\">survival</text>\n";

    std::size_t ci = 0;
    for (const auto& [label, curve] : curves) {
        const char* color = colors[ci % 6];
        std::ostringstream path;
        double s = 1.0;
        path << "M" << fmt_fixed(sx(0.0), 1) << " " << fmt_fixed(sy(1.0), 1);
        for (std::size_t k = 0; k < curve.times.size(); ++k) {
            path << " H" << fmt_fixed(sx(curve.times[k]), 1);
            s = curve.survival[k];
            path << " V" << fmt_fixed(sy(s), 1);
        }
        path << " H" << fmt_fixed(sx(t_max), 1);
        svg << "<path d=\"" << path.str() << "\" fill=\"none\" stroke=\"" << color
            << "\" stroke-width=\"1.6\"/>\n";
        svg << "<text x=\"" << kW - kPad - 4 << "\" y=\"" << kPad + 16 * (ci + 1)
            << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << color << "\">" << label
            << "</text>\n";
        ++ci;
    }
    svg << "</svg>\n";
    return svg.str();
}

int cmd_fit(const std::string& input, const MappingFlags& flags, const std::string& method_text,
            const std::string& bandwidth_text, double ci_level, const std::string& output) {
    const FitMethod method = parse_fit_method(method_text);
    std::optional<double> bandwidth;
    if (bandwidth_text != "auto") {
        try {
            bandwidth = std::stod(bandwidth_text);
        } catch (const std::exception&) {
            throw ConfigError("--bandwidth must be 'auto' or a positive number");
        }
    }

    const Dataset data = ingest_reporting(input, flags.to_mapping());
    const FitReport report = run_fit(data, method, bandwidth, ci_level);

    std::ostringstream config_block;
    config_block << "input = " << input << "\nmethod = " << method_text
                 << "\nbandwidth = " << bandwidth_text << "\n";
    const std::string text = report.to_text(config_block.str());
    std::cout << text;
    write_file(fs::path(output) / "coefficients.csv", report.to_csv());
    write_file(fs::path(output) / "report.txt", text);
    return 0;
}

int cmd_bandwidth(const std::string& input, const MappingFlags& flags,
                  const std::string& output) {
    const CsvTable table = read_csv(input);
    const std::size_t c_u = table.column_index(flags.u_col);
    std::vector<double> u;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const std::string& cell = table.rows[r][c_u];
        try {
            u.push_back(std::stod(cell));
        } catch (const std::exception&) {
            throw ParseError(r + 1, flags.u_col, "cannot parse '" + cell + "' as a number");
        }
    }
    if (u.size() < 2) throw EmptySampleError("bandwidth selection needs at least 2 points");

    const BandwidthGrid grid = default_bandwidth_grid(u);
    const Bandwidth selected = select_bandwidth(u, grid);
    std::ostringstream csv;
    csv << "h,cv_score,selected\n";
    double best_cv = std::numeric_limits<double>::infinity();
    for (double h : grid.values) {
        const double cv = cv_score(Bandwidth(h), u);
        csv << fmt_g17(h) << ',' << fmt_g17(cv) << ',' << (h == selected.h ? 1 : 0) << '\n';
        if (cv < best_cv) best_cv = cv;
    }
    const double best_h = selected.h;
    write_file(fs::path(output) / "cv_curve.csv", csv.str());
    std::cout << "input = " << input << "\nn = " << u.size()
              << "\nselected bandwidth = " << fmt_g17(best_h)
              << "\ncv score = " << fmt_g17(best_cv) << "\n";
    return 0;
}

int cmd_km(const std::string& input, const MappingFlags& flags, const std::string& strata_col,
           bool svg, const std::string& output) {
    const CsvTable table = read_csv(input);
    const std::size_t c_time = table.column_index(flags.time_col);
    const std::size_t c_event = table.column_index(flags.event_col);
    std::optional<std::size_t> c_strata;
    if (!strata_col.empty()) c_strata = table.column_index(strata_col);

    std::map<std::string, std::pair<std::vector<double>, std::vector<int>>> strata;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& fields = table.rows[r];
        const std::string label = c_strata ? fields[*c_strata] : std::string("all");
        double t = 0.0;
        try {
            t = std::stod(fields[c_time]);
        } catch (const std::exception&) {
            throw ParseError(r + 1, flags.time_col, "cannot parse '" + fields[c_time] + "'");
        }
        int d = 0;
        if (fields[c_event] == "1") d = 1;
        else if (fields[c_event] != "0") {
            throw ParseError(r + 1, flags.event_col,
                             "event indicator must be 0 or 1, got '" + fields[c_event] + "'");
        }
        strata[label].first.push_back(t);
        strata[label].second.push_back(d);
    }
    if (strata.empty()) throw EmptyAfterFilteringError();

    std::ostringstream csv;
    csv << "stratum,time,survival,at_risk,n_events\n";
    std::vector<std::pair<std::string, KMCurve>> curves;
    double t_max = 0.0;
    for (const auto& [label, obs] : strata) {
        const KMCurve curve = km_estimate(obs.first, obs.second);
        csv << label << ",0,1," << obs.first.size() << ",0\n";
        for (std::size_t k = 0; k < curve.times.size(); ++k) {
            csv << label << ',' << fmt_g17(curve.times[k]) << ',' << fmt_g17(curve.survival[k])
                << ',' << curve.at_risk[k] << ',' << curve.n_events[k] << '\n';
        }
        t_max = std::max(t_max, *std::max_element(obs.first.begin(), obs.first.end()));
        curves.emplace_back(label, curve);
    }
    write_file(fs::path(output) / "km.csv", csv.str());
    if (svg) write_file(fs::path(output) / "km.svg", km_step_svg(curves, t_max));
    std::cout << "wrote " << (fs::path(output) / "km.csv").string() << " (" << curves.size()
              << " strat" << (curves.size() == 1 ? "um" : "a") << ")\n";
    return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& output,
                 std::optional<std::uint64_t> seed, std::optional<int> threads) {
    const auto values = parse_config_file(config_path);
    SimulationConfig config = simulation_config_from_map(values, config_path);
    if (seed) config.seed = *seed;
    if (threads) config.threads = *threads;
    config.validate();

    const SimulationSummary summary = run_study(config);
    write_file(fs::path(output) / "summary.csv", summary_to_csv(summary, config));

    std::ostringstream info;
    info << "config_id = " << config.config_id << "\nconfig_file = " << config_path
         << "\nn = " << config.n << "\nreplications = " << config.replications
         << "\nseed = " << config.seed << "\ndistortion = " << config.distortion.name()
         << "\ntarget_cr = " << fmt_g17(config.target_cr)
         << "\nachieved_cr = " << fmt_g17(summary.achieved_cr)
         << "\ntau = " << fmt_g17(summary.tau_used)
         << "\nbandwidth = "
         << (config.bandwidth_policy.cv ? std::string("cv")
                                        : fmt_g17(config.bandwidth_policy.fixed_h))
         << "\nci_level = " << fmt_g17(config.ci_level)
         << "\nfailures = " << summary.replication_failures << "\n";
    write_file(fs::path(output) / "run_info.txt", info.str());

    std::cout << info.str() << "\nmethod   parameter   bias      sd        se        mse       cp\n";
    static const char* params[3] = {"beta1", "beta2", "gamma"};
    for (int m = 0; m < 3; ++m) {
        for (int k = 0; k < 3; ++k) {
            const ParamStats& s = summary.stats[static_cast<std::size_t>(m)][static_cast<std::size_t>(k)];
            std::printf("%-8s %-10s %8.3f %9.3f %9.3f %9.3f %8.3f\n",
                        method_name(static_cast<Method>(m)), params[k], s.bias, s.sd, s.se,
                        s.mse, s.cp);
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cox regression with a multiplicatively distorted covariate"};
    app.require_subcommand(1);

    std::string input, config_path;
    std::string output = ".";
    std::string method = "proposed";
    std::string bandwidth = "auto";
    std::string strata_col;
    double ci_level = 0.95;
    bool svg = false;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    MappingFlags mapping;

    CLI::App* fit_cmd = app.add_subcommand("fit", "Fit the Cox model to a CSV dataset");
    fit_cmd->add_option("--input", input, "Input CSV")->required();
    fit_cmd->add_option("--output", output, "Output directory");
    fit_cmd->add_option("--method", method, "proposed | naive | oracle-if-available");
    fit_cmd->add_option("--bandwidth", bandwidth, "'auto' (CV) or a numeric bandwidth");
    fit_cmd->add_option("--ci-level", ci_level, "Confidence level");
    add_mapping_flags(fit_cmd, mapping);

    CLI::App* bw_cmd = app.add_subcommand("bandwidth", "CV bandwidth curve and selection");
    bw_cmd->add_option("--input", input, "Input CSV")->required();
    bw_cmd->add_option("--output", output, "Output directory");
    bw_cmd->add_option("--u-col", mapping.u_col, "Confounder column");

    CLI::App* km_cmd = app.add_subcommand("km", "Kaplan-Meier survival curves");
    km_cmd->add_option("--input", input, "Input CSV")->required();
    km_cmd->add_option("--output", output, "Output directory");
    km_cmd->add_option("--time-col", mapping.time_col, "Observed time column");
    km_cmd->add_option("--event-col", mapping.event_col, "Event indicator column");
    km_cmd->add_option("--strata-col", strata_col, "Optional stratification column");
    km_cmd->add_flag("--svg", svg, "Also emit a step-plot SVG");

    CLI::App* sim_cmd = app.add_subcommand("simulate", "Run the Monte Carlo study");
    sim_cmd->add_option("--config", config_path, "Simulation config file")->required();
    sim_cmd->add_option("--output", output, "Output directory");
    sim_cmd->add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t v) { seed = v; }, "Override the config seed");
    sim_cmd->add_option_function<int>(
        "--threads", [&](int v) { threads = v; }, "Worker thread count");

    try {
        app.parse(argc, argv);
        if (fit_cmd->parsed()) return cmd_fit(input, mapping, method, bandwidth, ci_level, output);
        if (bw_cmd->parsed()) return cmd_bandwidth(input, mapping, output);
        if (km_cmd->parsed()) return cmd_km(input, mapping, strata_col, svg, output);
        if (sim_cmd->parsed()) return cmd_simulate(config_path, output, seed, threads);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
