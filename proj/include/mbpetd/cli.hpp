// Command-line front end: run, converge-time, converge-space, mbp, plot and
// presets. Exit codes: 0 success, 2 usage or runtime error, 3 bound violation.
#ifndef MBPETD_CLI_HPP
#define MBPETD_CLI_HPP

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "mbpetd/config.hpp"
#include "mbpetd/harness.hpp"
#include "mbpetd/output.hpp"
#include "mbpetd/presets.hpp"
#include "mbpetd/stepper.hpp"
#include "mbpetd/svg.hpp"

namespace mbpetd {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 2;
inline constexpr int kExitMbp = 3;

namespace detail {

inline RunConfig load_config(const std::string& path, const std::string& preset) {
  if (!path.empty() && !preset.empty()) throw ConfigError("give either a config file or --preset");
  if (!preset.empty()) return find_preset(preset);
  if (path.empty()) throw ConfigError("a config file or --preset is required");
  const std::string text = read_text_file(path);
  try {
    return parse_config(text);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

/// Writes snapshots at the first step reaching each requested time.
class SnapshotWriter {
 public:
  SnapshotWriter(const RunConfig& cfg, std::filesystem::path dir)
      : cfg_(cfg), dir_(std::move(dir)), times_(cfg.output.snapshot_times) {
    std::sort(times_.begin(), times_.end());
  }

  void operator()(const SolverState& s, const StepReport&) {
    bool due = false;
    while (next_ < times_.size() && s.t >= times_[next_] - 1e-9 * std::max(1.0, times_[next_])) {
      ++next_;
      due = true;
    }
    if (!due) return;
    const bool vtk = cfg_.output.snapshot_format == SnapshotFormat::Vtk;
    char name[64];
    std::snprintf(name, sizeof name, "_%06zu.%s", s.step, vtk ? "vtk" : "csv");
    write_snapshot(*s.grid, s.U, s.t, dir_ / (cfg_.output.snapshot_prefix + name),
                   cfg_.output.snapshot_format);
    ++written_;
  }

  std::size_t written() const { return written_; }

 private:
  const RunConfig& cfg_;
  std::filesystem::path dir_;
  std::vector<double> times_;
  std::size_t next_ = 0;
  std::size_t written_ = 0;
};

}  // namespace detail

/// Entry point shared by the executable and the tests.
inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
  CLI::App app{"Stabilized exponential time differencing for the convective Allen-Cahn equation",
               "mbpetd"};
  app.require_subcommand(1);

  std::string config_path, preset, out_dir, csv_path, scheme_name = "etdrk2", plot_path;
  std::optional<double> tau, final_time;
  int jobs = 1;

  auto* run_cmd = app.add_subcommand("run", "run a configuration file or preset");
  run_cmd->add_option("config", config_path, "configuration file");
  run_cmd->add_option("--preset", preset, "built-in preset name");
  run_cmd->add_option("--tau", tau, "override the time step");
  run_cmd->add_option("--final", final_time, "override the final time");
  run_cmd->add_option("--out", out_dir, "output directory (overrides output.dir)");
  run_cmd->add_option("--jobs", jobs, "worker threads (a single run is sequential)")
      ->check(CLI::PositiveNumber);

  auto* ct_cmd = app.add_subcommand("converge-time", "temporal convergence table");
  ct_cmd->add_option("config", config_path, "configuration file");
  ct_cmd->add_option("--preset", preset, "built-in preset name");
  ct_cmd->add_option("--scheme", scheme_name, "etd1 or etdrk2")
      ->check(CLI::IsMember({"etd1", "etdrk2"}));
  ct_cmd->add_option("--csv", csv_path, "also write the table as CSV");
  ct_cmd->add_option("--jobs", jobs, "rows solved concurrently")->check(CLI::PositiveNumber);

  auto* cs_cmd = app.add_subcommand("converge-space", "spatial convergence table");
  cs_cmd->add_option("config", config_path, "configuration file");
  cs_cmd->add_option("--preset", preset, "built-in preset name");
  cs_cmd->add_option("--csv", csv_path, "also write the table as CSV");
  cs_cmd->add_option("--jobs", jobs, "rows solved concurrently")->check(CLI::PositiveNumber);

  auto* mbp_cmd = app.add_subcommand("mbp", "long run reporting the largest sup-norm");
  mbp_cmd->add_option("config", config_path, "configuration file");
  mbp_cmd->add_option("--preset", preset, "built-in preset name");
  mbp_cmd->add_option("--tau", tau, "time step (default: the preset's)");
  mbp_cmd->add_option("--final", final_time, "override the final time");
  mbp_cmd->add_option("--csv", csv_path, "write the time series as CSV");
  mbp_cmd->add_option("--plot", plot_path, "write a sup-norm SVG chart");

  std::string plot_kind = "supnorm";
  std::vector<std::string> plot_inputs;
  std::optional<double> plot_beta;
  auto* plot_cmd = app.add_subcommand("plot", "SVG chart of stored time series");
  plot_cmd->add_option("--kind", plot_kind, "supnorm or energy")
      ->check(CLI::IsMember({"supnorm", "energy"}));
  plot_cmd->add_option("--out", plot_path, "SVG file")->required();
  plot_cmd->add_option("--beta", plot_beta, "reference bound drawn on sup-norm charts");
  plot_cmd->add_option("series", plot_inputs, "time series CSV files")->required();

  std::string write_dir, show_name;
  auto* presets_cmd = app.add_subcommand("presets", "list the built-in presets");
  presets_cmd->add_option("--write", write_dir, "write every preset as <name>.cfg into DIR");
  presets_cmd->add_option("--show", show_name, "print one preset in config syntax");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitError;
  }

  try {
    if (*presets_cmd) {
      if (!show_name.empty()) {
        out << serialize_config(find_preset(show_name));
        return kExitOk;
      }
      for (const auto& c : builtin_presets()) {
        char line[200];
        std::snprintf(line, sizeof line, "%-18s %s\n", c.name.c_str(), c.description.c_str());
        out << line;
        if (!write_dir.empty()) {
          write_text_file(std::filesystem::path(write_dir) / (c.name + ".cfg"),
                          serialize_config(c));
        }
      }
      return kExitOk;
    }

    if (*plot_cmd) {
      std::vector<PlotSeries> list;
      for (const auto& p : plot_inputs) {
        list.push_back({std::filesystem::path(p).stem().string(), read_timeseries_csv(p)});
      }
      const PlotKind kind = plot_kind == "energy" ? PlotKind::Energy : PlotKind::SupNorm;
      emit_plot_svg(list, kind, plot_path,
                    kind == PlotKind::SupNorm ? plot_beta : std::optional<double>());
      out << "wrote " << plot_path << "\n";
      return kExitOk;
    }

    RunConfig cfg = detail::load_config(config_path, preset);
    if (final_time) cfg.time.final_time = *final_time;

    if (*ct_cmd) {
      const Scheme scheme = scheme_name == "etd1" ? Scheme::Etd1 : Scheme::Etdrk2;
      const ConvergenceTable t = temporal_convergence(cfg, scheme, jobs);
      out << cfg.name << ": " << to_string(scheme) << ", reference etdrk2 tau = 1/"
          << format_double(1.0 / cfg.convergence.tau_ref) << "\n"
          << format_table(t);
      if (!csv_path.empty()) write_text_file(csv_path, table_csv(t));
      return kExitOk;
    }

    if (*cs_cmd) {
      const ConvergenceTable t = spatial_convergence(cfg, jobs);
      out << cfg.name << ": etdrk2, tau = " << format_double(cfg.convergence.tau_fixed)
          << ", reference 1/h = " << cfg.convergence.cells_ref << "\n"
          << format_table(t);
      if (!csv_path.empty()) write_text_file(csv_path, table_csv(t));
      return kExitOk;
    }

    if (tau) cfg.time.tau = *tau;
    validate(cfg);

    if (*mbp_cmd) {
      const PhysicsSpec phys = make_physics(cfg);
      const RunResult r = mbp_experiment(cfg, cfg.time.tau);
      const double bound = phys.beta + cfg.tolerances.mbp_slack;
      const bool pass = !r.error && r.max_sup_norm <= bound;
      char line[200];
      std::snprintf(line, sizeof line, "beta = %.4f (%s)\nkappa = %s\n", phys.beta,
                    format_double(phys.beta).c_str(), format_double(phys.kappa).c_str());
      out << cfg.name << ": tau = " << format_double(cfg.time.tau)
          << ", T = " << format_double(cfg.time.final_time) << "\n"
          << line << "max sup-norm = " << format_double(r.max_sup_norm) << "\n"
          << "energy: " << format_double(r.series.front().energy) << " -> "
          << format_double(r.series.back().energy) << "\n"
          << (pass ? "PASS" : "FAIL") << "\n";
      if (!csv_path.empty()) write_timeseries_csv(r.series, csv_path);
      if (!plot_path.empty()) {
        emit_plot_svg({{cfg.name + " tau=" + format_double(cfg.time.tau), r.series}},
                      PlotKind::SupNorm, plot_path, phys.beta);
      }
      if (r.error) err << "error: " << *r.error << "\n";
      if (pass) return kExitOk;
      return r.error && r.series.back().mbp_ok ? kExitError : kExitMbp;
    }

    // run
    const std::filesystem::path dir = out_dir.empty() ? cfg.output.dir : out_dir;
    for (const auto& note : make_physics(cfg).notices) err << "notice: " << note << "\n";
    detail::SnapshotWriter snapshots(cfg, dir);
    RunCallbacks cb;
    if (!cfg.output.snapshot_times.empty()) {
      cb.on_step = [&](const SolverState& s, const StepReport& rep) { snapshots(s, rep); };
    }
    const RunResult r = run(make_initial_state(cfg), cfg.time.scheme, cfg.time.tau,
                            cfg.time.final_time, make_step_options(cfg), cb);
    if (!cfg.output.series.empty()) write_timeseries_csv(r.series, dir / cfg.output.series);
    out << cfg.name << ": " << r.series.size() - 1 << " steps to t = "
        << format_double(r.state.t) << ", max sup-norm = " << format_double(r.max_sup_norm)
        << ", energy = " << format_double(r.series.back().energy) << "\n";
    if (snapshots.written() > 0) out << snapshots.written() << " snapshots in " << dir << "\n";
    if (r.error) {
      err << "error: " << *r.error << "\n";
      const bool mbp = !r.series.back().mbp_ok;
      return mbp ? kExitMbp : kExitError;
    }
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace mbpetd

#endif  // MBPETD_CLI_HPP
