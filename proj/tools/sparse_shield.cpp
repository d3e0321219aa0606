// Experiment runner: generates synthetic sparse-coding datasets, evaluates
// the robustness certificates, sweeps gradient attacks against the THR and
// BP classification pipelines, and renders the accuracy/bounds report.

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <limits>
#include <optional>
#include <string>

#include "sparseshield/attack.hpp"
#include "sparseshield/bounds.hpp"
#include "sparseshield/config.hpp"
#include "sparseshield/io.hpp"
#include "sparseshield/report.hpp"
#include "sparseshield/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sparseshield;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasiblePremise = 3;
constexpr int kExitNonConverged = 4;

struct GlobalArgs {
  std::string config_path;
  std::string data_dir;
  std::string out_dir;
  std::optional<uint64_t> seed;
  std::optional<int> jobs;
};

ExperimentConfig load_config(const GlobalArgs& args) {
  if (args.config_path.empty()) throw config_error("--config is required");
  ExperimentConfig c = parse_experiment_config(read_text_file(args.config_path));
  // seed precedence: --seed, then SPARSE_SHIELD_SEED, then the config file
  if (const char* env = std::getenv("SPARSE_SHIELD_SEED")) {
    try {
      c.synth.seed = std::stoull(env);
    } catch (const std::exception&) {
      throw config_error("SPARSE_SHIELD_SEED is not an integer");
    }
  }
  if (args.seed) c.synth.seed = *args.seed;
  if (!args.out_dir.empty()) c.output_dir = args.out_dir;
  if (args.jobs) c.jobs = *args.jobs;
  return c;
}

LabeledDataset obtain_dataset(const GlobalArgs& args, const ExperimentConfig& config) {
  if (!args.data_dir.empty()) return load_dataset(args.data_dir);
  return make_dataset(config.synth);
}

struct DatasetStats {
  double mu = 0.0;
  double margin_star = 0.0;
  double gamma_min = 0.0;
  double gamma_max = 0.0;
  double w_norm = 0.0;
  int k = 0;
};

DatasetStats dataset_stats(const LabeledDataset& ds) {
  DatasetStats s;
  s.mu = ds.mu;
  s.margin_star = ds.margin_star;
  s.w_norm = ds.clf.weights.norm();
  s.k = 0;
  s.gamma_min = std::numeric_limits<double>::infinity();
  s.gamma_max = 0.0;
  for (const auto& sample : ds.samples) {
    s.gamma_min = std::min(s.gamma_min, sample.code.min_abs());
    s.gamma_max = std::max(s.gamma_max, sample.code.max_abs());
    s.k = std::max(s.k, sample.code.l0());
  }
  return s;
}

struct Certificates {
  BoundReport thr;
  BoundReport bp;
};

Certificates compute_certificates(const DatasetStats& s) {
  return {cor1_thr(s.mu, s.k, s.gamma_min, s.gamma_max, s.w_norm, s.margin_star),
          cor2_bp(s.mu, s.k, s.w_norm, s.margin_star)};
}

// Operational threshold when the certificate collapses: the window rule at
// eps = 0 if the window is nonempty, otherwise the midpoint of the crossed
// window edges, (gamma_min + mu gamma_max) / 2.
double resolve_thr_beta(const ExperimentConfig& config, const BoundReport& cor1,
                        const DatasetStats& s) {
  if (!config.pursuit.betas.empty()) return config.pursuit.betas.front();
  if (cor1.feasible || (!cor1.beta_windows.empty() && !cor1.beta_windows.front().empty()))
    return cor1.betas.front();
  return 0.5 * (s.gamma_min + s.mu * s.gamma_max);
}

double resolve_bp_xi(const ExperimentConfig& config, const BoundReport& cor2) {
  if (!config.pursuit.xis.empty()) return config.pursuit.xis.front();
  if (!cor2.feasible)
    throw config_error(
        "the BP certificate is infeasible, so auto_from_bounds cannot derive xi; "
        "set pursuit.xis explicitly");
  return cor2.xi_schedule.front();
}

Pipeline make_thr_pipeline(const LabeledDataset& ds, double beta) {
  return Pipeline::thresholding(ModelStack({ds.dict}),
                                ThresholdSchedule{{beta}, false}, ds.clf);
}

Pipeline make_bp_pipeline(const LabeledDataset& ds, double xi,
                          const SolverOptions& solver) {
  return Pipeline::basis_pursuit(ModelStack({ds.dict}), BpSchedule{{xi}, solver},
                                 ds.clf);
}

json bound_summary(const BoundReport& r) {
  return json{{"kind", to_string(r.kind)},
              {"feasible", r.feasible},
              {"degenerate", r.degenerate},
              {"eps_max", r.eps_max},
              {"eps_norm", to_string(r.eps_norm)}};
}

int cmd_gen(const GlobalArgs& args) {
  const ExperimentConfig config = load_config(args);
  const LabeledDataset ds = make_dataset(config.synth);
  const fs::path dir = fs::path(config.output_dir) / "dataset";
  save_dataset(dir, ds);
  std::cout << "dataset: " << dir.string() << "\n"
            << "  signals: " << ds.samples.size() << "\n"
            << "  mu: " << format_double(ds.mu) << "\n"
            << "  margin_star: " << format_double(ds.margin_star) << "\n"
            << "  acceptance: " << format_double(ds.acceptance_rate) << "\n";
  return kExitOk;
}

int cmd_bounds(const GlobalArgs& args) {
  const ExperimentConfig config = load_config(args);
  const LabeledDataset ds = obtain_dataset(args, config);
  const DatasetStats stats = dataset_stats(ds);
  const Certificates certs = compute_certificates(stats);

  fs::create_directories(config.output_dir);
  write_text_file(fs::path(config.output_dir) / "thr_bound.json",
                  bound_report_to_json(certs.thr));
  write_text_file(fs::path(config.output_dir) / "bp_bound.json",
                  bound_report_to_json(certs.bp));

  const auto row = [](const char* name, const BoundReport& r) {
    std::cout << "  " << name << "  feasible=" << (r.feasible ? "yes" : "no ")
              << "  eps_max=" << format_double(r.eps_max) << " ("
              << to_string(r.eps_norm) << ")";
    if (!r.betas.empty()) std::cout << "  beta=" << format_double(r.betas.front());
    if (!r.xi_schedule.empty())
      std::cout << "  xi=" << format_double(r.xi_schedule.front());
    std::cout << "\n";
  };
  std::cout << "certificates (mu=" << format_double(stats.mu)
            << ", margin*=" << format_double(stats.margin_star) << ", k=" << stats.k
            << "):\n";
  row("THR", certs.thr);
  row("BP ", certs.bp);
  return kExitOk;
}

int cmd_sweep(const GlobalArgs& args) {
  const ExperimentConfig config = load_config(args);
  const LabeledDataset ds = obtain_dataset(args, config);
  const DatasetStats stats = dataset_stats(ds);
  const Certificates certs = compute_certificates(stats);

  const double beta = resolve_thr_beta(config, certs.thr, stats);
  const double xi = resolve_bp_xi(config, certs.bp);
  const Pipeline thr = make_thr_pipeline(ds, beta);
  const Pipeline bp = make_bp_pipeline(ds, xi, config.pursuit.solver);

  SweepInput input;
  input.signals.reserve(ds.samples.size());
  input.labels.reserve(ds.samples.size());
  for (const auto& s : ds.samples) {
    input.signals.push_back(s.signal);
    input.labels.push_back(s.label);
  }

  const SweepResult thr_result =
      accuracy_sweep(input, thr, config.attack.eps_grid, config.attack.kind,
                     config.attack.loss, config.synth.seed, config.jobs);
  const SweepResult bp_result =
      accuracy_sweep(input, bp, config.attack.eps_grid, config.attack.kind,
                     config.attack.loss, config.synth.seed, config.jobs);

  std::vector<SweepRow> rows = thr_result.rows;
  rows.insert(rows.end(), bp_result.rows.begin(), bp_result.rows.end());

  fs::create_directories(config.output_dir);
  write_text_file(fs::path(config.output_dir) / "sweep.csv", sweep_rows_to_csv(rows));
  write_text_file(fs::path(config.output_dir) / "thr_bound.json",
                  bound_report_to_json(certs.thr));
  write_text_file(fs::path(config.output_dir) / "bp_bound.json",
                  bound_report_to_json(certs.bp));

  const auto clean_acc = [&rows](const std::string& name) {
    for (const auto& r : rows)
      if (r.pipeline == name && r.eps == 0.0) return r.accuracy;
    return -1.0;
  };
  const auto below = [&rows](const std::string& name) -> json {
    const auto eps = first_eps_below(rows, name, 0.95);
    if (eps) return *eps;
    return nullptr;
  };
  json summary{
      {"n_signals", static_cast<int>(ds.samples.size())},
      {"seed", config.synth.seed},
      {"norm_kind", to_string(config.attack.kind)},
      {"loss", to_string(config.attack.loss)},
      {"eps_grid", config.attack.eps_grid},
      {"mu", ds.mu},
      {"margin_star", ds.margin_star},
      {"schedule", {{"beta", beta}, {"xi", xi}}},
      {"clean_accuracy", {{"thr", clean_acc("thr")}, {"bp", clean_acc("bp")}}},
      {"first_eps_below_95", {{"thr", below("thr")}, {"bp", below("bp")}}},
      {"bounds", {{"thr", bound_summary(certs.thr)}, {"bp", bound_summary(certs.bp)}}},
      {"non_converged_solves",
       thr_result.non_converged_solves + bp_result.non_converged_solves}};
  if (config.attack.kind == AttackKind::FgsmLinf)
    summary["l2_budget_per_unit_linf"] = std::sqrt(static_cast<double>(config.synth.n));
  write_text_file(fs::path(config.output_dir) / "summary.json", summary.dump(2) + "\n");

  if (config.emit_plot) {
    ReportInputs inputs{rows, certs.thr, certs.bp};
    write_text_file(fs::path(config.output_dir) / "sweep.svg", render_sweep_svg(inputs));
    write_text_file(fs::path(config.output_dir) / "summary.md",
                    render_summary_md(inputs));
  }

  std::cout << "sweep: " << (fs::path(config.output_dir) / "sweep.csv").string()
            << "\n  rows: " << rows.size() << "\n  clean thr/bp: "
            << format_double(clean_acc("thr")) << "/" << format_double(clean_acc("bp"))
            << "\n";
  if (thr_result.non_converged_solves + bp_result.non_converged_solves > 0) {
    std::cerr << "warning: "
              << thr_result.non_converged_solves + bp_result.non_converged_solves
              << " solves did not converge\n";
    return kExitNonConverged;
  }
  return kExitOk;
}

int cmd_report(const std::string& csv_path, const std::string& thr_bound_path,
               const std::string& bp_bound_path, const std::string& out_dir) {
  ReportInputs inputs;
  inputs.rows = sweep_rows_from_csv(read_text_file(csv_path));
  if (!thr_bound_path.empty())
    inputs.thr_bound = bound_report_from_json(read_text_file(thr_bound_path));
  if (!bp_bound_path.empty())
    inputs.bp_bound = bound_report_from_json(read_text_file(bp_bound_path));
  fs::create_directories(out_dir);
  write_text_file(fs::path(out_dir) / "sweep.svg", render_sweep_svg(inputs));
  write_text_file(fs::path(out_dir) / "summary.md", render_summary_md(inputs));
  std::cout << "report: " << (fs::path(out_dir) / "sweep.svg").string() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse coding classifiers: certificates and attack sweeps"};
  app.require_subcommand(1);

  GlobalArgs args;
  std::string report_csv, report_thr, report_bp, report_out = "out";

  const auto add_common = [&](CLI::App* cmd, bool with_data) {
    cmd->add_option("--config", args.config_path, "experiment config JSON");
    cmd->add_option("--seed", args.seed, "override the config seed");
    cmd->add_option("--out", args.out_dir, "override the output directory");
    cmd->add_option("--jobs", args.jobs, "worker threads");
    if (with_data)
      cmd->add_option("--data", args.data_dir, "use a generated dataset directory");
  };

  CLI::App* gen = app.add_subcommand("gen", "generate and save a dataset");
  add_common(gen, false);
  CLI::App* bounds = app.add_subcommand("bounds", "evaluate the robustness certificates");
  add_common(bounds, true);
  CLI::App* sweep = app.add_subcommand("sweep", "run the attack sweep for both pipelines");
  add_common(sweep, true);

  CLI::App* report = app.add_subcommand("report", "render SVG + markdown from a sweep");
  report->add_option("--csv", report_csv, "sweep CSV path")->required();
  report->add_option("--thr-bound", report_thr, "THR bound JSON path");
  report->add_option("--bp-bound", report_bp, "BP bound JSON path");
  report->add_option("--out", report_out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (gen->parsed()) return cmd_gen(args);
    if (bounds->parsed()) return cmd_bounds(args);
    if (sweep->parsed()) return cmd_sweep(args);
    if (report->parsed()) return cmd_report(report_csv, report_thr, report_bp, report_out);
  } catch (const premise_violation& e) {
    std::cerr << "infeasible premise: " << e.what() << "\n";
    return kExitInfeasiblePremise;
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const io_error& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const invalid_input& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
