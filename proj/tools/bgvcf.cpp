// bgvcf: command-line front end for the STAP pipeline.
//
// Exit codes: 0 success, 2 configuration/input error, 3 numerical failure.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bgvcf/config.hpp"
#include "bgvcf/dataset_io.hpp"
#include "bgvcf/pipeline.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Overrides {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<double> psi1;
  std::optional<int> ar_order;
  std::optional<int> subspace_dim;
  std::optional<double> step_size;
  std::optional<int> max_iters;
  std::optional<double> tol;
  std::optional<int> training;
  std::optional<int> guard;
  std::optional<int> cut;
  std::optional<int> sweep_first;
  std::optional<int> sweep_last;
  std::optional<int> training_first;
  std::optional<int> training_last;
  std::optional<double> target_snr_db;
  std::vector<std::string> estimators;
  std::string input;
};

void add_pipeline_flags(CLI::App& app, Overrides& o) {
  app.add_option("-c,--config", o.config, "TOML or JSON config file")->check(CLI::ExistingFile);
  app.add_option("-o,--out", o.out, "Output directory (overrides BGVCF_OUTPUT_DIR and the config)");
  app.add_option("--seed", o.seed, "RNG seed");
  app.add_option("--psi1", o.psi1, "Burg regularization weight")->check(CLI::NonNegativeNumber);
  app.add_option("--ar-order", o.ar_order, "Burg model order (-1: full)");
  app.add_option("--subspace-dim", o.subspace_dim, "Clutter subspace dimension (0: Brennan rule)");
  app.add_option("--step-size", o.step_size, "Gradient step size");
  app.add_option("--max-iters", o.max_iters, "Optimizer iteration cap");
  app.add_option("--tol", o.tol, "Relative objective-change tolerance");
  app.add_option("--training", o.training, "Training cells per window");
  app.add_option("--guard", o.guard, "Guard cells per side");
  app.add_option("--cut", o.cut, "Cell under test");
  app.add_option("--sweep-first", o.sweep_first, "First CUT of the output-power sweep");
  app.add_option("--sweep-last", o.sweep_last, "Last CUT of the output-power sweep");
  app.add_option("--training-first", o.training_first, "First cell of an explicit training range");
  app.add_option("--training-last", o.training_last, "Last cell of an explicit training range");
  app.add_option("--target-snr-db", o.target_snr_db, "Rescale every target to this SNR over noise");
  app.add_option("--estimators", o.estimators, "Estimator labels")->delimiter(',');
  app.add_option("--input", o.input, "CPI file to process instead of simulating");
}

bgvcf::PipelineConfig resolve(const Overrides& o) {
  bgvcf::PipelineConfig c = o.config.empty() ? bgvcf::PipelineConfig{} : bgvcf::load_config(o.config);
  if (o.seed) c.scenario.rng_seed = *o.seed;
  if (o.psi1) c.burg.psi1 = *o.psi1;
  if (o.ar_order) c.burg.order = *o.ar_order;
  if (o.subspace_dim) c.optimizer.subspace_dim = *o.subspace_dim;
  if (o.step_size) c.optimizer.step_size = *o.step_size;
  if (o.max_iters) c.optimizer.max_iterations = *o.max_iters;
  if (o.tol) c.optimizer.tolerance = *o.tol;
  if (o.training) c.window.num_training = *o.training;
  if (o.guard) c.window.num_guard = *o.guard;
  if (o.cut) c.window.cut_index = *o.cut;
  if (o.sweep_first) c.window.sweep_first = *o.sweep_first;
  if (o.sweep_last) c.window.sweep_last = *o.sweep_last;
  if (o.training_first) c.window.training_first = *o.training_first;
  if (o.training_last) c.window.training_last = *o.training_last;
  if (o.target_snr_db) {
    for (auto& t : c.targets) {
      const double a = std::abs(bgvcf::sim::TargetSpec::from_snr({}, 0, 0, *o.target_snr_db, c.scenario.noise_variance).amplitude);
      const double old = std::abs(t.amplitude);
      t.amplitude = old > 0.0 ? t.amplitude * (a / old) : bgvcf::cplx{a, 0.0};
    }
  }
  if (!o.estimators.empty()) c.estimators = o.estimators;
  if (!o.input.empty()) c.input = o.input;
  if (const char* env = std::getenv("BGVCF_OUTPUT_DIR"); env != nullptr && *env != '\0') c.output_dir = env;
  if (!o.out.empty()) c.output_dir = o.out;
  c.validate();
  return c;
}

int run(const Overrides& o, bgvcf::pipeline::Outputs outputs) {
  const auto config = resolve(o);
  const auto manifest = bgvcf::pipeline::run_pipeline(config, outputs);
  for (const auto& [label, reason] : manifest.estimator_failures) {
    std::cerr << "estimator " << label << " failed: " << reason << '\n';
  }
  std::cout << "wrote " << manifest.files.size() << " files to " << config.output_dir.string()
            << " (config " << manifest.config_hash.substr(0, 12) << ")\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Space-time adaptive processing with Brauer screening and Grassmann CCM estimation"};
  app.require_subcommand(1);

  Overrides run_opts;
  auto* run_cmd = app.add_subcommand("run", "Full pipeline: estimators, weights and all metric tables");
  add_pipeline_flags(*run_cmd, run_opts);

  Overrides screen_opts;
  auto* screen_cmd = app.add_subcommand("screen", "Brauer-disc screening table for the training window");
  add_pipeline_flags(*screen_cmd, screen_opts);

  Overrides metric_opts;
  auto* metrics_cmd = app.add_subcommand("metrics", "IF, beampattern, SCNR, Capon and power tables");
  add_pipeline_flags(*metrics_cmd, metric_opts);

  Overrides sim_opts;
  std::string sim_output;
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate a CPI and write it with a JSON sidecar");
  sim_cmd->add_option("-c,--config", sim_opts.config, "TOML or JSON config file")->check(CLI::ExistingFile);
  sim_cmd->add_option("--seed", sim_opts.seed, "RNG seed");
  sim_cmd->add_option("--target-snr-db", sim_opts.target_snr_db, "Rescale every target to this SNR over noise");
  sim_cmd->add_option("-o,--output", sim_output, "Output file (.csv for text, otherwise binary)")->required();

  std::string convert_in;
  std::string convert_out;
  int elements = 0;
  int pulses = 0;
  auto* convert_cmd = app.add_subcommand("convert", "Convert a CPI file between binary and CSV");
  convert_cmd->add_option("input", convert_in, "Input file")->required()->check(CLI::ExistingFile);
  convert_cmd->add_option("output", convert_out, "Output file")->required();
  convert_cmd->add_option("--elements", elements, "Array elements")->required();
  convert_cmd->add_option("--pulses", pulses, "Pulses per CPI")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run_cmd) return run(run_opts, bgvcf::pipeline::Outputs::all());
    if (*screen_cmd) return run(screen_opts, bgvcf::pipeline::Outputs::screening_only());
    if (*metrics_cmd) return run(metric_opts, bgvcf::pipeline::Outputs::metrics_only());
    if (*sim_cmd) {
      const auto config = resolve(sim_opts);
      const auto dataset = bgvcf::sim::simulate(config.scenario, config.targets);
      bgvcf::io::write_cpi_file(sim_output, dataset);
      std::cout << "wrote " << dataset.snapshots.size() << " snapshots to " << sim_output << '\n';
      return 0;
    }
    if (*convert_cmd) {
      bgvcf::io::convert_cpi_file(convert_in, convert_out, elements, pulses);
      return 0;
    }
  } catch (const bgvcf::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const bgvcf::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const bgvcf::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
