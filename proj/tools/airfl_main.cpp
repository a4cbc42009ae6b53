// airfl: configuration-driven simulator for over-the-air federated learning
// with joint uplink-downlink transceiver optimization.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "airfl/config.hpp"
#include "airfl/data_io.hpp"
#include "airfl/experiment.hpp"

namespace {

int do_run(const std::string& config_path,
           const std::vector<std::string>& overrides, bool sweep) {
  const airfl::ExperimentConfig config =
      airfl::load_config(config_path, overrides);
  if (sweep) {
    const auto summaries = airfl::run_sweep(config);
    std::cout << "sweep finished: " << summaries.size()
              << " cells written under " << config.output_dir << "\n";
    for (const auto& s : summaries) {
      std::printf("  %-24s final_loss=%.6g final_accuracy=%.4g mse=%.4g\n",
                  s.spec.name().c_str(), s.final_loss, s.final_accuracy,
                  s.mse_avg_analytic_mean);
    }
  } else {
    const auto summary = airfl::run_experiment(config);
    std::printf(
        "run %s finished: rounds=%d final_loss=%.6g final_accuracy=%.4g "
        "mean_mse=%.4g\n",
        summary.spec.name().c_str(), summary.rounds, summary.final_loss,
        summary.final_accuracy, summary.mse_avg_analytic_mean);
  }
  return 0;
}

int do_validate(const std::string& config_path,
                const std::vector<std::string>& overrides) {
  const airfl::ExperimentConfig config =
      airfl::load_config(config_path, overrides);
  const airfl::ValidationReport report = airfl::validate_config(config);
  for (const std::string& line : report.resolved) {
    std::cout << line << "\n";
  }
  if (!report.ok()) {
    std::cerr << "config invalid:\n";
    for (const std::string& err : report.errors) {
      std::cerr << "  " << err << "\n";
    }
    return 1;
  }
  std::cout << "config ok\n";
  return 0;
}

int do_synthdata(const std::string& out_dir, int train_n, int test_n,
                 std::uint64_t seed) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const airfl::LabeledDataset train =
      airfl::make_synthetic_digits(train_n, seed);
  const airfl::LabeledDataset test =
      airfl::make_synthetic_digits(test_n, seed + 1);
  airfl::write_idx(train, out_dir + "/train-images-idx3-ubyte",
                   out_dir + "/train-labels-idx1-ubyte");
  airfl::write_idx(test, out_dir + "/t10k-images-idx3-ubyte",
                   out_dir + "/t10k-labels-idx1-ubyte");
  std::cout << "wrote " << train_n << " train and " << test_n
            << " test samples to " << out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Over-the-air federated learning simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;

  auto add_config_options = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config file")->required();
    cmd->add_option("--set", overrides,
                    "dotted-key override, e.g. --set fl.num_antennas=2");
  };

  CLI::App* run_cmd =
      app.add_subcommand("run", "single training run from the config");
  add_config_options(run_cmd);

  CLI::App* sweep_cmd = app.add_subcommand(
      "sweep", "grid over sweep.num_antennas x sweep.server_power_dbw x seeds");
  add_config_options(sweep_cmd);

  CLI::App* validate_cmd = app.add_subcommand(
      "validate", "check the config and echo resolved linear units");
  add_config_options(validate_cmd);

  bool full_selftest = false;
  CLI::App* selftest_cmd = app.add_subcommand(
      "selftest", "run the dataset-free consistency checks");
  selftest_cmd->add_flag("--full", full_selftest,
                         "larger Monte-Carlo sample sizes");

  std::string synth_dir = "data/synthetic";
  int synth_train = 60000;
  int synth_test = 10000;
  std::uint64_t synth_seed = 7;
  CLI::App* synth_cmd = app.add_subcommand(
      "synthdata", "write a synthetic digit-like dataset in IDX format");
  synth_cmd->add_option("--out", synth_dir, "output directory");
  synth_cmd->add_option("--train-n", synth_train, "training samples");
  synth_cmd->add_option("--test-n", synth_test, "test samples");
  synth_cmd->add_option("--seed", synth_seed, "generator seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run_cmd->parsed()) return do_run(config_path, overrides, false);
    if (sweep_cmd->parsed()) return do_run(config_path, overrides, true);
    if (validate_cmd->parsed()) return do_validate(config_path, overrides);
    if (selftest_cmd->parsed()) {
      return airfl::run_selftest(std::cout, !full_selftest) == 0 ? 0 : 1;
    }
    if (synth_cmd->parsed()) {
      return do_synthdata(synth_dir, synth_train, synth_test, synth_seed);
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
