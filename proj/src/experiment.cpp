#include "airfl/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "airfl/air_sim.hpp"
#include "airfl/data_io.hpp"
#include "airfl/gradient_codec.hpp"
#include "airfl/transceiver.hpp"

namespace airfl {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kGeometryStream = 0x6E0;
constexpr std::uint64_t kShardStream = 0x51A;
constexpr std::uint64_t kTaskStream = 0x7A5;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_power_dbw(double dbw) {
  // Trim trailing zeros so directory names stay readable.
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%g", dbw);
  return buf;
}

void write_atomically(const fs::path& path, const std::string& contents) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << contents;
  }
  fs::rename(tmp, path);
}

std::string rounds_csv(const std::vector<RoundLog>& rounds) {
  std::ostringstream os;
  os << "round,train_loss_avg,test_accuracy_avg,mse_avg_analytic,"
        "mse_avg_empirical,mse_max,phi,beta,sca_iters_u,sca_iters_v\n";
  for (const RoundLog& r : rounds) {
    os << r.round << ',' << format_double(r.train_loss_avg) << ','
       << format_double(r.test_accuracy_avg) << ','
       << format_double(r.mse_avg_analytic) << ','
       << format_double(r.mse_avg_empirical) << ','
       << format_double(r.mse_max) << ',' << format_double(r.phi) << ','
       << format_double(r.beta) << ',' << r.sca_iters_u << ','
       << r.sca_iters_v << '\n';
  }
  return os.str();
}

std::string traces_csv(const TrainResult& result) {
  std::ostringstream os;
  os << "round,subproblem,iteration,objective,residual,penalty_weight\n";
  for (std::size_t round = 0; round < result.traces_u.size(); ++round) {
    for (int side = 0; side < 2; ++side) {
      const SolverTrace& trace =
          side == 0 ? result.traces_u[round] : result.traces_v[round];
      for (const SolverIterate& it : trace.iterations) {
        os << (round + 1) << ',' << (side == 0 ? 'u' : 'v') << ','
           << it.iteration << ',' << format_double(it.objective) << ','
           << format_double(it.residual) << ','
           << format_double(it.penalty_weight) << '\n';
      }
    }
  }
  return os.str();
}

struct MnistData {
  std::shared_ptr<const LabeledDataset> train;
  std::shared_ptr<const LabeledDataset> test;
};

MnistData load_mnist(const ExperimentConfig& config) {
  MnistData data;
  data.train = std::make_shared<const LabeledDataset>(
      load_idx(config.train_images, config.train_labels));
  data.test = std::make_shared<const LabeledDataset>(
      load_idx(config.test_images, config.test_labels));
  return data;
}

std::unique_ptr<TrainingTask> build_task(const ExperimentConfig& config,
                                         std::uint64_t seed,
                                         const MnistData* mnist) {
  if (config.task == "ridge") {
    return std::make_unique<RidgeTask>(RidgeTask::random(
        config.num_nodes, config.ridge.shard_size, config.ridge.dim,
        config.ridge.ridge_weight, Rng::derive_seed(seed, kTaskStream)));
  }
  Rng shard_rng(Rng::derive_seed(seed, kShardStream));
  std::vector<Shard> shards =
      shard_non_iid(*mnist->train, config.num_nodes, config.shard_size,
                    shard_rng, config.shuffle_within_label);
  return std::make_unique<LogisticTask>(mnist->train, mnist->test,
                                        std::move(shards));
}

CellSummary run_cell_impl(const ExperimentConfig& config, const CellSpec& spec,
                          const MnistData* mnist) {
  Rng geometry_rng(Rng::derive_seed(spec.seed, kGeometryStream));
  const Geometry geometry = sample_geometry(
      geometry_rng, config.server_position, config.region, config.num_nodes);

  const std::unique_ptr<TrainingTask> task = build_task(config, spec.seed, mnist);

  TrainOptions opts;
  opts.rounds = config.rounds;
  opts.eta = config.eta;
  opts.seed = spec.seed;
  opts.noise_scale = config.noise_scale;
  opts.solver = config.solver;
  opts.eval_workers = config.workers;

  const ChannelConfig channel_cfg =
      config.channel_config(spec.num_antennas, spec.server_power_dbw);
  const TrainResult result = train(*task, geometry, channel_cfg, opts);

  const fs::path cell_dir = fs::path(config.output_dir) / spec.name();
  fs::create_directories(cell_dir);
  write_atomically(cell_dir / "rounds.csv", rounds_csv(result.rounds));
  write_atomically(cell_dir / "traces.csv", traces_csv(result));
  ExperimentConfig echoed = config;
  echoed.num_antennas = spec.num_antennas;
  echoed.server_power_dbw = spec.server_power_dbw;
  echoed.seeds = {spec.seed};
  write_atomically(cell_dir / "resolved_config.json", config_to_json(echoed));

  CellSummary summary;
  summary.spec = spec;
  summary.rounds = static_cast<int>(result.rounds.size());
  const RoundLog& last = result.rounds.back();
  summary.final_loss = last.train_loss_avg;
  summary.final_accuracy = last.test_accuracy_avg;
  double analytic = 0.0, empirical = 0.0;
  for (const RoundLog& r : result.rounds) {
    analytic += r.mse_avg_analytic;
    empirical += r.mse_avg_empirical;
  }
  summary.mse_avg_analytic_mean = analytic / summary.rounds;
  summary.mse_avg_empirical_mean = empirical / summary.rounds;
  return summary;
}

}  // namespace

std::string CellSpec::name() const {
  return "N" + std::to_string(num_antennas) + "_Ps" +
         format_power_dbw(server_power_dbw) + "dBW_seed" +
         std::to_string(seed);
}

CellSummary run_cell(const ExperimentConfig& config, const CellSpec& spec) {
  if (config.task == "mnist") {
    const MnistData data = load_mnist(config);
    return run_cell_impl(config, spec, &data);
  }
  return run_cell_impl(config, spec, nullptr);
}

CellSummary run_experiment(const ExperimentConfig& config) {
  const ValidationReport report = validate_config(config);
  if (!report.ok()) {
    std::string joined = "invalid config:";
    for (const std::string& err : report.errors) joined += "\n  " + err;
    throw std::runtime_error(joined);
  }
  CellSpec spec{config.num_antennas, config.server_power_dbw,
                config.seeds.front()};
  return run_cell(config, spec);
}

std::vector<CellSummary> run_sweep(const ExperimentConfig& config) {
  const ValidationReport report = validate_config(config);
  if (!report.ok()) {
    std::string joined = "invalid config:";
    for (const std::string& err : report.errors) joined += "\n  " + err;
    throw std::runtime_error(joined);
  }

  std::vector<int> antenna_axis = config.sweep_num_antennas;
  if (antenna_axis.empty()) antenna_axis = {config.num_antennas};
  std::vector<double> power_axis = config.sweep_server_power_dbw;
  if (power_axis.empty()) power_axis = {config.server_power_dbw};

  std::vector<CellSpec> cells;
  for (int n : antenna_axis) {
    for (double p : power_axis) {
      for (std::uint64_t seed : config.seeds) {
        cells.push_back({n, p, seed});
      }
    }
  }

  MnistData mnist;
  const MnistData* mnist_ptr = nullptr;
  if (config.task == "mnist") {
    mnist = load_mnist(config);
    mnist_ptr = &mnist;
  }

  std::vector<CellSummary> summaries(cells.size());
  std::vector<std::string> failures(cells.size());
  std::atomic<std::size_t> next{0};
  int workers = config.workers > 0
                    ? config.workers
                    : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min<int>(workers, static_cast<int>(cells.size())));

  auto worker_loop = [&]() {
    for (std::size_t idx = next.fetch_add(1); idx < cells.size();
         idx = next.fetch_add(1)) {
      try {
        summaries[idx] = run_cell_impl(config, cells[idx], mnist_ptr);
      } catch (const std::exception& err) {
        failures[idx] = err.what();
      }
    }
  };
  if (workers == 1) {
    worker_loop();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker_loop);
    for (auto& t : pool) t.join();
  }

  for (std::size_t idx = 0; idx < cells.size(); ++idx) {
    if (!failures[idx].empty()) {
      throw std::runtime_error("cell " + cells[idx].name() +
                               " failed: " + failures[idx]);
    }
  }

  std::ostringstream os;
  os << "num_antennas,server_power_dbw,seed,final_loss,final_accuracy,"
        "mse_avg_analytic_mean,mse_avg_empirical_mean,rounds\n";
  for (const CellSummary& s : summaries) {
    os << s.spec.num_antennas << ',' << format_double(s.spec.server_power_dbw)
       << ',' << s.spec.seed << ',' << format_double(s.final_loss) << ','
       << format_double(s.final_accuracy) << ','
       << format_double(s.mse_avg_analytic_mean) << ','
       << format_double(s.mse_avg_empirical_mean) << ',' << s.rounds << '\n';
  }
  fs::create_directories(config.output_dir);
  write_atomically(fs::path(config.output_dir) / "summary.csv", os.str());
  return summaries;
}

namespace {

struct SelfCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

GradientBatch random_stats(Rng& rng, int k, int d,
                           Eigen::MatrixXd* symbols_out) {
  Eigen::MatrixXd g(k, d);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = rng.normal() + 0.3;
  NormalizedGradients coded = normalize(g);
  if (symbols_out) *symbols_out = coded.symbols;
  return coded.stats;
}

}  // namespace

int run_selftest(std::ostream& os, bool quick) {
  std::vector<SelfCheck> checks;
  char detail[192];

  // Path loss reference points.
  {
    SelfCheck check{"path_loss reference values"};
    const double at_ref = path_loss(1.0, 1e-3, 1.0, 2.2);
    const double at_10m = path_loss(10.0, 1e-3, 1.0, 2.2);
    check.passed = std::abs(at_ref - 1e-3) < 1e-18 &&
                   std::abs(at_10m - 1e-3 * std::pow(10.0, -2.2)) < 1e-12 &&
                   at_10m < at_ref;
    std::snprintf(detail, sizeof(detail), "PL(1m)=%.6g PL(10m)=%.6g", at_ref,
                  at_10m);
    check.detail = detail;
    checks.push_back(check);
  }

  // Designed transceivers satisfy the forcing identity and power budgets.
  {
    SelfCheck check{"uniform forcing + power saturation on designed rounds"};
    double worst_forcing = 0.0, worst_power = 0.0, worst_budget = 0.0;
    const int trials = quick ? 3 : 10;
    bool ok = true;
    for (int trial = 0; trial < trials && ok; ++trial) {
      Rng rng(1000 + static_cast<std::uint64_t>(trial));
      const int n = (trial % 2 == 0) ? 2 : 4;
      ChannelConfig cfg;
      cfg.num_antennas = n;
      cfg.num_nodes = 8;
      cfg.server_power = 10.0;
      Geometry geo = sample_geometry(rng, {-50.0, 0.0, 10.0}, {}, 8);
      ChannelRealization chan = draw_realization(rng, geo, cfg);
      GradientBatch stats = random_stats(rng, 8, 256, nullptr);
      DesignResult designed = design(chan, stats);
      ForcingAudit audit =
          audit_uniform_forcing(designed.design, chan, stats.delta);
      worst_forcing = std::max(worst_forcing, audit.max_residual);
      double max_node = 0.0;
      for (int j = 0; j < 8; ++j) {
        max_node = std::max(
            max_node, std::norm(designed.design.b(j)) / chan.node_power(j));
      }
      worst_power = std::max(worst_power, std::abs(max_node - 1.0));
      const double broadcast =
          server_broadcast_power(designed.design, chan, stats.S);
      worst_budget = std::max(
          worst_budget, std::abs(broadcast - chan.server_power) /
                            chan.server_power);
      ok = audit.max_residual <= 1e-8 && std::abs(max_node - 1.0) <= 1e-6 &&
           worst_budget <= 1e-6;
    }
    check.passed = ok;
    std::snprintf(detail, sizeof(detail),
                  "max forcing residual %.3g, node power slack %.3g, budget "
                  "error %.3g",
                  worst_forcing, worst_power, worst_budget);
    check.detail = detail;
    checks.push_back(check);
  }

  // Closed-form solver cases.
  {
    SelfCheck check{"dc solver closed-form cases"};
    Rng rng(77);
    LiftedProblem single;
    single.c.resize(3, 1);
    for (int i = 0; i < 3; ++i) single.c(i, 0) = rng.complex_normal();
    single.w = Eigen::VectorXd::Constant(1, 2.0);
    SolverResult res = solve(single);
    const double expect = 2.0 / single.c.col(0).squaredNorm();
    const double overlap =
        std::abs((single.c.col(0).normalized().adjoint() * res.x)(0));
    check.passed = std::abs(res.value - expect) <= 1e-6 * expect &&
                   overlap >= 1.0 - 1e-6;
    std::snprintf(detail, sizeof(detail), "value %.6g vs %.6g, overlap %.8f",
                  res.value, expect, overlap);
    check.detail = detail;
    checks.push_back(check);
  }

  // Monte-Carlo error statistics against the analytic per-node MSE.
  {
    SelfCheck check{"simulated error energy matches analytic MSE"};
    Rng rng(4242);
    const int k = 6, n = 2, d = quick ? 20000 : 100000;
    ChannelConfig cfg;
    cfg.num_antennas = n;
    cfg.num_nodes = k;
    Geometry geo = sample_geometry(rng, {-50.0, 0.0, 10.0}, {}, k);
    ChannelRealization chan = draw_realization(rng, geo, cfg);
    Eigen::MatrixXd symbols;
    Eigen::MatrixXd g(k, d);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < d; ++j) g(i, j) = rng.normal();
    NormalizedGradients coded = normalize(g);
    DesignResult designed = design(chan, coded.stats);
    RoundTransmission tx = transmit_round(coded.symbols, coded.stats,
                                          designed.design, chan, rng, 1.0);
    double worst = 0.0;
    for (int j = 0; j < k; ++j) {
      const double expected = expected_error_norm(designed.design, chan, j, d);
      const double measured = tx.error.row(j).squaredNorm();
      worst = std::max(worst, std::abs(measured - expected) / expected);
    }
    check.passed = worst <= 0.03;
    std::snprintf(detail, sizeof(detail),
                  "worst relative deviation %.4f over %d nodes x %d symbols",
                  worst, k, d);
    check.detail = detail;
    checks.push_back(check);
  }

  // Codec round trip without noise.
  {
    SelfCheck check{"codec round trip"};
    Rng rng(9);
    Eigen::MatrixXd g(4, 100);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 100; ++j) g(i, j) = 3.0 * rng.normal() - 1.0;
    NormalizedGradients coded = normalize(g);
    Eigen::VectorXcd superposed = Eigen::VectorXcd::Zero(100);
    for (int i = 0; i < 4; ++i) {
      superposed += (coded.stats.delta(i) * coded.symbols.row(i).transpose())
                        .cast<std::complex<double>>();
    }
    const Eigen::VectorXd decoded = denormalize(superposed, coded.stats.g_bar);
    const Eigen::VectorXd truth = g.colwise().mean();
    const double err = (decoded - truth).cwiseAbs().maxCoeff();
    check.passed = err <= 1e-9;
    std::snprintf(detail, sizeof(detail), "max round-trip error %.3g", err);
    check.detail = detail;
    checks.push_back(check);
  }

  int failures = 0;
  for (const SelfCheck& check : checks) {
    os << (check.passed ? "[ok]   " : "[FAIL] ") << check.name << ": "
       << check.detail << '\n';
    if (!check.passed) ++failures;
  }
  os << (failures == 0 ? "selftest passed" : "selftest FAILED") << " ("
     << checks.size() - failures << "/" << checks.size() << " checks)\n";
  return failures;
}

}  // namespace airfl
