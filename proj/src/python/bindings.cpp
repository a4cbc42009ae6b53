#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "airfl/air_sim.hpp"
#include "airfl/channel.hpp"
#include "airfl/data_io.hpp"
#include "airfl/dc_solver.hpp"
#include "airfl/fl_train.hpp"
#include "airfl/gradient_codec.hpp"
#include "airfl/rng.hpp"
#include "airfl/transceiver.hpp"

namespace py = pybind11;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Over-the-air federated learning simulator core";

  py::class_<airfl::Rng>(m, "Rng")
      .def(py::init<std::uint64_t>(), py::arg("seed"))
      .def("uniform", [](airfl::Rng& rng) { return rng.uniform(); })
      .def("normal", &airfl::Rng::normal)
      .def("complex_normal", &airfl::Rng::complex_normal)
      .def("fork", &airfl::Rng::fork, py::arg("key"));

  py::class_<airfl::PlacementRegion>(m, "PlacementRegion")
      .def(py::init<>())
      .def_readwrite("x_min", &airfl::PlacementRegion::x_min)
      .def_readwrite("x_max", &airfl::PlacementRegion::x_max)
      .def_readwrite("y_min", &airfl::PlacementRegion::y_min)
      .def_readwrite("y_max", &airfl::PlacementRegion::y_max)
      .def_readwrite("height", &airfl::PlacementRegion::height);

  py::class_<airfl::Geometry>(m, "Geometry")
      .def(py::init<>())
      .def_readwrite("server", &airfl::Geometry::server)
      .def_readwrite("nodes", &airfl::Geometry::nodes)
      .def("distance_to_server", &airfl::Geometry::distance_to_server);

  py::class_<airfl::ChannelConfig>(m, "ChannelConfig")
      .def(py::init<>())
      .def_readwrite("num_antennas", &airfl::ChannelConfig::num_antennas)
      .def_readwrite("num_nodes", &airfl::ChannelConfig::num_nodes)
      .def_readwrite("c0", &airfl::ChannelConfig::c0)
      .def_readwrite("gamma0", &airfl::ChannelConfig::gamma0)
      .def_readwrite("kappa", &airfl::ChannelConfig::kappa)
      .def_readwrite("rician_chi", &airfl::ChannelConfig::rician_chi)
      .def_readwrite("sigma_s_sq", &airfl::ChannelConfig::sigma_s_sq)
      .def_readwrite("sigma_k_sq", &airfl::ChannelConfig::sigma_k_sq)
      .def_readwrite("node_power", &airfl::ChannelConfig::node_power)
      .def_readwrite("server_power", &airfl::ChannelConfig::server_power)
      .def_readwrite("reciprocal", &airfl::ChannelConfig::reciprocal);

  py::class_<airfl::ChannelRealization>(m, "ChannelRealization")
      .def_readonly("H", &airfl::ChannelRealization::H)
      .def_readonly("Q", &airfl::ChannelRealization::Q)
      .def_readonly("sigma_s_sq", &airfl::ChannelRealization::sigma_s_sq)
      .def_readonly("sigma_k_sq", &airfl::ChannelRealization::sigma_k_sq)
      .def_readonly("node_power", &airfl::ChannelRealization::node_power)
      .def_readonly("server_power", &airfl::ChannelRealization::server_power);

  m.def("path_loss", &airfl::path_loss, py::arg("distance"), py::arg("c0"),
        py::arg("gamma0"), py::arg("kappa"));
  m.def("sample_rician", &airfl::sample_rician, py::arg("rng"),
        py::arg("chi"));
  m.def("sample_geometry", &airfl::sample_geometry, py::arg("rng"),
        py::arg("server"), py::arg("region"), py::arg("num_nodes"));
  m.def("draw_realization", &airfl::draw_realization, py::arg("rng"),
        py::arg("geometry"), py::arg("config"));

  py::class_<airfl::GradientBatch>(m, "GradientBatch")
      .def_readonly("g", &airfl::GradientBatch::g)
      .def_readonly("g_bar", &airfl::GradientBatch::g_bar)
      .def_readonly("delta", &airfl::GradientBatch::delta)
      .def_readonly("degenerate", &airfl::GradientBatch::degenerate)
      .def_readonly("S", &airfl::GradientBatch::S)
      .def_readonly("c", &airfl::GradientBatch::c);

  m.def(
      "normalize",
      [](const Eigen::MatrixXd& g) {
        airfl::NormalizedGradients coded = airfl::normalize(g);
        return py::make_tuple(coded.symbols, coded.stats);
      },
      py::arg("gradients"),
      "Returns (symbols, stats) for the K x d gradient matrix");
  m.def("denormalize", &airfl::denormalize, py::arg("received"),
        py::arg("g_bar"));
  m.def("denormalize_complex", &airfl::denormalize_complex,
        py::arg("received"), py::arg("g_bar"));

  py::class_<airfl::SolverOptions>(m, "SolverOptions")
      .def(py::init<>())
      .def_readwrite("residual_tol", &airfl::SolverOptions::residual_tol)
      .def_readwrite("inner_grad_tol", &airfl::SolverOptions::inner_grad_tol)
      .def_readwrite("max_outer", &airfl::SolverOptions::max_outer)
      .def_readwrite("max_inner", &airfl::SolverOptions::max_inner)
      .def_readwrite("penalty_init_fraction",
                     &airfl::SolverOptions::penalty_init_fraction)
      .def_readwrite("penalty_growth", &airfl::SolverOptions::penalty_growth)
      .def_readwrite("stall_threshold",
                     &airfl::SolverOptions::stall_threshold);

  py::class_<airfl::SolverIterate>(m, "SolverIterate")
      .def_readonly("iteration", &airfl::SolverIterate::iteration)
      .def_readonly("objective", &airfl::SolverIterate::objective)
      .def_readonly("residual", &airfl::SolverIterate::residual)
      .def_readonly("penalty_weight", &airfl::SolverIterate::penalty_weight)
      .def_readonly("penalized", &airfl::SolverIterate::penalized);

  py::class_<airfl::SolverTrace>(m, "SolverTrace")
      .def_readonly("iterations", &airfl::SolverTrace::iterations)
      .def_readonly("converged", &airfl::SolverTrace::converged)
      .def_readonly("final_penalty_weight",
                    &airfl::SolverTrace::final_penalty_weight)
      .def_readonly("conditioning_warning",
                    &airfl::SolverTrace::conditioning_warning)
      .def("iteration_count", &airfl::SolverTrace::iteration_count);

  m.def(
      "solve_max_min",
      [](const Eigen::MatrixXcd& c, const Eigen::VectorXd& w,
         const airfl::SolverOptions& opts) {
        airfl::LiftedProblem problem{c, w};
        airfl::SolverResult res = airfl::solve(problem, opts);
        return py::make_tuple(res.x, res.value, res.trace);
      },
      py::arg("c"), py::arg("w"), py::arg("opts") = airfl::SolverOptions{},
      "Minimizes max_k w_k/|c_k^H x|^2 over unit vectors; returns "
      "(x, value, trace)");

  py::class_<airfl::TransceiverDesign>(m, "TransceiverDesign")
      .def_readonly("u", &airfl::TransceiverDesign::u)
      .def_readonly("v", &airfl::TransceiverDesign::v)
      .def_readonly("beta", &airfl::TransceiverDesign::beta)
      .def_readonly("phi", &airfl::TransceiverDesign::phi)
      .def_readonly("a", &airfl::TransceiverDesign::a)
      .def_readonly("b", &airfl::TransceiverDesign::b)
      .def_readonly("M", &airfl::TransceiverDesign::M)
      .def_readonly("mse", &airfl::TransceiverDesign::mse);

  m.def(
      "design",
      [](const airfl::ChannelRealization& channel,
         const airfl::GradientBatch& stats, const airfl::SolverOptions& opts) {
        airfl::DesignResult res = airfl::design(channel, stats, opts);
        return py::make_tuple(res.design, res.trace_u, res.trace_v);
      },
      py::arg("channel"), py::arg("stats"),
      py::arg("opts") = airfl::SolverOptions{},
      "Joint uplink-downlink transceiver design; returns "
      "(design, trace_u, trace_v)");
  m.def("beta_for_power_budget", &airfl::beta_for_power_budget,
        py::arg("phi"), py::arg("c"), py::arg("sigma_s_sq"),
        py::arg("server_power"));
  m.def("node_mse", &airfl::node_mse, py::arg("design"), py::arg("channel"),
        py::arg("k"));
  m.def("expected_error_norm", &airfl::expected_error_norm, py::arg("design"),
        py::arg("channel"), py::arg("k"), py::arg("d"));

  py::class_<airfl::RoundTransmission>(m, "RoundTransmission")
      .def_readonly("received_z", &airfl::RoundTransmission::received_z)
      .def_readonly("error", &airfl::RoundTransmission::error)
      .def_readonly("measured_server_power",
                    &airfl::RoundTransmission::measured_server_power)
      .def_readonly("measured_node_power",
                    &airfl::RoundTransmission::measured_node_power);

  m.def("transmit_round", &airfl::transmit_round, py::arg("symbols"),
        py::arg("stats"), py::arg("design"), py::arg("channel"),
        py::arg("rng"), py::arg("noise_scale") = 1.0);

  py::class_<airfl::ForcingAudit>(m, "ForcingAudit")
      .def_readonly("residual", &airfl::ForcingAudit::residual)
      .def_readonly("degenerate_column",
                    &airfl::ForcingAudit::degenerate_column)
      .def_readonly("max_residual", &airfl::ForcingAudit::max_residual);

  m.def("audit_uniform_forcing", &airfl::audit_uniform_forcing,
        py::arg("design"), py::arg("channel"), py::arg("delta"));

  m.def("convergence_bound", &airfl::convergence_bound, py::arg("gap0"),
        py::arg("mu"), py::arg("rho"), py::arg("error_norms"));

  py::class_<airfl::LabeledDataset>(m, "LabeledDataset")
      .def_readonly("features", &airfl::LabeledDataset::features)
      .def_readonly("labels", &airfl::LabeledDataset::labels)
      .def("size", &airfl::LabeledDataset::size);

  m.def("load_idx", &airfl::load_idx, py::arg("images_path"),
        py::arg("labels_path"));
  m.def("make_synthetic_digits", &airfl::make_synthetic_digits,
        py::arg("num_samples"), py::arg("seed"));
  m.def(
      "shard_non_iid",
      [](const airfl::LabeledDataset& dataset, int num_nodes, int shard_size,
         std::uint64_t seed, bool shuffle_within_label) {
        airfl::Rng rng(seed);
        return airfl::shard_non_iid(dataset, num_nodes, shard_size, rng,
                                    shuffle_within_label);
      },
      py::arg("dataset"), py::arg("num_nodes"), py::arg("shard_size"),
      py::arg("seed") = 0, py::arg("shuffle_within_label") = false);

  py::register_exception<airfl::SolverError>(m, "SolverNonConvergence");
}
