#include <doctest.h>

#include <cmath>

#include "airfl/channel.hpp"

using namespace airfl;

TEST_SUITE("channel") {

TEST_CASE("path loss at the reference distance equals the reference gain") {
  CHECK(path_loss(1.0, 1e-3, 1.0, 2.2) == doctest::Approx(1e-3).epsilon(1e-12));
}

TEST_CASE("path loss follows the power law") {
  const double expected = 1e-3 * std::pow(10.0, -2.2);
  CHECK(path_loss(10.0, 1e-3, 1.0, 2.2) ==
        doctest::Approx(expected).epsilon(1e-12));
  CHECK(path_loss(10.0, 1e-3, 1.0, 2.2) == doctest::Approx(6.3096e-6).epsilon(1e-4));
}

TEST_CASE("path loss is monotonically decreasing in distance") {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const double d1 = 1.0 + 100.0 * rng.uniform();
    const double d2 = d1 + 0.1 + 100.0 * rng.uniform();
    CHECK(path_loss(d1, 1e-3, 1.0, 2.2) > path_loss(d2, 1e-3, 1.0, 2.2));
  }
}

TEST_CASE("path loss rejects non-positive distance") {
  CHECK_THROWS_AS(path_loss(0.0, 1e-3, 1.0, 2.2), std::domain_error);
  CHECK_THROWS_AS(path_loss(-3.0, 1e-3, 1.0, 2.2), std::domain_error);
}

TEST_CASE("rician factor at the line-of-sight limit is deterministic") {
  Rng rng(1);
  const std::complex<double> h = sample_rician(rng, 1e12);
  CHECK(h.real() == 1.0);
  CHECK(h.imag() == 0.0);
}

TEST_CASE("rician rejects negative factor") {
  Rng rng(1);
  CHECK_THROWS_AS(sample_rician(rng, -0.5), std::domain_error);
}

TEST_CASE("pure scatter fading has unit mean power") {
  Rng rng(2024);
  const int n = 100000;
  double power = 0.0;
  for (int i = 0; i < n; ++i) power += std::norm(sample_rician(rng, 0.0));
  power /= n;
  CHECK(power >= 0.99);
  CHECK(power <= 1.01);
}

TEST_CASE("unit rician factor splits power between paths") {
  Rng rng(2025);
  const int n = 100000;
  std::complex<double> mean{0.0, 0.0};
  double power = 0.0;
  for (int i = 0; i < n; ++i) {
    const std::complex<double> h = sample_rician(rng, 1.0);
    mean += h;
    power += std::norm(h);
  }
  mean /= static_cast<double>(n);
  CHECK(mean.real() == doctest::Approx(std::sqrt(0.5)).epsilon(0.015));
  CHECK(std::abs(mean.imag()) <= 0.01);
  CHECK(power / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("realization second moment matches the path loss") {
  // Single node at the origin against the server at (-50, 0, 10):
  // distance sqrt(2600), E|H|^2 = 1e-3 * 2600^(-1.1).
  Geometry geo;
  geo.server = {-50.0, 0.0, 10.0};
  geo.nodes = {{0.0, 0.0, 0.0}};
  CHECK(geo.distance_to_server(0) == doctest::Approx(std::sqrt(2600.0)));

  ChannelConfig cfg;
  cfg.num_antennas = 1;
  cfg.num_nodes = 1;
  const double expected = path_loss(std::sqrt(2600.0), cfg.c0, 1.0, cfg.kappa);
  CHECK(expected == doctest::Approx(1.76e-7).epsilon(0.01));

  Rng rng(31);
  double power = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const ChannelRealization chan = draw_realization(rng, geo, cfg);
    power += std::norm(chan.H(0, 0));
  }
  CHECK(power / n == doctest::Approx(expected).epsilon(0.02));
}

TEST_CASE("line-of-sight limit gives deterministic columns") {
  Geometry geo;
  geo.server = {-50.0, 0.0, 10.0};
  geo.nodes = {{3.0, 1.0, 0.0}};
  ChannelConfig cfg;
  cfg.num_antennas = 2;
  cfg.num_nodes = 1;
  cfg.rician_chi = 1e12;
  Rng rng(5);
  const ChannelRealization chan = draw_realization(rng, geo, cfg);
  const double amp =
      std::sqrt(path_loss(geo.distance_to_server(0), cfg.c0, 1.0, cfg.kappa));
  for (int ant = 0; ant < 2; ++ant) {
    CHECK(chan.H(ant, 0).real() == doctest::Approx(amp).epsilon(1e-14));
    CHECK(chan.H(ant, 0).imag() == 0.0);
    CHECK(chan.Q(ant, 0).real() == doctest::Approx(amp).epsilon(1e-14));
  }
}

TEST_CASE("identical seeds give bit-identical realizations") {
  ChannelConfig cfg;
  cfg.num_antennas = 3;
  cfg.num_nodes = 5;
  Rng geo_rng(88);
  const Geometry geo = sample_geometry(geo_rng, {-50.0, 0.0, 10.0}, {}, 5);
  Rng rng_a(99), rng_b(99);
  const ChannelRealization a = draw_realization(rng_a, geo, cfg);
  const ChannelRealization b = draw_realization(rng_b, geo, cfg);
  CHECK(a.H == b.H);
  CHECK(a.Q == b.Q);
}

TEST_CASE("uplink and downlink are independent unless reciprocal") {
  ChannelConfig cfg;
  cfg.num_antennas = 2;
  cfg.num_nodes = 4;
  Rng geo_rng(13);
  const Geometry geo = sample_geometry(geo_rng, {-50.0, 0.0, 10.0}, {}, 4);
  Rng rng(14);
  const ChannelRealization indep = draw_realization(rng, geo, cfg);
  CHECK(indep.H != indep.Q);

  cfg.reciprocal = true;
  Rng rng2(14);
  const ChannelRealization tied = draw_realization(rng2, geo, cfg);
  CHECK(tied.H == tied.Q);
}

TEST_CASE("sampled matrices stay finite and geometry stays in the region") {
  PlacementRegion region;
  Rng rng(321);
  for (int trial = 0; trial < 20; ++trial) {
    const Geometry geo =
        sample_geometry(rng, {-50.0, 0.0, 10.0}, region, 6);
    for (const auto& node : geo.nodes) {
      CHECK(node.x() >= region.x_min);
      CHECK(node.x() <= region.x_max);
      CHECK(node.y() >= region.y_min);
      CHECK(node.y() <= region.y_max);
      CHECK(node.z() == region.height);
    }
    ChannelConfig cfg;
    cfg.num_antennas = 4;
    cfg.num_nodes = 6;
    cfg.rician_chi = rng.uniform() * 5.0;
    const ChannelRealization chan = draw_realization(rng, geo, cfg);
    CHECK(chan.H.allFinite());
    CHECK(chan.Q.allFinite());
  }
}

TEST_CASE("config and geometry must agree on the node count") {
  Rng rng(3);
  const Geometry geo = sample_geometry(rng, {-50.0, 0.0, 10.0}, {}, 3);
  ChannelConfig cfg;
  cfg.num_antennas = 2;
  cfg.num_nodes = 4;
  CHECK_THROWS_AS(draw_realization(rng, geo, cfg), std::invalid_argument);
}

}  // TEST_SUITE
