// SPDX-License-Identifier: Apache-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "risfuse/geometry.hpp"

using namespace risfuse;

namespace {

NetworkLayout<double> paper_layout(Index k_sensors = 10) {
  // Deterministic sensor grid inside the [0,40]^2 field.
  NetworkLayout<double> layout;
  layout.sensor_positions.resize(k_sensors, 3);
  for (Index k = 0; k < k_sensors; ++k) {
    const double t = double(k) / double(k_sensors);
    layout.sensor_positions.row(k) << 5.0 + 30.0 * t, 35.0 - 25.0 * t, 0.0;
  }
  layout.ris_position << 40.0, 20.0, 5.0;
  layout.fc_position << 65.0, 40.0, 2.0;
  layout.ris_rows = 5;
  layout.ris_cols = 5;
  layout.n_fc_antennas = 16;
  return layout;
}

}  // namespace

TEST_CASE("path_loss: direct evaluations") {
  CHECK(path_loss(1.0, 2.0, 0.01, 1.0) == doctest::Approx(0.01).epsilon(1e-14));
  CHECK(path_loss(10.0, 2.0, 0.01, 1.0) == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK(path_loss(10.0, 4.0, 0.01, 1.0) == doctest::Approx(1e-6).epsilon(1e-12));
}

TEST_CASE("path_loss: domain errors") {
  CHECK_THROWS_AS(path_loss(0.0, 2.0, 0.01, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(path_loss(-1.0, 2.0, 0.01, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(path_loss(1.0, 2.0, 0.01, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(path_loss(1.0, 2.0, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("path_loss: monotone decreasing in distance and exponent beyond d0") {
  double prev = path_loss(1.5, 2.0, 0.01, 1.0);
  for (double d = 2.0; d < 100.0; d *= 1.7) {
    const double p = path_loss(d, 2.0, 0.01, 1.0);
    CHECK(p < prev);
    prev = p;
  }
  for (double d : {2.0, 5.0, 50.0}) {
    CHECK(path_loss(d, 3.0, 0.01, 1.0) < path_loss(d, 2.0, 0.01, 1.0));
    CHECK(path_loss(d, 4.0, 0.01, 1.0) < path_loss(d, 3.0, 0.01, 1.0));
  }
}

TEST_CASE("ula_steering: known vectors and unit modulus") {
  const auto broadside = ula_steering(0.0, 4);
  REQUIRE(broadside.size() == 4);
  for (Index i = 0; i < 4; ++i) CHECK(std::abs(broadside[i] - Cplx<double>(1, 0)) < 1e-15);

  const auto endfire = ula_steering(std::numbers::pi / 2, 2);
  CHECK(std::abs(endfire[0] - Cplx<double>(1, 0)) < 1e-12);
  CHECK(std::abs(endfire[1] - Cplx<double>(-1, 0)) < 1e-12);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-std::numbers::pi, std::numbers::pi);
  for (int rep = 0; rep < 20; ++rep) {
    const auto a = ula_steering(u(rng), 8);
    CHECK(a.squaredNorm() == doctest::Approx(8.0).epsilon(1e-12));
    for (Index i = 0; i < a.size(); ++i) CHECK(std::abs(std::abs(a[i]) - 1.0) < 1e-12);
  }
  CHECK_THROWS_AS(ula_steering(0.1, 0), std::invalid_argument);
}

TEST_CASE("upa_steering: degenerate grids and unit modulus") {
  const auto single = upa_steering(0.3, -0.7, 1, 1);
  REQUIRE(single.size() == 1);
  CHECK(std::abs(single[0] - Cplx<double>(1, 0)) < 1e-15);

  const auto flat = upa_steering(1.1, 0.0, 3, 3);
  for (Index i = 0; i < 9; ++i) CHECK(std::abs(flat[i] - Cplx<double>(1, 0)) < 1e-14);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.4, 1.4);
  for (int rep = 0; rep < 20; ++rep) {
    const auto a = upa_steering(u(rng), u(rng) / 2, 5, 5);
    CHECK(a.squaredNorm() == doctest::Approx(25.0).epsilon(1e-12));
    for (Index i = 0; i < a.size(); ++i) CHECK(std::abs(std::abs(a[i]) - 1.0) < 1e-12);
  }
}

TEST_CASE("upa_steering: row-major phase layout") {
  const double az = 0.4, el = 0.6;
  const auto a = upa_steering(az, el, 3, 4);
  const double pr = std::numbers::pi * std::sin(el) * std::sin(az);
  const double pc = std::numbers::pi * std::sin(el) * std::cos(az);
  for (Index p = 0; p < 3; ++p)
    for (Index q = 0; q < 4; ++q)
      CHECK(std::abs(a[p * 4 + q] - std::polar(1.0, pr * double(p) + pc * double(q))) < 1e-13);
}

TEST_CASE("compute_angles: axis-aligned geometries") {
  NetworkLayout<double> layout;
  layout.sensor_positions.resize(2, 3);
  layout.sensor_positions.row(0) << 0.0, 0.0, 0.0;   // directly below the RIS
  layout.sensor_positions.row(1) << 10.0, 0.0, 5.0;  // equal height, due east
  layout.ris_position << 0.0, 0.0, 5.0;
  layout.fc_position << 20.0, 0.0, 5.0;
  const auto angles = compute_angles(layout);
  CHECK(angles.sensor_at_ris(0, 1) == doctest::Approx(-std::numbers::pi / 2).epsilon(1e-12));
  CHECK(angles.sensor_at_ris(1, 1) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("compute_angles: paper layout departure azimuth") {
  const auto layout = paper_layout();
  const auto angles = compute_angles(layout);
  CHECK(std::isfinite(angles.fc_arrival));
  CHECK(angles.ris_departure[0] == doctest::Approx(std::atan2(20.0, 25.0)).epsilon(1e-12));
  for (Index k = 0; k < layout.n_sensors(); ++k) {
    CHECK(std::isfinite(angles.sensor_at_ris(k, 0)));
    CHECK(std::abs(angles.sensor_at_ris(k, 1)) <= std::numbers::pi / 2);
  }
}

TEST_CASE("compute_angles: invariant under common translation") {
  auto layout = paper_layout();
  const auto base = compute_angles(layout);
  const Eigen::Vector3d shift(-17.0, 230.0, 4.25);
  layout.sensor_positions.rowwise() += shift.transpose();
  layout.ris_position += shift;
  layout.fc_position += shift;
  const auto moved = compute_angles(layout);
  CHECK((moved.sensor_at_ris - base.sensor_at_ris).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((moved.ris_departure - base.ris_departure).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(moved.fc_arrival == doctest::Approx(base.fc_arrival).epsilon(1e-12));
}

TEST_CASE("compute_angles: coincident positions rejected") {
  auto layout = paper_layout();
  layout.sensor_positions.row(0) = layout.ris_position.transpose();
  CHECK_THROWS_AS(compute_angles(layout), std::invalid_argument);
}

TEST_CASE("compute_path_gains: all reference distances give mu") {
  NetworkLayout<double> layout;
  layout.sensor_positions.resize(1, 3);
  layout.sensor_positions.row(0) << 0.5, std::sqrt(3.0) / 2.0, 0.0;
  layout.ris_position << 0.0, 0.0, 0.0;
  layout.fc_position << 1.0, 0.0, 0.0;
  const auto gains = compute_path_gains(layout, 0.01, 1.0, 2.0, 4.0);
  CHECK(gains.d_wf[0] == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(gains.d_wr[0] == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(gains.d_rf == doctest::Approx(0.01).epsilon(1e-12));
}

TEST_CASE("compute_path_gains: direct link at 10 m") {
  NetworkLayout<double> layout;
  layout.sensor_positions.resize(1, 3);
  layout.sensor_positions.row(0) << 55.0, 40.0, 2.0;  // 10 m from the FC
  layout.ris_position << 40.0, 20.0, 5.0;
  layout.fc_position << 65.0, 40.0, 2.0;
  const auto gains = compute_path_gains(layout, 0.01, 1.0, 2.0, 4.0);
  CHECK(gains.d_wf[0] == doctest::Approx(1e-6).epsilon(1e-12));
}

TEST_CASE("compute_path_gains: paper RIS-FC link") {
  // |ris - fc| = sqrt(25^2 + 20^2 + 3^2) = sqrt(1034); with nu = 2 the gain is
  // mu / 1034 exactly.
  const auto layout = paper_layout();
  const auto gains = compute_path_gains(layout, 0.01, 1.0, 2.0, 4.0);
  CHECK(gains.d_rf == doctest::Approx(0.01 / 1034.0).epsilon(1e-12));
}

TEST_CASE("compute_path_gains: sub-reference distances clamp to d0") {
  NetworkLayout<double> layout;
  layout.sensor_positions.resize(1, 3);
  layout.sensor_positions.row(0) << 0.2, 0.0, 0.0;  // 0.2 m from the RIS
  layout.ris_position << 0.0, 0.0, 0.0;
  layout.fc_position << 10.0, 0.0, 0.0;
  const auto gains = compute_path_gains(layout, 0.01, 1.0, 2.0, 4.0);
  CHECK(gains.d_wr[0] == doctest::Approx(0.01).epsilon(1e-12));  // no amplification
}
