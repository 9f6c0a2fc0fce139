#pragma once

// Plain dense Kalman filter coded straight from the standard equations, used
// to cross-check the block-structured update. Deliberately naive on purpose:
// the observation matrix is materialized, the innovation covariance is
// inverted outright, and nothing here is shared with the library update path.

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "swarmloc/estimator.hpp"

namespace oracle {

struct Dense {
  Eigen::VectorXd x;
  Eigen::MatrixXd P;
};

inline Dense from_state(const swarmloc::est::DriftState& s) {
  return Dense{s.x, s.P};
}

inline void propagate(Dense& f, const std::vector<Eigen::Matrix3d>& q) {
  for (std::size_t i = 0; i < q.size(); ++i)
    f.P.block<3, 3>(3 * i, 3 * i) += q[i];
}

// z_global measures x_j - x_i with additive noise of covariance r_global
inline void update(Dense& f, int i, int j, const Eigen::Vector3d& z_global,
                   const Eigen::Matrix3d& r_global) {
  const auto dim = f.x.size();
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(3, dim);
  H.block<3, 3>(0, 3 * i) = -Eigen::Matrix3d::Identity();
  H.block<3, 3>(0, 3 * j) = Eigen::Matrix3d::Identity();

  const Eigen::Matrix3d S = H * f.P * H.transpose() + r_global;
  const Eigen::Matrix3d S_inv = S.inverse();
  const Eigen::MatrixXd K = f.P * H.transpose() * S_inv;
  f.x += K * (z_global - H * f.x);
  f.P -= K * H * f.P;
  f.P = 0.5 * (f.P + f.P.transpose()).eval();
}

inline Eigen::Matrix3d random_rotation(std::mt19937_64& g) {
  std::uniform_real_distribution<double> u(-3.141592653589793,
                                           3.141592653589793);
  return (Eigen::AngleAxisd(u(g), Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(u(g), Eigen::Vector3d::UnitY()) *
          Eigen::AngleAxisd(u(g), Eigen::Vector3d::UnitX()))
      .toRotationMatrix();
}

inline Eigen::MatrixXd random_psd(std::mt19937_64& g, int dim, double scale,
                                  double ridge) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd a(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) a(r, c) = n(g);
  Eigen::MatrixXd p =
      scale * (a * a.transpose()) / static_cast<double>(dim) +
      ridge * Eigen::MatrixXd::Identity(dim, dim);
  return 0.5 * (p + p.transpose());
}

// one full random filter problem, expressed both ways: the library takes the
// body-frame measurement with the two odometry outputs, the oracle takes the
// globally lifted measurement
struct Instance {
  swarmloc::est::DriftState state;
  swarmloc::est::RelativeMeasurement m;
  Eigen::Vector3d odo_i, odo_j;
  Eigen::Vector3d z_global;
  Eigen::Matrix3d r_global;
};

inline Instance random_instance(std::mt19937_64& g, int n) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, n - 1);

  Instance ins;
  ins.state = swarmloc::est::DriftState::zero(n);
  ins.state.P = random_psd(g, 3 * n, 1.0, 1e-3);
  for (int k = 0; k < 3 * n; ++k) ins.state.x[k] = 0.1 * gauss(g);
  ins.state.epoch = 5;

  const int i = pick(g);
  int j = pick(g);
  while (j == i) j = pick(g);

  ins.m.observer = i;
  ins.m.target = j;
  ins.m.rot_global_to_body = random_rotation(g);
  ins.m.noise = random_psd(g, 3, 2.5e-3, 1e-5);
  for (int k = 0; k < 3; ++k) {
    ins.m.z[k] = gauss(g);
    ins.odo_i[k] = gauss(g);
    ins.odo_j[k] = gauss(g);
  }
  ins.m.stamp = 5;

  const Eigen::Matrix3d r_bg = ins.m.rot_global_to_body.transpose();
  ins.z_global = ins.odo_i + r_bg * ins.m.z - ins.odo_j;
  ins.r_global = r_bg * ins.m.noise * r_bg.transpose();
  return ins;
}

}  // namespace oracle
