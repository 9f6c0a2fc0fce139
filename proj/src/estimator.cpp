#include "swarmloc/estimator.hpp"

#include <stdexcept>

namespace swarmloc::est {

namespace {

void check_id(const DriftState& s, int i, const char* what) {
  if (i < 0 || i >= s.n)
    throw std::invalid_argument(std::string(what) + " id out of range");
}

}  // namespace

DriftState DriftState::zero(int n) {
  if (n < 2) throw std::invalid_argument("need at least 2 drones");
  DriftState s;
  s.n = n;
  s.x = Eigen::VectorXd::Zero(3 * n);
  s.P = Eigen::MatrixXd::Zero(3 * n, 3 * n);
  s.epoch = 0;
  return s;
}

ProcessNoise ProcessNoise::isotropic(int n, double sigma_v) {
  if (sigma_v < 0.0) throw std::invalid_argument("sigma_v must be >= 0");
  ProcessNoise q;
  q.blocks.assign(n, sigma_v * sigma_v * Mat3::Identity());
  return q;
}

void propagate(DriftState& s, const ProcessNoise& q) {
  if (q.n() != s.n)
    throw std::invalid_argument("process noise block count != drone count");
  // random-walk drift: mean unchanged, per-drone noise on diagonal blocks only
  for (int i = 0; i < s.n; ++i) s.P.block<3, 3>(3 * i, 3 * i) += q.blocks[i];
  s.epoch += 1;
}

UpdateOutcome apply_measurement(DriftState& s, const RelativeMeasurement& m,
                                const Vec3& odo_observer, const Vec3& odo_target,
                                const UpdateOptions& opts) {
  check_id(s, m.observer, "observer");
  check_id(s, m.target, "target");
  if (m.observer == m.target)
    throw std::invalid_argument("observer and target must differ");
  if (m.stamp > s.epoch)
    throw std::invalid_argument("measurement stamped in the future");

  const int i = m.observer, j = m.target;
  const Mat3 R_bg = m.rot_global_to_body.transpose();  // body -> global

  UpdateOutcome out;

  // lift into the global frame once; H then has no rotation in it
  const Vec3 z_lift = odo_observer + R_bg * m.z - odo_target;
  const Mat3 n_eff = R_bg * m.noise * R_bg.transpose();

  const Vec3 r = z_lift - (s.drift_of(j) - s.drift_of(i));
  const Mat3 S = relative_covariance(s, i, j) + n_eff;

  Eigen::FullPivLU<Mat3> lu(S);
  if (!lu.isInvertible()) {
    out.accepted = false;
    out.residual.r = r;
    out.residual.S = S;
    out.reject_reason = "innovation covariance singular";
    return out;
  }
  const Mat3 S_inv = lu.inverse();

  // P H^T with H = [.. -I at i .. +I at j ..] is just a block-column diff
  const Eigen::MatrixXd PHt =
      s.P.middleCols<3>(3 * j) - s.P.middleCols<3>(3 * i);
  const Eigen::MatrixXd K = PHt * S_inv;  // 3n x 3

  s.x += K * r;
  if (opts.joseph) {
    // P = (I-KH) P (I-KH)^T + K N K^T, with (I-KH)P = P - K (H P)
    Eigen::MatrixXd B = s.P - K * PHt.transpose();
    s.P = B - (B.middleCols<3>(3 * j) - B.middleCols<3>(3 * i)) * K.transpose()
          + K * n_eff * K.transpose();
  } else {
    // H P = (P H^T)^T since P is symmetric
    s.P -= K * PHt.transpose();
  }
  s.P = 0.5 * (s.P + s.P.transpose()).eval();

  out.accepted = true;
  out.residual.r = r;
  out.residual.S = S;
  return out;
}

ThirdPartyBlocks third_party_blocks(const DriftState& pre,
                                    const RelativeMeasurement& m,
                                    const Residual& res, int p, int q) {
  check_id(pre, p, "p");
  check_id(pre, q, "q");
  const int i = m.observer, j = m.target;
  check_id(pre, i, "observer");
  check_id(pre, j, "target");

  Eigen::FullPivLU<Mat3> lu(res.S);
  if (!lu.isInvertible())
    throw std::invalid_argument("innovation covariance singular");
  const Mat3 S_inv = lu.inverse();

  // the (p,.) slice of the full update, written with covariance blocks:
  //   P_pq+ = P_pq - (-P_pi + P_pj) S^-1 (P_jq - P_iq)
  //   x_p+  = x_p  + (-P_pi + P_pj) S^-1 r
  const Mat3 left = -pre.cov_block(p, i) + pre.cov_block(p, j);
  ThirdPartyBlocks out;
  out.P_pq = pre.cov_block(p, q) -
             left * S_inv * (pre.cov_block(j, q) - pre.cov_block(i, q));
  out.x_p = pre.drift_of(p) + left * S_inv * res.r;
  return out;
}

Mat3 relative_covariance(const DriftState& s, int i, int j) {
  check_id(s, i, "i");
  check_id(s, j, "j");
  if (i == j) throw std::domain_error("relative covariance needs i != j");
  return s.cov_block(i, i) + s.cov_block(j, j) - s.cov_block(i, j) -
         s.cov_block(j, i);
}

Vec3 corrected_position(const Vec3& odo, const Vec3& drift_before,
                        const Vec3& drift_after) {
  return odo - drift_before + drift_after;
}

}  // namespace swarmloc::est
