#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

// Error-state filter over the stacked per-drone VIO position drifts.
//
// State: X = [x_0; x_1; ...; x_{n-1}], x_i in R^3 is the drift of drone i's
// odometry (truth = odometry + x_i). Drift evolves as a random walk, so
// propagation is mean-preserving and only adds process noise to the diagonal
// 3x3 blocks of P. A mutual observation of drone j by drone i, lifted into
// the global frame, measures x_j - x_i and is fused with a standard linear
// update; the gain is formed from two block columns of P, never from an
// explicit H, which keeps the update O(n^2).

namespace swarmloc::est {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

struct DriftState {
  int n = 0;               // drone count
  Eigen::VectorXd x;       // 3n stacked drift means
  Eigen::MatrixXd P;       // 3n x 3n covariance
  std::int64_t epoch = 0;  // count of propagation steps applied

  // all-zero initial state: drift unknown-but-zero with zero uncertainty;
  // uncertainty enters through propagation
  static DriftState zero(int n);

  Vec3 drift_of(int i) const { return x.segment<3>(3 * i); }
  Mat3 cov_block(int i, int j) const { return P.block<3, 3>(3 * i, 3 * j); }
};

// Per-drone process noise blocks, one 3x3 PSD block per drone per epoch.
struct ProcessNoise {
  std::vector<Mat3> blocks;

  int n() const { return static_cast<int>(blocks.size()); }
  // Q_i = sigma_v^2 * I for every drone (per-tick drift increment std)
  static ProcessNoise isotropic(int n, double sigma_v);
};

// One identified relative observation: target position in the observer's
// body frame plus the rotation that maps global coordinates into that frame.
struct RelativeMeasurement {
  int observer = -1;
  int target = -1;
  Vec3 z = Vec3::Zero();             // target relative to observer, body frame
  Mat3 rot_global_to_body = Mat3::Identity();  // R_{body<-global} at exposure
  Mat3 noise = Mat3::Zero();         // N, body frame, PSD
  std::int64_t stamp = 0;            // epoch the detection was taken at
};

struct Residual {
  Vec3 r = Vec3::Zero();  // innovation, global frame
  Mat3 S = Mat3::Zero();  // innovation covariance
};

struct UpdateOptions {
  bool joseph = false;  // Joseph-form covariance update (slower, extra-safe)
};

struct UpdateOutcome {
  bool accepted = false;
  Residual residual;
  std::string reject_reason;  // set when accepted == false
};

// P(t+) = P(t) + blockdiag(Q_0..Q_{n-1}); drift means unchanged; epoch += 1.
// Off-diagonal blocks of P are not touched at all.
void propagate(DriftState& s, const ProcessNoise& q);

// Fuse one identified measurement. odo_observer / odo_target are the two
// drones' odometry outputs at the measurement stamp. The measurement is
// lifted into the global frame once:
//   z_lift = odo_i + R^T z - odo_j        (R = rot_global_to_body)
//   r      = z_lift - (x_j - x_i)
//   S      = P_ii + P_jj - P_ij - P_ji + R^T N R
//   K      = (P col_j - P col_i) S^-1
//   X     += K r
//   P     -= K (row_j - row_i of P)       (Joseph form optional)
// P is symmetrized afterwards. Rejects (without touching the state) when S
// is not invertible.
UpdateOutcome apply_measurement(DriftState& s, const RelativeMeasurement& m,
                                const Vec3& odo_observer, const Vec3& odo_target,
                                const UpdateOptions& opts = {});

// Blockwise form of the same update, for any state block (p, q), computed
// from the pre-update state. Matches the full update to numerical precision;
// kept as an independent route for diagnostics and cross-checking.
struct ThirdPartyBlocks {
  Mat3 P_pq;
  Vec3 x_p;
};
ThirdPartyBlocks third_party_blocks(const DriftState& pre,
                                    const RelativeMeasurement& m,
                                    const Residual& res, int p, int q);

// cov(drift_i - drift_j) = P_ii + P_jj - P_ij - P_ji
Mat3 relative_covariance(const DriftState& s, int i, int j);

// Re-base a published position when the drift estimate moves from
// drift_before to drift_after: result = odo - drift_before + drift_after.
Vec3 corrected_position(const Vec3& odo, const Vec3& drift_before,
                        const Vec3& drift_after);

}  // namespace swarmloc::est
