#pragma once

// Independent reference implementations used as test oracles. They favour the
// most literal formulation over speed and share no code with the library.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include "rigfit/fitter.hpp"
#include "rigfit/geom.hpp"
#include "rigfit/skinning.hpp"

namespace rigfit::oracle {

inline Mat3 rotation(const Quat& q) {
  return Eigen::Quaterniond(q.w, q.x, q.y, q.z).normalized().toRotationMatrix();
}

/// Rodrigues formula from an axis-angle pair.
inline Mat3 axis_angle_matrix(const Vec3& axis, double angle) {
  const Vec3 k = axis.normalized();
  Mat3 kx;
  kx << 0.0, -k.z(), k.y(), k.z(), 0.0, -k.x(), -k.y(), k.x(), 0.0;
  return Mat3::Identity() + std::sin(angle) * kx + (1.0 - std::cos(angle)) * kx * kx;
}

inline Mat4 homogeneous(const Mat3& r, const Vec3& t) {
  Mat4 m = Mat4::Identity();
  m.topLeftCorner<3, 3>() = r;
  m.topRightCorner<3, 1>() = t;
  return m;
}

/// Softmax over bones of -1/2 (v-c)^T Sigma^-1 (v-c), Sigma = R diag(s^2) R^T.
inline std::vector<double> gaussian_softmax(const Vec3& v, const std::vector<Vec3>& centers,
                                            const std::vector<Vec3>& scales, const std::vector<Quat>& orientations) {
  std::vector<double> e(centers.size());
  double total = 0.0;
  for (std::size_t k = 0; k < centers.size(); ++k) {
    const Mat3 r = rotation(orientations[k]);
    const Mat3 sigma = r * scales[k].array().square().matrix().asDiagonal() * r.transpose();
    const Vec3 d = v - centers[k];
    e[k] = std::exp(-0.5 * d.dot(sigma.inverse() * d));
    total += e[k];
  }
  for (double& x : e) {
    x /= total;
  }
  return e;
}

/// Masked renormalization with eps; empty rows become one-hot on the smallest
/// geodesic distance (first index on ties).
inline Eigen::MatrixXd refined(const Eigen::MatrixXd& raw, const MaskMatrix& mask, double eps,
                               const Eigen::MatrixXd& dist) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(raw.rows(), raw.cols());
  for (Eigen::Index i = 0; i < raw.rows(); ++i) {
    double total = 0.0;
    for (Eigen::Index k = 0; k < raw.cols(); ++k) {
      total += mask(i, k) * raw(i, k);
    }
    if (total == 0.0) {
      Eigen::Index best = 0;
      for (Eigen::Index k = 1; k < raw.cols(); ++k) {
        if (dist(i, k) < dist(i, best)) {
          best = k;
        }
      }
      out(i, best) = 1.0;
      continue;
    }
    for (Eigen::Index k = 0; k < raw.cols(); ++k) {
      out(i, k) = mask(i, k) * raw(i, k) / (total + eps);
    }
  }
  return out;
}

/// Shortest simple-path length by exhaustive depth-first enumeration. Lengths
/// accumulate from the source outwards, matching Dijkstra's summation order.
inline std::vector<double> enumerate_paths(const std::vector<std::vector<double>>& w, int source) {
  const int n = static_cast<int>(w.size());
  std::vector<double> best(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  std::vector<char> on_path(static_cast<std::size_t>(n), 0);
  std::function<void(int, double)> walk = [&](int node, double length) {
    best[static_cast<std::size_t>(node)] = std::min(best[static_cast<std::size_t>(node)], length);
    on_path[static_cast<std::size_t>(node)] = 1;
    for (int next = 0; next < n; ++next) {
      const double edge = w[static_cast<std::size_t>(node)][static_cast<std::size_t>(next)];
      if (edge >= 0.0 && !on_path[static_cast<std::size_t>(next)]) {
        walk(next, length + edge);
      }
    }
    on_path[static_cast<std::size_t>(node)] = 0;
  };
  walk(source, 0.0);
  return best;
}

/// Plain double loop Chamfer; `squared` selects the L2 variant.
inline double brute_chamfer(const std::vector<Vec3>& a, const std::vector<Vec3>& b, bool squared) {
  auto directed = [&](const std::vector<Vec3>& from, const std::vector<Vec3>& to) {
    double sum = 0.0;
    for (const Vec3& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec3& q : to) {
        best = std::min(best, (p - q).squaredNorm());
      }
      sum += squared ? best : std::sqrt(best);
    }
    return sum / static_cast<double>(from.size());
  };
  return 0.5 * (directed(a, b) + directed(b, a));
}

/// Weighted sum of homogeneous bone matrices applied to v.
inline Vec3 blend(const Vec3& v, const std::vector<double>& weights, const std::vector<Mat4>& bones) {
  Eigen::Vector4d acc = Eigen::Vector4d::Zero();
  for (std::size_t k = 0; k < bones.size(); ++k) {
    acc += weights[k] * (bones[k] * v.homogeneous());
  }
  return acc.head<3>();
}

// ---------------------------------------------------------------------------
// Random generators

inline Vec3 random_vec(std::mt19937_64& rng, double scale = 1.0) {
  std::uniform_real_distribution<double> u(-scale, scale);
  return {u(rng), u(rng), u(rng)};
}

inline Quat random_unit_quat(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Quat q{n(rng), n(rng), n(rng), n(rng)};
  while (q.norm() < 1e-3) {
    q = {n(rng), n(rng), n(rng), n(rng)};
  }
  return q.normalized();
}

/// Non-normalized quaternion near identity (|q| in roughly [0.8, 1.25]).
inline Quat random_raw_quat(std::mt19937_64& rng, double spread = 0.4) {
  std::uniform_real_distribution<double> u(-spread, spread);
  std::uniform_real_distribution<double> len(0.8, 1.25);
  const Quat q = Quat{1.0, u(rng), u(rng), u(rng)}.normalized();
  const double s = len(rng);
  return {q.w * s, q.x * s, q.y * s, q.z * s};
}

inline RigidTransform random_transform(std::mt19937_64& rng, double translation = 1.0) {
  return {random_unit_quat(rng), random_vec(rng, translation)};
}

}  // namespace rigfit::oracle
