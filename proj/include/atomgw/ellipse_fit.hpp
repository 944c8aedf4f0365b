#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "atomgw/constants.hpp"
#include "atomgw/error.hpp"

namespace atomgw {

/// Paired port populations of two interferometers sharing a common-mode phase.
struct EllipseSample {
  double p1 = 0.0;
  double p2 = 0.0;
};

struct EllipseFit {
  double delta_phi = 0.0;  // in [0, pi]
  double residual = 0.0;   // RMS Sampson distance, population units
  double center_x = 0.0;
  double center_y = 0.0;
  double semi_major = 0.0;
  double semi_minor = 0.0;
  double tilt = 0.0;       // rad, major axis from the p1 axis
  Eigen::Matrix<double, 6, 1> conic;  // A x^2 + B xy + C y^2 + D x + E y + F
};

class DegenerateFitError : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

namespace detail {

using Conic = Eigen::Matrix<double, 6, 1>;  // a u^2 + b uv + c v^2 + d u + e v + f

inline bool is_ellipse(const Conic& q) { return 4.0 * q(0) * q(2) - q(1) * q(1) > 0.0; }

/*!
  Hyper-renormalized least squares (Kanatani and Rangarajan). Solves
  M theta = lambda N theta with N carrying the first- and second-order
  noise corrections, which removes the bias a plain algebraic fit shows
  under isotropic readout noise. Inputs are centred and share one scale.
*/
inline Conic hyper_least_squares(const Eigen::ArrayXd& u, const Eigen::ArrayXd& v) {
  using M6 = Eigen::Matrix<double, 6, 6>;
  using V6 = Eigen::Matrix<double, 6, 1>;
  const auto n = u.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<V6> xi(static_cast<std::size_t>(n));
  std::vector<M6> cov(static_cast<std::size_t>(n));
  M6 M = M6::Zero();
  M6 N = M6::Zero();
  V6 e;
  e << 1, 0, 1, 0, 0, 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = u(i);
    const double b = v(i);
    auto& x = xi[static_cast<std::size_t>(i)];
    auto& V = cov[static_cast<std::size_t>(i)];
    x << a * a, 2 * a * b, b * b, 2 * a, 2 * b, 1;
    V << a * a, a * b, 0, a, 0, 0,
         a * b, a * a + b * b, a * b, b, a, 0,
         0, a * b, b * b, 0, b, 0,
         a, b, 0, 1, 0, 0,
         0, a, b, 0, 1, 0,
         0, 0, 0, 0, 0, 0;
    V *= 4.0;
    M += x * x.transpose() * inv_n;
    const M6 s = x * e.transpose();
    N += (V + s + s.transpose()) * inv_n;
  }
  // Rank-5 pseudo-inverse of M.
  Eigen::SelfAdjointEigenSolver<M6> es(M);
  M6 M5 = M6::Zero();
  for (int k = 1; k < 6; ++k) {
    M5 += es.eigenvectors().col(k) * es.eigenvectors().col(k).transpose() / es.eigenvalues()(k);
  }
  for (std::size_t i = 0; i < xi.size(); ++i) {
    const double w = xi[i].dot(M5 * xi[i]);
    const M6 s = cov[i] * M5 * xi[i] * xi[i].transpose();
    N -= (w * cov[i] + s + s.transpose()) * inv_n * inv_n;
  }

  Eigen::GeneralizedEigenSolver<M6> ges(M, N);
  int best = -1;
  double best_lambda = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 6; ++k) {
    const auto alpha = ges.alphas()(k);
    const double beta = ges.betas()(k);
    if (beta == 0.0 || std::abs(alpha.imag()) > 1e-12 * std::abs(alpha.real())) continue;
    const double lambda = std::abs(alpha.real() / beta);
    if (lambda < best_lambda) {
      best_lambda = lambda;
      best = k;
    }
  }
  Conic q = Conic::Zero();
  if (best < 0) return q;
  const V6 t = ges.eigenvectors().col(best).real();
  q << t(0), 2 * t(1), t(2), 2 * t(3), 2 * t(4), t(5);
  return q;
}

/// Direct ellipse-specific fit (Halir and Flusser's stable form of Fitzgibbon's method).
inline Conic direct_ellipse_fit(const Eigen::ArrayXd& u, const Eigen::ArrayXd& v) {
  const auto n = u.size();
  Eigen::MatrixXd D1(n, 3), D2(n, 3);
  D1.col(0) = (u * u).matrix();
  D1.col(1) = (u * v).matrix();
  D1.col(2) = (v * v).matrix();
  D2.col(0) = u.matrix();
  D2.col(1) = v.matrix();
  D2.col(2).setOnes();
  const Eigen::Matrix3d S1 = D1.transpose() * D1;
  const Eigen::Matrix3d S2 = D1.transpose() * D2;
  const Eigen::Matrix3d S3 = D2.transpose() * D2;
  const Eigen::Matrix3d Tm = -S3.ldlt().solve(S2.transpose());
  const Eigen::Matrix3d M = S1 + S2 * Tm;
  Eigen::Matrix3d Mc;
  Mc.row(0) = M.row(2) / 2.0;
  Mc.row(1) = -M.row(1);
  Mc.row(2) = M.row(0) / 2.0;

  Eigen::EigenSolver<Eigen::Matrix3d> eig(Mc);
  Conic q = Conic::Zero();
  double best_cond = 0.0;
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector3d a = eig.eigenvectors().col(i).real();
    const double cond = 4.0 * a(0) * a(2) - a(1) * a(1);
    if (cond > best_cond) {
      best_cond = cond;
      const Eigen::Vector3d a2 = Tm * a;
      q << a, a2;
    }
  }
  return q;
}

}  // namespace detail

/*!
  Ellipse fit of paired populations, returning
  delta_phi = arccos(-B / (2 sqrt(A C))). Hyper least squares is the
  estimator; the direct ellipse-specific fit is used when it returns a
  non-elliptic conic. Collinear data (delta_phi near 0 or pi) is rejected.
*/
inline EllipseFit ellipse_fit(const std::vector<EllipseSample>& samples) {
  const auto n = static_cast<Eigen::Index>(samples.size());
  if (n < 6) throw ValidationError("ellipse fit needs at least 6 samples");
  Eigen::ArrayXd x(n), y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = samples[static_cast<std::size_t>(i)];
    if (!(s.p1 >= 0.0 && s.p1 <= 1.0 && s.p2 >= 0.0 && s.p2 <= 1.0)) {
      throw ValidationError("ellipse samples must be populations in [0, 1]");
    }
    x(i) = s.p1;
    y(i) = s.p2;
  }
  const double mx = x.mean();
  const double my = y.mean();
  const double vx = (x - mx).square().mean();
  const double vy = (y - my).square().mean();
  if (!(vx > 0.0) || !(vy > 0.0)) throw DegenerateFitError("degenerate ellipse fit: constant samples");
  const double correlation = ((x - mx) * (y - my)).mean() / std::sqrt(vx * vy);
  if (1.0 - std::abs(correlation) < 1e-10) {
    throw DegenerateFitError("degenerate ellipse fit: samples are collinear");
  }

  // One scale for both axes keeps the readout noise isotropic.
  const double sc = std::sqrt(0.5 * (vx + vy));
  const Eigen::ArrayXd u = (x - mx) / sc;
  const Eigen::ArrayXd v = (y - my) / sc;

  detail::Conic q = detail::hyper_least_squares(u, v);
  if (!detail::is_ellipse(q)) q = detail::direct_ellipse_fit(u, v);
  if (!detail::is_ellipse(q)) throw DegenerateFitError("degenerate ellipse fit: no elliptical solution");
  if (q(0) < 0.0) q = -q;

  const double cos_dphi = -q(1) / (2.0 * std::sqrt(q(0) * q(2)));
  EllipseFit fit;
  fit.delta_phi = std::acos(std::clamp(cos_dphi, -1.0, 1.0));

  // Back to population coordinates.
  const double A = q(0) / (sc * sc);
  const double B = q(1) / (sc * sc);
  const double C = q(2) / (sc * sc);
  const double D = -2.0 * A * mx - B * my + q(3) / sc;
  const double E = -2.0 * C * my - B * mx + q(4) / sc;
  const double F = A * mx * mx + B * mx * my + C * my * my - q(3) * mx / sc - q(4) * my / sc + q(5);
  fit.conic << A, B, C, D, E, F;

  const double det = 4.0 * A * C - B * B;
  fit.center_x = (B * E - 2.0 * C * D) / det;
  fit.center_y = (B * D - 2.0 * A * E) / det;
  const double f0 = A * fit.center_x * fit.center_x + B * fit.center_x * fit.center_y +
                    C * fit.center_y * fit.center_y + D * fit.center_x + E * fit.center_y + F;
  Eigen::Matrix2d Q;
  Q << A, B / 2.0, B / 2.0, C;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> qe(Q);
  const double l0 = qe.eigenvalues()(0);
  const double l1 = qe.eigenvalues()(1);
  fit.semi_major = std::sqrt(std::abs(f0 / l0));
  fit.semi_minor = std::sqrt(std::abs(f0 / l1));
  const Eigen::Vector2d major = qe.eigenvectors().col(0);
  fit.tilt = std::atan2(major(1), major(0));

  double ss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double xi = x(i);
    const double yi = y(i);
    const double r = A * xi * xi + B * xi * yi + C * yi * yi + D * xi + E * yi + F;
    const double gx = 2.0 * A * xi + B * yi + D;
    const double gy = B * xi + 2.0 * C * yi + E;
    const double g2 = gx * gx + gy * gy;
    ss += g2 > 0.0 ? r * r / g2 : 0.0;
  }
  fit.residual = std::sqrt(ss / static_cast<double>(n));
  return fit;
}

struct EllipseSynthesis {
  double delta_phi = 0.0;
  int samples = 200;
  double contrast = 1.0;
  double readout_noise = 0.0;  // Gaussian sigma on each population
};

/// Populations P_i = (1 - C cos(phi_c + dphi_i)) / 2 with phi_c uniform on [0, 2 pi), clamped to [0, 1].
inline std::vector<EllipseSample> synthesize_ellipse_samples(const EllipseSynthesis& spec, std::mt19937_64& rng) {
  if (spec.samples < 1) throw ValidationError("ellipse sample count must be >= 1");
  std::uniform_real_distribution<double> common(0.0, two_pi);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<EllipseSample> out;
  out.reserve(static_cast<std::size_t>(spec.samples));
  for (int i = 0; i < spec.samples; ++i) {
    const double phi = common(rng);
    double p1 = 0.5 * (1.0 - spec.contrast * std::cos(phi));
    double p2 = 0.5 * (1.0 - spec.contrast * std::cos(phi + spec.delta_phi));
    if (spec.readout_noise > 0.0) {
      p1 += spec.readout_noise * noise(rng);
      p2 += spec.readout_noise * noise(rng);
    }
    out.push_back({std::clamp(p1, 0.0, 1.0), std::clamp(p2, 0.0, 1.0)});
  }
  return out;
}

}  // namespace atomgw
