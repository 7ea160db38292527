// Kalman predict/update recursion for a single joint channel.
//
// State is (q, w): joint angle and angular rate in sensor units per step.
// The model is the unit-step constant-acceleration discretization
//
//   x(k+1) = A x(k) + B u(k) + v(k),   A = [[1,1],[0,1]], B = [0.5, 1]^T
//   z(k)   = H x(k) + n(k),            H = [1, 0]
//
// The gain is formed from the prior covariance P-:
//
//   K = P- H^T / (H P- H^T + r)
//
// Some derivations write this with the posterior P; that reading makes the
// covariance update (I - K H) P- non-optimal, so the prior form is used here.
#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "jointkf/errors.hpp"

namespace jointkf {

template <typename Scalar = double>
using StateVector = Eigen::Matrix<Scalar, 2, 1>;

template <typename Scalar = double>
using Covariance = Eigen::Matrix<Scalar, 2, 2>;

template <typename Scalar = double>
using GainVector = Eigen::Matrix<Scalar, 2, 1>;

template <typename Scalar = double>
struct KinematicModel {
  Eigen::Matrix<Scalar, 2, 2> a{{1, 1}, {0, 1}};
  Eigen::Matrix<Scalar, 2, 1> b{Scalar(0.5), Scalar(1)};
  Eigen::Matrix<Scalar, 1, 2> h{{1, 0}};
  /// Sample period in seconds. Metadata only: a and b stay in sample units.
  Scalar dt = Scalar(1e-3);
};

template <typename Scalar = double>
struct NoiseModel {
  Covariance<Scalar> q_cov = Covariance<Scalar>::Identity();
  Scalar r_var = Scalar(1);

  /// Q = q_scale * I, the only process-noise shape the config exposes.
  static NoiseModel scaled_identity(Scalar q_scale, Scalar r_var) {
    return NoiseModel{q_scale * Covariance<Scalar>::Identity(), r_var};
  }
};

template <typename Scalar = double>
struct FilterState {
  StateVector<Scalar> x_hat = StateVector<Scalar>::Zero();
  Covariance<Scalar> p = Covariance<Scalar>::Zero();
  GainVector<Scalar> k_gain = GainVector<Scalar>::Zero();
  std::uint64_t step = 0;
};

template <typename Scalar = double>
struct Prior {
  StateVector<Scalar> x;
  Covariance<Scalar> p;
};

/// What step() does with a NaN/Inf measurement.
enum class MeasurementPolicy { kSkipUpdate, kHardError };

inline constexpr double kDefaultInitialCovariance = 100.0;

template <typename Derived>
void symmetrize(Eigen::MatrixBase<Derived>& m) {
  m = (0.5 * (m + m.transpose())).eval();
}

/// Throws ParameterError unless Q is symmetric PSD (within 1e-12) and r > 0.
template <typename Scalar>
void validate(const NoiseModel<Scalar>& noise) {
  if (!noise.q_cov.allFinite() || !std::isfinite(noise.r_var)) {
    throw ParameterError("noise model has non-finite entries");
  }
  if ((noise.q_cov - noise.q_cov.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12)) {
    throw ParameterError("q_cov is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Covariance<Scalar>> eig(noise.q_cov, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < Scalar(-1e-12)) {
    throw ParameterError("q_cov is not positive semidefinite");
  }
  if (!(noise.r_var > 0)) {
    throw ParameterError("r_var must be > 0");
  }
}

template <typename Scalar>
void validate(const KinematicModel<Scalar>& model) {
  if (!model.a.allFinite() || !model.b.allFinite() || !model.h.allFinite()) {
    throw ParameterError("kinematic model has non-finite entries");
  }
  if (!(model.dt > 0)) {
    throw ParameterError("dt must be > 0");
  }
}

/// x- = A x + B u, P- = A P A^T + Q. The input state is not modified.
template <typename Scalar>
Prior<Scalar> predict(const FilterState<Scalar>& state, const KinematicModel<Scalar>& model,
                      const NoiseModel<Scalar>& noise, Scalar u = Scalar(0)) {
  if (!std::isfinite(u)) {
    throw ModelInputError("control input is not finite");
  }
  if (!state.x_hat.allFinite() || !state.p.allFinite()) {
    throw ModelInputError("filter state is not finite");
  }
  Prior<Scalar> prior;
  prior.x.noalias() = model.a * state.x_hat + model.b * u;
  prior.p.noalias() = model.a * state.p * model.a.transpose();
  prior.p += noise.q_cov;
  symmetrize(prior.p);
  return prior;
}

/// K = P- H^T / (H P- H^T + r). The innovation is scalar, so no inverse is formed.
template <typename Scalar>
GainVector<Scalar> gain(const Covariance<Scalar>& p_prior, const KinematicModel<Scalar>& model,
                        const NoiseModel<Scalar>& noise) {
  const GainVector<Scalar> pht = p_prior * model.h.transpose();
  const Scalar innovation_var = (model.h * pht).value() + noise.r_var;
  if (!(innovation_var > 0)) {
    throw SingularInnovationError("innovation variance H P- H^T + r is not positive");
  }
  return pht / innovation_var;
}

namespace detail {

template <typename Scalar>
FilterState<Scalar> apply_update(const Prior<Scalar>& prior, Scalar z,
                                 const KinematicModel<Scalar>& model,
                                 const GainVector<Scalar>& k, std::uint64_t step) {
  FilterState<Scalar> post;
  const Scalar innovation = z - (model.h * prior.x).value();
  post.x_hat = prior.x + k * innovation;
  post.p.noalias() = (Covariance<Scalar>::Identity() - k * model.h) * prior.p;
  symmetrize(post.p);
  post.k_gain = k;
  post.step = step + 1;
  return post;
}

}  // namespace detail

/// Posterior x = x- + K (z - H x-), P = (I - K H) P-. Increments the step counter.
template <typename Scalar>
FilterState<Scalar> update(const Prior<Scalar>& prior, Scalar z, const KinematicModel<Scalar>& model,
                           const NoiseModel<Scalar>& noise, std::uint64_t step = 0) {
  if (!std::isfinite(z)) {
    throw MeasurementError("measurement is not finite");
  }
  return detail::apply_update(prior, z, model, gain(prior.p, model, noise), step);
}

/// One predict + update cycle. A non-finite z either raises or degrades to
/// predict-only (gain reported as zero) according to `policy`.
template <typename Scalar>
FilterState<Scalar> step(const FilterState<Scalar>& state, const KinematicModel<Scalar>& model,
                         const NoiseModel<Scalar>& noise, Scalar z, Scalar u = Scalar(0),
                         MeasurementPolicy policy = MeasurementPolicy::kSkipUpdate) {
  const Prior<Scalar> prior = predict(state, model, noise, u);
  if (!std::isfinite(z)) {
    if (policy == MeasurementPolicy::kHardError) {
      throw MeasurementError("measurement is not finite");
    }
    FilterState<Scalar> skipped;
    skipped.x_hat = prior.x;
    skipped.p = prior.p;
    skipped.k_gain.setZero();
    skipped.step = state.step + 1;
    return skipped;
  }
  return detail::apply_update(prior, z, model, gain(prior.p, model, noise), state.step);
}

/// x = (z0, 0), P = p0 I, step = 0.
template <typename Scalar>
FilterState<Scalar> init_filter(Scalar z0, Scalar p0 = Scalar(kDefaultInitialCovariance)) {
  if (!std::isfinite(z0)) {
    throw MeasurementError("initial measurement is not finite");
  }
  if (!(p0 >= 0) || !std::isfinite(p0)) {
    throw ParameterError("initial covariance scale must be finite and >= 0");
  }
  FilterState<Scalar> state;
  state.x_hat = StateVector<Scalar>(z0, Scalar(0));
  state.p = p0 * Covariance<Scalar>::Identity();
  return state;
}

template <typename Scalar = double>
struct SteadyState {
  GainVector<Scalar> gain;
  Covariance<Scalar> p_prior;
  int iterations = 0;
};

/// Fixed point of the Riccati recursion P- <- A (I - K H) P- A^T + Q,
/// iterated from P- = Q until the max-abs element change drops below tol.
template <typename Scalar>
SteadyState<Scalar> steady_state(const KinematicModel<Scalar>& model, const NoiseModel<Scalar>& noise,
                                 Scalar tol = Scalar(1e-10), int max_iter = 10000) {
  if (!(tol > 0)) {
    throw ParameterError("tolerance must be > 0");
  }
  validate(noise);
  Covariance<Scalar> p_prior = noise.q_cov;
  for (int it = 1; it <= max_iter; ++it) {
    const GainVector<Scalar> k = gain(p_prior, model, noise);
    Covariance<Scalar> p_post = (Covariance<Scalar>::Identity() - k * model.h) * p_prior;
    Covariance<Scalar> next = model.a * p_post * model.a.transpose() + noise.q_cov;
    symmetrize(next);
    if (!next.allFinite()) {
      break;
    }
    const Scalar change = (next - p_prior).cwiseAbs().maxCoeff();
    p_prior = next;
    if (change < tol) {
      return {gain(p_prior, model, noise), p_prior, it};
    }
  }
  throw DivergenceError("Riccati iteration did not converge in " + std::to_string(max_iter) +
                        " iterations");
}

}  // namespace jointkf
