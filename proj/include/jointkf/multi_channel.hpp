// n decoupled 2-state filters, one per sensor channel.
//
// The multi-joint model has block-diagonal A (one [[1,1],[0,1]] block per
// joint), diagonal R and Q = I, so the 2n-state filter factors exactly into n
// independent 2-state filters. Each innovation is then a scalar division.
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "jointkf/errors.hpp"
#include "jointkf/filter_core.hpp"
#include "jointkf/trace.hpp"

namespace jointkf {

template <typename Scalar = double>
struct ChannelFilter {
  KinematicModel<Scalar> model;
  NoiseModel<Scalar> noise;
  FilterState<Scalar> state;
  bool initialized = false;
};

/// Control input for (channel, row). The default policy is u = 0.
template <typename Scalar = double>
using ControlPolicy = std::function<Scalar(std::size_t channel, std::size_t row)>;

template <typename Scalar = double>
class MultiChannelFilter {
 public:
  MultiChannelFilter(std::vector<ChannelFilter<Scalar>> channels, Scalar p0 = Scalar(kDefaultInitialCovariance),
                     MeasurementPolicy policy = MeasurementPolicy::kSkipUpdate)
      : channels_(std::move(channels)), p0_(p0), policy_(policy) {
    if (channels_.empty()) {
      throw ParameterError("a filter needs at least one channel");
    }
    for (const auto& ch : channels_) {
      validate(ch.model);
      validate(ch.noise);
      if (ch.model.dt != channels_.front().model.dt) {
        throw ParameterError("all channels must share the same dt");
      }
    }
  }

  /// One channel per noise model, all sharing `model`.
  static MultiChannelFilter uniform(const std::vector<NoiseModel<Scalar>>& noises,
                                    const KinematicModel<Scalar>& model = {},
                                    Scalar p0 = Scalar(kDefaultInitialCovariance),
                                    MeasurementPolicy policy = MeasurementPolicy::kSkipUpdate) {
    std::vector<ChannelFilter<Scalar>> channels;
    channels.reserve(noises.size());
    for (const auto& n : noises) channels.push_back({model, n, {}, false});
    return MultiChannelFilter(std::move(channels), p0, policy);
  }

  std::size_t size() const noexcept { return channels_.size(); }
  const ChannelFilter<Scalar>& channel(std::size_t i) const { return channels_[i]; }
  std::span<const ChannelFilter<Scalar>> channels() const noexcept { return channels_; }
  Scalar p0() const noexcept { return p0_; }
  MeasurementPolicy policy() const noexcept { return policy_; }

  /// Back to the uninitialized state; models and noise are kept.
  void reset() {
    for (auto& ch : channels_) {
      ch.state = {};
      ch.initialized = false;
    }
  }

  /// Steps every channel with its measurement and writes the posterior angle
  /// to `out`. A channel is seeded by init_filter() on its first finite
  /// measurement; until then it emits NaN.
  void step_row(std::span<const Scalar> z, std::span<Scalar> out, std::size_t row,
                const ControlPolicy<Scalar>& u_policy = {}) {
    if (z.size() != channels_.size() || out.size() != channels_.size()) {
      throw ShapeError("row width " + std::to_string(z.size()) + " does not match " +
                       std::to_string(channels_.size()) + " filter channels");
    }
    for (std::size_t c = 0; c < channels_.size(); ++c) {
      auto& ch = channels_[c];
      if (!ch.initialized) {
        if (std::isfinite(z[c])) {
          ch.state = init_filter(z[c], p0_);
          ch.initialized = true;
        } else if (policy_ == MeasurementPolicy::kHardError) {
          throw MeasurementError("channel " + std::to_string(c) + ": initial measurement is not finite");
        }
      } else {
        const Scalar u = u_policy ? u_policy(c, row) : Scalar(0);
        ch.state = step(ch.state, ch.model, ch.noise, z[c], u, policy_);
      }
      out[c] = ch.initialized ? ch.state.x_hat(0) : std::numeric_limits<Scalar>::quiet_NaN();
    }
  }

 private:
  std::vector<ChannelFilter<Scalar>> channels_;
  Scalar p0_;
  MeasurementPolicy policy_;
};

template <typename Scalar = double>
struct FilteredTrace {
  Trace filtered;
  /// history[channel][row], filled only when requested.
  std::vector<std::vector<FilterState<Scalar>>> history;
};

/// Runs every row through `filter` in column order. The output has the same
/// shape, labels and timestamps as the input.
inline FilteredTrace<double> filter_trace(const Trace& trace, MultiChannelFilter<double>& filter,
                                          const ControlPolicy<double>& u_policy = {},
                                          bool record_history = false) {
  if (trace.channels() != filter.size()) {
    throw ShapeError("trace has " + std::to_string(trace.channels()) + " channels, filter has " +
                     std::to_string(filter.size()));
  }
  FilteredTrace<double> result{Trace(trace.labels()), {}};
  result.filtered.reserve(trace.rows());
  if (record_history) {
    result.history.assign(filter.size(), {});
    for (auto& h : result.history) h.reserve(trace.rows());
  }
  std::vector<double> out(filter.size());
  const auto data = trace.data();
  for (std::size_t r = 0; r < trace.rows(); ++r) {
    filter.step_row(data.subspan(r * trace.channels(), trace.channels()), out, r, u_policy);
    result.filtered.push_back(trace.t_ms(r), out);
    if (record_history) {
      for (std::size_t c = 0; c < filter.size(); ++c) result.history[c].push_back(filter.channel(c).state);
    }
  }
  return result;
}

}  // namespace jointkf
