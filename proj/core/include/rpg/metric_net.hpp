#pragma once

// The metric network maps a layered parameter vector theta to the transform
// parameters (omega_tilde, sigma_tilde). Each layout segment goes through two
// valid single-channel convolutions (3x3 for matrices, length 3 for vectors),
// is flattened, average-pooled in non-overlapping windows (except segments
// marked pool_exempt), projected by a dense layer and a softplus. Segment
// features are concatenated into a shared softplus trunk feeding two linear
// heads.
//
// The shared/head split is our reading of the overlapping parameter groups:
// everything before the heads is tagged shared, each head is exclusive.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "rpg/autodiff.hpp"
#include "rpg/divergence.hpp"
#include "rpg/error.hpp"
#include "rpg/fields.hpp"
#include "rpg/fourier.hpp"
#include "rpg/layout.hpp"
#include "rpg/rng.hpp"

namespace rpg {

struct MetricNetConfig {
  int m_tilde = 1;
  int pool_size = 5;
  int kernel_size = 3;
  int segment_width = 16;
  int trunk_width = 16;
  double init_scale = 3.0;   // dense/conv weights ~ U(+-init_scale / sqrt(fan_in))
  double bias_scale = 0.1;   // biases ~ U(+-bias_scale)
  double head_kick = 0.1;    // see train_metric_net
};

enum class BlockTag { shared, omega_head, sigma_head };

const char* to_string(BlockTag tag);

struct ParamBlock {
  std::string name;
  BlockTag tag = BlockTag::shared;
  int offset = 0;
  int size = 0;
};

struct MetricNetParams {
  Vector values;
  std::vector<ParamBlock> blocks;

  int size() const { return static_cast<int>(values.size()); }
  bool heads_zero() const;
};

template <class T>
struct NetOutput {
  std::vector<T> omega_tilde;
  std::vector<T> sigma_tilde;
};

class MetricNet {
 public:
  MetricNet(LayerLayout layout, MetricNetConfig cfg);

  const LayerLayout& layout() const { return layout_; }
  const MetricNetConfig& config() const { return cfg_; }
  const FourierPair& fourier() const { return *fp_; }
  int param_count() const { return total_; }
  const std::vector<ParamBlock>& blocks() const { return blocks_; }

  /// Scaled-uniform shared parameters, zero heads.
  MetricNetParams init_params(RngStream& rng) const;

  TransformParams forward(const MetricNetParams& phi, const Vector& theta) const;
  Vector u(const MetricNetParams& phi, const Vector& theta) const;

  /// theta -> u(theta, phi) with phi copied into the closure.
  VectorField u_field(const MetricNetParams& phi) const;

  template <class T>
  NetOutput<T> forward_generic(std::span<const T> phi, std::span<const T> theta) const;

  template <class T>
  std::vector<T> u_generic(std::span<const T> phi, std::span<const T> theta) const {
    const NetOutput<T> out = forward_generic<T>(phi, theta);
    return build_u_generic<T>(*fp_, out.omega_tilde, out.sigma_tilde, theta);
  }

 private:
  struct SegmentPlan {
    Segment seg;
    int pad_rows = 0, pad_cols = 0;
    int kernel_rows = 0, kernel_cols = 0;
    int out_rows = 0, out_cols = 0;
    int pooled = 0;
    int conv1 = 0, conv1_bias = 0, conv2 = 0, conv2_bias = 0, dense = 0, dense_bias = 0;
  };

  int add_block(const std::string& name, BlockTag tag, int size);
  void check_sizes(std::size_t phi, std::size_t theta) const;

  template <class T>
  static std::vector<T> conv_valid(const std::vector<T>& grid, int rows, int cols, int kr, int kc,
                                   std::span<const T> phi, int kernel, int bias);

  LayerLayout layout_;
  MetricNetConfig cfg_;
  std::shared_ptr<const FourierPair> fp_;
  std::vector<SegmentPlan> plans_;
  std::vector<ParamBlock> blocks_;
  int trunk_ = 0, trunk_bias_ = 0;
  int omega_ = 0, omega_bias_ = 0;
  int sigma_ = 0, sigma_bias_ = 0;
  int total_ = 0;
};

/// Free-function form of MetricNet::init_params.
MetricNetParams init_params(RngStream& rng, const MetricNetConfig& cfg, const LayerLayout& layout);

/// Forward pass recorded on a fresh tape with every phi entry as a leaf.
struct MetricNetGraph {
  std::unique_ptr<ad::Tape> tape;
  std::vector<ad::Var> omega_tilde;
  std::vector<ad::Var> sigma_tilde;
};
MetricNetGraph metric_net_forward(const MetricNet& net, const MetricNetParams& phi,
                                  const Vector& theta);

struct LossEvaluation {
  double div = 0.0;
  double loss = 0.0;  // div^2
  Vector gradient;    // d loss / d phi
};

/// Div^2 of the probe estimate as a function of phi. grad f values at the
/// probe points do not depend on phi and enter as constants.
LossEvaluation divergence_loss(const MetricNet& net, const MetricNetParams& phi,
                               const Vector& theta, const VectorField& grad_fn,
                               const std::vector<Vector>& probes, double fd_step);

struct AdamConfig {
  double lr = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct MetricTrainRecord {
  int iter = 0;
  double div = 0.0;
  double loss = 0.0;
};

struct MetricTrainResult {
  MetricNetParams params;  // best recorded
  std::vector<MetricTrainRecord> history;
  double best_loss = 0.0;
  bool kicked = false;
  bool aborted = false;  // non-finite loss encountered
};

/// Minimizes Div^2 over phi with fresh probes every iteration and returns the
/// best parameters seen. Div^2 is even in u, so zero heads are a stationary
/// point; when training starts there with a non-zero loss, the first update
/// replaces the heads with U(+-head_kick) draws instead of a gradient step.
MetricTrainResult train_metric_net(const MetricNet& net, const MetricNetParams& phi,
                                   const Vector& theta, const VectorField& grad_fn,
                                   const ProbeConfig& pc, int max_iters, const AdamConfig& adam);

template <class T>
std::vector<T> MetricNet::conv_valid(const std::vector<T>& grid, int rows, int cols, int kr,
                                     int kc, std::span<const T> phi, int kernel, int bias) {
  const int out_rows = rows - kr + 1;
  const int out_cols = cols - kc + 1;
  std::vector<T> out(static_cast<std::size_t>(out_rows) * out_cols);
  for (int r = 0; r < out_rows; ++r) {
    for (int c = 0; c < out_cols; ++c) {
      T acc = phi[static_cast<std::size_t>(bias)];
      for (int a = 0; a < kr; ++a) {
        for (int b = 0; b < kc; ++b) {
          acc += phi[static_cast<std::size_t>(kernel + a * kc + b)] *
                 grid[static_cast<std::size_t>((r + a) * cols + c + b)];
        }
      }
      out[static_cast<std::size_t>(r * out_cols + c)] = acc;
    }
  }
  return out;
}

template <class T>
NetOutput<T> MetricNet::forward_generic(std::span<const T> phi, std::span<const T> theta) const {
  check_sizes(phi.size(), theta.size());
  auto at = [&](int i) -> const T& { return phi[static_cast<std::size_t>(i)]; };

  std::vector<T> features;
  features.reserve(plans_.size() * static_cast<std::size_t>(cfg_.segment_width));
  for (const SegmentPlan& p : plans_) {
    std::vector<T> grid(static_cast<std::size_t>(p.pad_rows) * p.pad_cols, T(0.0));
    for (int r = 0; r < p.seg.rows; ++r) {
      for (int c = 0; c < p.seg.cols; ++c) {
        grid[static_cast<std::size_t>(r * p.pad_cols + c)] =
            theta[static_cast<std::size_t>(p.seg.offset + r * p.seg.cols + c)];
      }
    }
    const int mid_rows = p.pad_rows - p.kernel_rows + 1;
    const int mid_cols = p.pad_cols - p.kernel_cols + 1;
    const std::vector<T> mid = conv_valid<T>(grid, p.pad_rows, p.pad_cols, p.kernel_rows,
                                             p.kernel_cols, phi, p.conv1, p.conv1_bias);
    const std::vector<T> flat = conv_valid<T>(mid, mid_rows, mid_cols, p.kernel_rows,
                                              p.kernel_cols, phi, p.conv2, p.conv2_bias);

    std::vector<T> pooled;
    if (p.seg.pool_exempt) {
      pooled = flat;
    } else {
      const std::size_t window = static_cast<std::size_t>(cfg_.pool_size);
      for (std::size_t start = 0; start < flat.size(); start += window) {
        const std::size_t stop = std::min(flat.size(), start + window);
        T acc = 0.0;
        for (std::size_t i = start; i < stop; ++i) acc += flat[i];
        pooled.push_back(acc / static_cast<double>(stop - start));
      }
    }

    for (int h = 0; h < cfg_.segment_width; ++h) {
      T acc = at(p.dense_bias + h);
      const int row = p.dense + h * p.pooled;
      for (int i = 0; i < p.pooled; ++i) acc += at(row + i) * pooled[static_cast<std::size_t>(i)];
      features.push_back(softplus(acc));
    }
  }

  const int fan_in = static_cast<int>(features.size());
  std::vector<T> trunk(static_cast<std::size_t>(cfg_.trunk_width));
  for (int h = 0; h < cfg_.trunk_width; ++h) {
    T acc = at(trunk_bias_ + h);
    const int row = trunk_ + h * fan_in;
    for (int i = 0; i < fan_in; ++i) acc += at(row + i) * features[static_cast<std::size_t>(i)];
    trunk[static_cast<std::size_t>(h)] = softplus(acc);
  }

  auto head = [&](int weights, int bias) {
    std::vector<T> out(static_cast<std::size_t>(cfg_.m_tilde));
    for (int k = 0; k < cfg_.m_tilde; ++k) {
      T acc = at(bias + k);
      const int row = weights + k * cfg_.trunk_width;
      for (int h = 0; h < cfg_.trunk_width; ++h) acc += at(row + h) * trunk[static_cast<std::size_t>(h)];
      out[static_cast<std::size_t>(k)] = acc;
    }
    return out;
  };
  return {head(omega_, omega_bias_), head(sigma_, sigma_bias_)};
}

}  // namespace rpg
