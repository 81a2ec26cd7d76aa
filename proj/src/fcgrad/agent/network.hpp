#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fcgrad/common/rng.hpp"
#include "fcgrad/gradcore/gradcore.hpp"

namespace fcg::agent {

using gradcore::ConstParams;
using gradcore::ParamVector;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct NetShape {
  std::size_t obs_dim = 0;
  std::size_t hidden = 64;
  std::size_t actions = 0;

  std::size_t policy_size() const;
  std::size_t value_size() const;
  // Describes the flattening order; changes whenever the order does.
  std::string layout_string() const;
  std::uint64_t layout_hash() const;
};

// Nonzeros of a matrix, column by column.
struct SparseColumns {
  std::vector<int> start;  // cols + 1 offsets
  std::vector<int> row;
  std::vector<double> value;

  void assign(const Eigen::Ref<const Matrix>& m);
};

struct Forward {
  // Observations are one-hot windows, mostly zeros.
  SparseColumns obs;
  Matrix hidden;  // hidden x B, tanh activations
  Matrix logp;    // actions x B, log-probabilities
  Matrix probs;   // actions x B
  Vector v_ind;   // B
  Vector v_col;   // B
};

// Dense tanh encoder shared by a softmax policy head and two scalar value
// heads.
//
// Flattening order, all matrices column-major:
//   policy_params = enc_w (hidden x obs), enc_b (hidden),
//                   pol_w (actions x hidden), pol_b (actions)
//   value_params  = vind_w (hidden), vind_b (1), vcol_w (hidden), vcol_b (1)
class PolicyNetwork {
 public:
  PolicyNetwork() = default;
  explicit PolicyNetwork(const NetShape& shape);

  const NetShape& shape() const { return shape_; }

  // Encoder and value weights ~ N(0, 1/fan_in), policy weights scaled by
  // policy_scale, biases zero.
  void init(Rng& rng, double policy_scale = 0.01);

  Forward forward(const Eigen::Ref<const Matrix>& obs) const;

  ParamVector flatten() const;
  void unflatten(ConstParams flat);

  ParamVector policy_params;
  ParamVector value_params;

  using CMap = Eigen::Map<const Matrix>;
  using CVMap = Eigen::Map<const Vector>;
  CMap enc_w() const;
  CVMap enc_b() const;
  CMap pol_w() const;
  CVMap pol_b() const;
  CVMap vind_w() const;
  double vind_b() const;
  CVMap vcol_w() const;
  double vcol_b() const;

  // Offsets into policy_params / value_params.
  std::size_t off_enc_b() const { return shape_.hidden * shape_.obs_dim; }
  std::size_t off_pol_w() const { return off_enc_b() + shape_.hidden; }
  std::size_t off_pol_b() const {
    return off_pol_w() + shape_.actions * shape_.hidden;
  }
  std::size_t off_vcol_w() const { return shape_.hidden + 1; }

 private:
  NetShape shape_;
};

struct ActionDistribution {
  std::vector<double> probs;
  double v_ind = 0.0;
  double v_col = 0.0;
};

ActionDistribution policy_forward(const PolicyNetwork& net, ConstParams obs);

}  // namespace fcg::agent
