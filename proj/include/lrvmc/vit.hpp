#pragma once

#include <string>
#include <vector>

#include "lrvmc/mlp.hpp"

namespace lrvmc {

struct ViTHyperparameters {
  int n_sites = 50;
  int token_dim = 5;                        // d; N = n * d exactly
  int embed_dim = 14;                       // d_emb
  int heads = 2;                            // h; d_emb divisible by h
  int core_mlp_layers = 3;                  // n_MLP
  std::vector<int> postprocessor_dims = {5};

  int n_tokens() const { return n_sites / token_dim; }
  int head_dim() const { return embed_dim / heads; }
  void validate() const;

  // Table-default geometry: d = N/10 when N is a multiple of 10, otherwise
  // single-spin tokens.
  static ViTHyperparameters table_defaults(int n_sites);
};

// Splits a configuration into n contiguous tokens of length d (one per column).
Eigen::MatrixXd tokenize(const SpinVector& s, int token_dim);

// Shared affine embedding applied to every token column.
Eigen::MatrixXd embed_tokens(const Eigen::MatrixXd& tokens, const Eigen::MatrixXd& w,
                             const Eigen::VectorXd& b);

// Subtract the mean, divide by the population standard deviation + epsilon,
// then apply the elementwise gain and offset. Requires dim >= 2.
Eigen::VectorXd layer_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& gain,
                           const Eigen::VectorXd& offset);

constexpr double kLayerNormEpsilon = 1e-6;

// One attention head: output_i = sum_j a_ij V x_j with the circulant weights
// a_ij = c_{(j - i) mod n}. head_input is p x n, one token per column.
Eigen::MatrixXd factored_attention(const Eigen::MatrixXd& head_input,
                                   const Eigen::VectorXd& circulant,
                                   const Eigen::MatrixXd& value);

// Vision-Transformer wave function. Pipeline per cyclic token shift t:
// tokenize -> embed -> core block -> token-mean pool -> post-processor MLP ->
// scalar affine, giving a branch output o_t; the branches are combined at
// amplitude level, log psi = log[(1/n) sum_t exp(o_t)], via a max-shifted
// log-sum-exp.
class ViTAnsatz : public Ansatz {
 public:
  explicit ViTAnsatz(ViTHyperparameters hp);

  std::string kind() const override { return "vit"; }
  int n_sites() const override { return hp_.n_sites; }
  const ViTHyperparameters& hyperparameters() const { return hp_; }
  const ParameterLayout& layout() const override { return layout_; }

  Eigen::VectorXd log_psi_batch(const Eigen::VectorXd& theta,
                                const SpinBatch& configs) const override;
  LogAmplitudeResult evaluate(const Eigen::VectorXd& theta, const SpinVector& s,
                              bool with_derivatives) const override;

  // Readable single-configuration path; the batched path must agree with it.
  Eigen::MatrixXd core_block(const Eigen::VectorXd& theta, const Eigen::MatrixXd& embedded) const;
  double symmetrize_and_reduce(const Eigen::VectorXd& theta, const SpinVector& s) const;

 private:
  ViTHyperparameters hp_;
  ParameterLayout layout_;
};

}  // namespace lrvmc
