#include "lrvmc/vit.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace lrvmc {

void ViTHyperparameters::validate() const {
  if (n_sites < 1) throw std::invalid_argument("vit: N must be >= 1");
  if (token_dim < 1 || n_sites % token_dim != 0) {
    throw std::invalid_argument("vit: N must be divisible by the token dimension");
  }
  if (embed_dim < 2) throw std::invalid_argument("vit: embedding dimension must be >= 2");
  if (heads < 1 || embed_dim % heads != 0) {
    throw std::invalid_argument("vit: embedding dimension must be divisible by heads");
  }
  if (core_mlp_layers < 1) throw std::invalid_argument("vit: need at least one core MLP layer");
  for (int d : postprocessor_dims) {
    if (d < 1) throw std::invalid_argument("vit: post-processor dims must be >= 1");
  }
}

ViTHyperparameters ViTHyperparameters::table_defaults(int n_sites) {
  ViTHyperparameters hp;
  hp.n_sites = n_sites;
  hp.token_dim = (n_sites >= 10 && n_sites % 10 == 0) ? n_sites / 10 : 1;
  return hp;
}

Eigen::MatrixXd tokenize(const SpinVector& s, int token_dim) {
  const Eigen::Index n_sites = s.size();
  if (token_dim < 1 || n_sites % token_dim != 0) {
    throw std::invalid_argument("tokenize: configuration length not divisible by token size");
  }
  const Eigen::Index n = n_sites / token_dim;
  Eigen::MatrixXd tokens(token_dim, n);
  for (Eigen::Index k = 0; k < n; ++k) tokens.col(k) = s.segment(k * token_dim, token_dim);
  return tokens;
}

Eigen::MatrixXd embed_tokens(const Eigen::MatrixXd& tokens, const Eigen::MatrixXd& w,
                             const Eigen::VectorXd& b) {
  if (w.cols() != tokens.rows() || w.rows() != b.size()) {
    throw std::invalid_argument("embed_tokens: dimension mismatch");
  }
  Eigen::MatrixXd out = w * tokens;
  out.colwise() += b;
  return out;
}

Eigen::VectorXd layer_norm(const Eigen::VectorXd& x, const Eigen::VectorXd& gain,
                           const Eigen::VectorXd& offset) {
  if (x.size() < 2) throw std::invalid_argument("layer_norm: dimension must be >= 2");
  if (gain.size() != x.size() || offset.size() != x.size()) {
    throw std::invalid_argument("layer_norm: gain/offset dimension mismatch");
  }
  const double mu = x.mean();
  const double sigma = std::sqrt((x.array() - mu).square().mean());
  Eigen::VectorXd h = (x.array() - mu) / (sigma + kLayerNormEpsilon);
  return gain.cwiseProduct(h) + offset;
}

Eigen::MatrixXd factored_attention(const Eigen::MatrixXd& head_input,
                                   const Eigen::VectorXd& circulant,
                                   const Eigen::MatrixXd& value) {
  const Eigen::Index n = head_input.cols();
  if (circulant.size() != n) {
    throw std::invalid_argument("factored_attention: circulant length must equal token count");
  }
  if (value.rows() != head_input.rows() || value.cols() != head_input.rows()) {
    throw std::invalid_argument("factored_attention: value matrix dimension mismatch");
  }
  const Eigen::MatrixXd vx = value * head_input;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(head_input.rows(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      out.col(i) += circulant[(j - i + n) % n] * vx.col(j);
    }
  }
  return out;
}

namespace {

// Read-only views of the flat parameter vector.
struct ViTParams {
  Eigen::Map<const Eigen::MatrixXd> embed_w;
  Eigen::Map<const Eigen::VectorXd> embed_b;
  Eigen::Map<const Eigen::VectorXd> ln1_gain, ln1_offset, ln2_gain, ln2_offset;
  std::vector<Eigen::Map<const Eigen::VectorXd>> attn_c;
  std::vector<Eigen::Map<const Eigen::MatrixXd>> attn_v;
  std::vector<Eigen::Map<const Eigen::MatrixXd>> core_w;
  std::vector<Eigen::Map<const Eigen::VectorXd>> core_b;
  std::vector<Eigen::Map<const Eigen::MatrixXd>> post_w;
  std::vector<Eigen::Map<const Eigen::VectorXd>> post_b;
  double out_scale;
  double out_offset;

  ViTParams(const Eigen::VectorXd& theta, const ParameterLayout& lay,
            const ViTHyperparameters& hp)
      : embed_w(theta.data() + lay.slice("embed_w").offset, hp.embed_dim, hp.token_dim),
        embed_b(theta.data() + lay.slice("embed_b").offset, hp.embed_dim),
        ln1_gain(theta.data() + lay.slice("ln1_gain").offset, hp.embed_dim),
        ln1_offset(theta.data() + lay.slice("ln1_offset").offset, hp.embed_dim),
        ln2_gain(theta.data() + lay.slice("ln2_gain").offset, hp.embed_dim),
        ln2_offset(theta.data() + lay.slice("ln2_offset").offset, hp.embed_dim) {
    const int p = hp.head_dim();
    for (int mu = 0; mu < hp.heads; ++mu) {
      attn_c.emplace_back(theta.data() + lay.slice("attn_c" + std::to_string(mu)).offset,
                          hp.n_tokens());
      attn_v.emplace_back(theta.data() + lay.slice("attn_v" + std::to_string(mu)).offset, p, p);
    }
    for (int l = 1; l <= hp.core_mlp_layers; ++l) {
      core_w.emplace_back(theta.data() + lay.slice("core_w" + std::to_string(l)).offset,
                          hp.embed_dim, hp.embed_dim);
      core_b.emplace_back(theta.data() + lay.slice("core_b" + std::to_string(l)).offset,
                          hp.embed_dim);
    }
    std::vector<int> dims = hp.postprocessor_dims;
    dims.push_back(1);
    int in_dim = hp.embed_dim;
    for (std::size_t l = 0; l < dims.size(); ++l) {
      post_w.emplace_back(theta.data() + lay.slice("post_w" + std::to_string(l + 1)).offset,
                          dims[l], in_dim);
      post_b.emplace_back(theta.data() + lay.slice("post_b" + std::to_string(l + 1)).offset,
                          dims[l]);
      in_dim = dims[l];
    }
    out_scale = theta[lay.slice("out_scale").offset];
    out_offset = theta[lay.slice("out_offset").offset];
  }
};

// Columnwise LayerNorm; optionally records the normalized columns and sigmas
// for the backward pass.
void layer_norm_columns(const Eigen::MatrixXd& x, const Eigen::Map<const Eigen::VectorXd>& gain,
                        const Eigen::Map<const Eigen::VectorXd>& offset, Eigen::MatrixXd& out,
                        Eigen::MatrixXd* normalized = nullptr,
                        Eigen::VectorXd* sigmas = nullptr) {
  const Eigen::Index dim = x.rows();
  out.resize(dim, x.cols());
  if (normalized) normalized->resize(dim, x.cols());
  if (sigmas) sigmas->resize(x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const auto col = x.col(c);
    const double mu = col.mean();
    const double sigma = std::sqrt((col.array() - mu).square().mean());
    const double inv = 1.0 / (sigma + kLayerNormEpsilon);
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double h = (col[i] - mu) * inv;
      if (normalized) (*normalized)(i, c) = h;
      out(i, c) = gain[i] * h + offset[i];
    }
    if (sigmas) (*sigmas)[c] = sigma;
  }
}

// Backward through one LayerNorm column. da is the gradient on the affine
// output; returns the gradient on the input column.
Eigen::VectorXd layer_norm_backward_column(const Eigen::VectorXd& da,
                                           const Eigen::VectorXd& h, double sigma,
                                           const Eigen::Map<const Eigen::VectorXd>& gain) {
  const Eigen::Index dim = da.size();
  Eigen::VectorXd ghat = gain.cwiseProduct(da);
  Eigen::VectorXd dx =
      (ghat.array() - ghat.mean()).matrix() / (sigma + kLayerNormEpsilon);
  if (sigma > 0.0) {
    dx -= h * (ghat.dot(h) / (static_cast<double>(dim) * sigma));
  }
  return dx;
}

void silu_inplace(Eigen::MatrixXd& m) {
  m.array() /= 1.0 + (-m.array()).exp();
}

void log_cosh_inplace(Eigen::MatrixXd& m) {
  constexpr double kLog2 = 0.6931471805599453094172321214581766;
  m.array() = m.array().abs() + (-2.0 * m.array().abs()).exp().log1p() - kLog2;
}

}  // namespace

ViTAnsatz::ViTAnsatz(ViTHyperparameters hp) : hp_(std::move(hp)) {
  hp_.validate();
  const int n = hp_.n_tokens();
  const int de = hp_.embed_dim;
  const int p = hp_.head_dim();
  layout_.add("embed_w", static_cast<Eigen::Index>(de) * hp_.token_dim,
              1.0 / std::sqrt(static_cast<double>(hp_.token_dim)));
  layout_.add("embed_b", de, 0.0);
  layout_.add("ln1_gain", de, -1.0);
  layout_.add("ln1_offset", de, 0.0);
  for (int mu = 0; mu < hp_.heads; ++mu) {
    layout_.add("attn_c" + std::to_string(mu), n, 1.0 / std::sqrt(static_cast<double>(n)));
    layout_.add("attn_v" + std::to_string(mu), static_cast<Eigen::Index>(p) * p,
                1.0 / std::sqrt(static_cast<double>(p)));
  }
  layout_.add("ln2_gain", de, -1.0);
  layout_.add("ln2_offset", de, 0.0);
  for (int l = 1; l <= hp_.core_mlp_layers; ++l) {
    layout_.add("core_w" + std::to_string(l), static_cast<Eigen::Index>(de) * de,
                1.0 / std::sqrt(static_cast<double>(de)));
    layout_.add("core_b" + std::to_string(l), de, 0.0);
  }
  std::vector<int> dims = hp_.postprocessor_dims;
  dims.push_back(1);
  int in_dim = de;
  for (std::size_t l = 0; l < dims.size(); ++l) {
    layout_.add("post_w" + std::to_string(l + 1), static_cast<Eigen::Index>(dims[l]) * in_dim,
                1.0 / std::sqrt(static_cast<double>(in_dim)));
    layout_.add("post_b" + std::to_string(l + 1), dims[l], 0.0);
    in_dim = dims[l];
  }
  layout_.add("out_scale", 1, 1.0);
  layout_.add("out_offset", 1, 0.0);
}

Eigen::MatrixXd ViTAnsatz::core_block(const Eigen::VectorXd& theta,
                                      const Eigen::MatrixXd& embedded) const {
  const ViTParams prm(theta, layout_, hp_);
  const int n = static_cast<int>(embedded.cols());
  const int p = hp_.head_dim();

  Eigen::MatrixXd a1(hp_.embed_dim, n);
  for (int c = 0; c < n; ++c) {
    a1.col(c) = layer_norm(embedded.col(c), prm.ln1_gain, prm.ln1_offset);
  }
  Eigen::MatrixXd y = embedded;
  for (int mu = 0; mu < hp_.heads; ++mu) {
    y.middleRows(mu * p, p) +=
        factored_attention(a1.middleRows(mu * p, p), prm.attn_c[mu], prm.attn_v[mu]);
  }
  Eigen::MatrixXd z(hp_.embed_dim, n);
  for (int c = 0; c < n; ++c) {
    z.col(c) = layer_norm(y.col(c), prm.ln2_gain, prm.ln2_offset);
  }
  for (int l = 0; l < hp_.core_mlp_layers; ++l) {
    Eigen::MatrixXd pre = prm.core_w[l] * z;
    pre.colwise() += prm.core_b[l];
    silu_inplace(pre);
    z = std::move(pre);
  }
  z += y;
  log_cosh_inplace(z);
  return z;
}

double ViTAnsatz::symmetrize_and_reduce(const Eigen::VectorXd& theta,
                                        const SpinVector& s) const {
  const ViTParams prm(theta, layout_, hp_);
  const int n = hp_.n_tokens();
  const Eigen::MatrixXd tokens = tokenize(s, hp_.token_dim);
  Eigen::VectorXd branch_out(n);
  for (int t = 0; t < n; ++t) {
    Eigen::MatrixXd rotated(hp_.token_dim, n);
    for (int i = 0; i < n; ++i) rotated.col(i) = tokens.col((i + t) % n);
    const Eigen::MatrixXd blk =
        core_block(theta, embed_tokens(rotated, prm.embed_w, prm.embed_b));
    Eigen::VectorXd pooled = blk.rowwise().mean();
    Eigen::VectorXd q = pooled;
    for (std::size_t l = 0; l < prm.post_w.size(); ++l) {
      Eigen::VectorXd pre = prm.post_w[l] * q + prm.post_b[l];
      for (Eigen::Index i = 0; i < pre.size(); ++i) pre[i] = silu(pre[i]);
      q = std::move(pre);
    }
    branch_out[t] = prm.out_scale * q[0] + prm.out_offset;
  }
  const double m = branch_out.maxCoeff();
  return m + std::log((branch_out.array() - m).exp().sum()) - std::log(static_cast<double>(n));
}

Eigen::VectorXd ViTAnsatz::log_psi_batch(const Eigen::VectorXd& theta,
                                         const SpinBatch& configs) const {
  if (configs.rows() != hp_.n_sites) {
    throw std::invalid_argument("vit: configuration size mismatch");
  }
  const ViTParams prm(theta, layout_, hp_);
  const Eigen::Index n = hp_.n_tokens();
  const Eigen::Index d = hp_.token_dim;
  const Eigen::Index de = hp_.embed_dim;
  const Eigen::Index p = hp_.head_dim();
  const Eigen::Index total = configs.cols();
  Eigen::VectorXd out(total);

  // Chunked so each slab buffer stays around 16 MB.
  const Eigen::Index chunk =
      std::max<Eigen::Index>(1, 2'000'000 / std::max<Eigen::Index>(1, de * n * n));
  Eigen::MatrixXd tokens, embedded, x, a1, vx, mha, z, tmp, pooled, post;
  for (Eigen::Index start = 0; start < total; start += chunk) {
    const Eigen::Index b = std::min(chunk, total - start);
    const Eigen::Index s_inst = b * n;      // branch instances (config, shift)
    const Eigen::Index cols = n * s_inst;   // token-slot-major slab columns

    tokens.resize(d, b * n);
    for (Eigen::Index c = 0; c < b; ++c) {
      for (Eigen::Index k = 0; k < n; ++k) {
        tokens.col(c * n + k) = configs.block(k * d, start + c, d, 1);
      }
    }
    embedded.noalias() = prm.embed_w * tokens;
    embedded.colwise() += prm.embed_b;

    // Column (i*s_inst + c*n + t) holds embedded token (i+t) mod n of config c:
    // token slot i of the branch shifted by t.
    x.resize(de, cols);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index c = 0; c < b; ++c) {
        for (Eigen::Index t = 0; t < n; ++t) {
          x.col(i * s_inst + c * n + t) = embedded.col(c * n + (i + t) % n);
        }
      }
    }

    layer_norm_columns(x, prm.ln1_gain, prm.ln1_offset, a1);
    mha.setZero(de, cols);
    for (int mu = 0; mu < hp_.heads; ++mu) {
      vx.noalias() = prm.attn_v[mu] * a1.middleRows(mu * p, p);
      auto head_out = mha.middleRows(mu * p, p);
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k < n; ++k) {
          head_out.middleCols(i * s_inst, s_inst) +=
              prm.attn_c[mu][k] * vx.middleCols(((i + k) % n) * s_inst, s_inst);
        }
      }
    }
    mha += x;  // y = x + MHA(LN(x))

    layer_norm_columns(mha, prm.ln2_gain, prm.ln2_offset, z);
    for (int l = 0; l < hp_.core_mlp_layers; ++l) {
      tmp.noalias() = prm.core_w[l] * z;
      tmp.colwise() += prm.core_b[l];
      silu_inplace(tmp);
      z.swap(tmp);
    }
    z += mha;  // z = y + MLP(LN(y))
    log_cosh_inplace(z);

    pooled.setZero(de, s_inst);
    for (Eigen::Index i = 0; i < n; ++i) pooled += z.middleCols(i * s_inst, s_inst);
    pooled /= static_cast<double>(n);

    post = std::move(pooled);
    for (std::size_t l = 0; l < prm.post_w.size(); ++l) {
      tmp.noalias() = prm.post_w[l] * post;
      tmp.colwise() += prm.post_b[l];
      silu_inplace(tmp);
      post = tmp;
    }

    const double log_n = std::log(static_cast<double>(n));
    for (Eigen::Index c = 0; c < b; ++c) {
      double m = -std::numeric_limits<double>::infinity();
      for (Eigen::Index t = 0; t < n; ++t) {
        m = std::max(m, prm.out_scale * post(0, c * n + t) + prm.out_offset);
      }
      double acc = 0.0;
      for (Eigen::Index t = 0; t < n; ++t) {
        acc += std::exp(prm.out_scale * post(0, c * n + t) + prm.out_offset - m);
      }
      out[start + c] = m + std::log(acc) - log_n;
    }
  }
  return out;
}

LogAmplitudeResult ViTAnsatz::evaluate(const Eigen::VectorXd& theta, const SpinVector& s,
                                       bool with_derivatives) const {
  const ViTParams prm(theta, layout_, hp_);
  const int n = hp_.n_tokens();
  const int de = hp_.embed_dim;
  const int p = hp_.head_dim();
  const int n_core = hp_.core_mlp_layers;
  const std::size_t n_post = prm.post_w.size();

  struct BranchCache {
    Eigen::MatrixXd x;                    // embedded (shifted) tokens
    Eigen::MatrixXd h1, a1;               // LN1 normalized / affine output
    Eigen::VectorXd s1;
    std::vector<Eigen::MatrixXd> vx;      // per head V * a1_head
    Eigen::MatrixXd y;                    // x + MHA
    Eigen::MatrixXd h2;
    Eigen::VectorXd s2;
    std::vector<Eigen::MatrixXd> core_pre, core_act;  // core_act[0] = LN2 output
    Eigen::MatrixXd y2;                   // y + MLP output (pre log cosh)
    std::vector<Eigen::VectorXd> post_pre, post_act;  // post_act[0] = pooled
    double o = 0.0;
  };

  const Eigen::MatrixXd tokens = tokenize(s, hp_.token_dim);
  std::vector<BranchCache> branches(n);
  Eigen::VectorXd branch_out(n);

  for (int t = 0; t < n; ++t) {
    BranchCache& bc = branches[t];
    Eigen::MatrixXd rotated(hp_.token_dim, n);
    for (int i = 0; i < n; ++i) rotated.col(i) = tokens.col((i + t) % n);
    bc.x = embed_tokens(rotated, prm.embed_w, prm.embed_b);
    layer_norm_columns(bc.x, prm.ln1_gain, prm.ln1_offset, bc.a1, &bc.h1, &bc.s1);
    bc.y = bc.x;
    bc.vx.resize(hp_.heads);
    for (int mu = 0; mu < hp_.heads; ++mu) {
      bc.vx[mu] = prm.attn_v[mu] * bc.a1.middleRows(mu * p, p);
      auto head_out = bc.y.middleRows(mu * p, p);
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          head_out.col(i) += prm.attn_c[mu][(j - i + n) % n] * bc.vx[mu].col(j);
        }
      }
    }
    bc.core_act.resize(n_core + 1);
    bc.core_pre.resize(n_core);
    layer_norm_columns(bc.y, prm.ln2_gain, prm.ln2_offset, bc.core_act[0], &bc.h2, &bc.s2);
    for (int l = 0; l < n_core; ++l) {
      bc.core_pre[l] = prm.core_w[l] * bc.core_act[l];
      bc.core_pre[l].colwise() += prm.core_b[l];
      bc.core_act[l + 1] = bc.core_pre[l];
      silu_inplace(bc.core_act[l + 1]);
    }
    bc.y2 = bc.y + bc.core_act[n_core];
    Eigen::MatrixXd blk = bc.y2;
    log_cosh_inplace(blk);

    bc.post_act.resize(n_post + 1);
    bc.post_pre.resize(n_post);
    bc.post_act[0] = blk.rowwise().mean();
    for (std::size_t l = 0; l < n_post; ++l) {
      bc.post_pre[l] = prm.post_w[l] * bc.post_act[l] + prm.post_b[l];
      bc.post_act[l + 1] = bc.post_pre[l].unaryExpr([](double v) { return silu(v); });
    }
    bc.o = prm.out_scale * bc.post_act[n_post][0] + prm.out_offset;
    branch_out[t] = bc.o;
  }

  const double m = branch_out.maxCoeff();
  const Eigen::VectorXd expw = (branch_out.array() - m).exp();
  const double total = expw.sum();
  LogAmplitudeResult result;
  result.log_psi = m + std::log(total) - std::log(static_cast<double>(n));
  if (!with_derivatives) return result;

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(layout_.total());
  auto slice_map = [&](const char* name, int rows, int cols) {
    return Eigen::Map<Eigen::MatrixXd>(grad.data() + layout_.slice(name).offset, rows, cols);
  };
  auto slice_vec = [&](const std::string& name) {
    const auto& sl = layout_.slice(name);
    return Eigen::Map<Eigen::VectorXd>(grad.data() + sl.offset, sl.size);
  };

  Eigen::MatrixXd d_embedded = Eigen::MatrixXd::Zero(de, n);
  for (int t = 0; t < n; ++t) {
    const BranchCache& bc = branches[t];
    const double weight = expw[t] / total;  // d log psi / d o_t

    // scalar affine
    grad[layout_.slice("out_scale").offset] += weight * bc.post_act[n_post][0];
    grad[layout_.slice("out_offset").offset] += weight;
    Eigen::VectorXd dq = Eigen::VectorXd::Constant(1, weight * prm.out_scale);

    // post-processor
    for (std::size_t l = n_post; l-- > 0;) {
      Eigen::VectorXd dpre = dq;
      for (Eigen::Index i = 0; i < dpre.size(); ++i) {
        dpre[i] *= activate_derivative(Activation::kSilu, bc.post_pre[l][i]);
      }
      slice_map(("post_w" + std::to_string(l + 1)).c_str(), static_cast<int>(dpre.size()),
                static_cast<int>(bc.post_act[l].size())) +=
          dpre * bc.post_act[l].transpose();
      slice_vec("post_b" + std::to_string(l + 1)) += dpre;
      dq = prm.post_w[l].transpose() * dpre;
    }

    // pooling distributes the gradient evenly over token columns
    Eigen::MatrixXd dy2 = (dq / static_cast<double>(n)).replicate(1, n);
    dy2.array() *= bc.y2.array().tanh();  // log cosh derivative

    Eigen::MatrixXd dy = dy2;  // residual z = y + MLP(LN(y))
    Eigen::MatrixXd dz = dy2;
    for (int l = n_core; l-- > 0;) {
      Eigen::MatrixXd dpre = dz;
      for (Eigen::Index c = 0; c < dpre.cols(); ++c) {
        for (Eigen::Index i = 0; i < dpre.rows(); ++i) {
          dpre(i, c) *= activate_derivative(Activation::kSilu, bc.core_pre[l](i, c));
        }
      }
      slice_map(("core_w" + std::to_string(l + 1)).c_str(), de, de) +=
          dpre * bc.core_act[l].transpose();
      slice_vec("core_b" + std::to_string(l + 1)) += dpre.rowwise().sum();
      dz = prm.core_w[l].transpose() * dpre;
    }
    // LN2 backward (dz is the gradient on its affine output)
    {
      auto g_gain = slice_vec("ln2_gain");
      auto g_off = slice_vec("ln2_offset");
      for (int c = 0; c < n; ++c) {
        const Eigen::VectorXd da = dz.col(c);
        g_gain += da.cwiseProduct(bc.h2.col(c));
        g_off += da;
        dy.col(c) += layer_norm_backward_column(da, bc.h2.col(c), bc.s2[c], prm.ln2_gain);
      }
    }

    // MHA backward; dy is the gradient on y = x + MHA(LN1(x))
    Eigen::MatrixXd dx = dy;
    Eigen::MatrixXd da1 = Eigen::MatrixXd::Zero(de, n);
    for (int mu = 0; mu < hp_.heads; ++mu) {
      const auto d_head = dy.middleRows(mu * p, p);
      Eigen::MatrixXd dvx = Eigen::MatrixXd::Zero(p, n);
      auto g_c = slice_vec("attn_c" + std::to_string(mu));
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          const int k = (j - i + n) % n;
          dvx.col(j) += prm.attn_c[mu][k] * d_head.col(i);
          g_c[k] += d_head.col(i).dot(bc.vx[mu].col(j));
        }
      }
      slice_map(("attn_v" + std::to_string(mu)).c_str(), p, p) +=
          dvx * bc.a1.middleRows(mu * p, p).transpose();
      da1.middleRows(mu * p, p) = prm.attn_v[mu].transpose() * dvx;
    }
    // LN1 backward
    {
      auto g_gain = slice_vec("ln1_gain");
      auto g_off = slice_vec("ln1_offset");
      for (int c = 0; c < n; ++c) {
        const Eigen::VectorXd da = da1.col(c);
        g_gain += da.cwiseProduct(bc.h1.col(c));
        g_off += da;
        dx.col(c) += layer_norm_backward_column(da, bc.h1.col(c), bc.s1[c], prm.ln1_gain);
      }
    }
    // undo the branch rotation when accumulating onto the shared embedding
    for (int i = 0; i < n; ++i) d_embedded.col((i + t) % n) += dx.col(i);
  }

  slice_map("embed_w", de, hp_.token_dim) += d_embedded * tokens.transpose();
  slice_vec("embed_b") += d_embedded.rowwise().sum();

  result.derivatives = std::move(grad);
  return result;
}

}  // namespace lrvmc
