#include "introspect/tape.hpp"

#include <cmath>
#include <cstring>
#include <memory>

#include "introspect/error.hpp"
#include "kernels.hpp"

namespace introspect {

namespace {

detail::Padding to_detail(Padding p) {
  return p == Padding::kValid ? detail::Padding::kValid : detail::Padding::kSame;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) {
    raise(ErrorCode::kDimension, std::string(op) + ": shape mismatch " + a.shape_str() +
                                     " vs " + b.shape_str());
  }
}

}  // namespace

void Tape::check_id(ValueId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size()) {
    raise(ErrorCode::kContract, "tape: value id " + std::to_string(id) + " out of range");
  }
}

const Tape::Node& Tape::node(ValueId id) const {
  check_id(id);
  return nodes_[static_cast<std::size_t>(id)];
}

const Tensor& Tape::value(ValueId id) const { return node(id).value; }

bool Tape::requires_grad(ValueId id) const { return node(id).needs_grad; }

ValueId Tape::emit(Tensor value, bool needs_grad,
                   std::function<void(Tape&, ValueId)> backward) {
  nodes_.push_back(Node{std::move(value), needs_grad, std::move(backward)});
  return static_cast<ValueId>(nodes_.size() - 1);
}

ValueId Tape::leaf(Tensor value, bool requires_grad) {
  return emit(std::move(value), requires_grad, nullptr);
}

Tensor& Tape::grad_buffer(ValueId id) {
  auto& g = grads_[static_cast<std::size_t>(id)];
  if (g.empty()) g = Tensor::zeros(nodes_[static_cast<std::size_t>(id)].value.shape());
  return g;
}

bool Tape::grad_seeded(ValueId id) const {
  return !grads_[static_cast<std::size_t>(id)].empty();
}

ValueId Tape::add(ValueId a, ValueId b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  require_same_shape(ta, tb, "add");
  Tensor out(ta.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out.at(i) = ta.at(i) + tb.at(i);
  const bool ng = requires_grad(a) || requires_grad(b);
  return emit(std::move(out), ng, [a, b](Tape& t, ValueId self) {
    const Tensor& g = t.grads_[self];
    if (t.nodes_[a].needs_grad) {
      Tensor& ga = t.grad_buffer(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga.at(i) += g.at(i);
    }
    if (t.nodes_[b].needs_grad) {
      Tensor& gb = t.grad_buffer(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb.at(i) += g.at(i);
    }
  });
}

ValueId Tape::sub(ValueId a, ValueId b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  require_same_shape(ta, tb, "sub");
  Tensor out(ta.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out.at(i) = ta.at(i) - tb.at(i);
  const bool ng = requires_grad(a) || requires_grad(b);
  return emit(std::move(out), ng, [a, b](Tape& t, ValueId self) {
    const Tensor& g = t.grads_[self];
    if (t.nodes_[a].needs_grad) {
      Tensor& ga = t.grad_buffer(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga.at(i) += g.at(i);
    }
    if (t.nodes_[b].needs_grad) {
      Tensor& gb = t.grad_buffer(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb.at(i) -= g.at(i);
    }
  });
}

ValueId Tape::mul(ValueId a, ValueId b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  require_same_shape(ta, tb, "mul");
  Tensor out(ta.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out.at(i) = ta.at(i) * tb.at(i);
  const bool ng = requires_grad(a) || requires_grad(b);
  return emit(std::move(out), ng, [a, b](Tape& t, ValueId self) {
    const Tensor& g = t.grads_[self];
    const Tensor& ta = t.nodes_[a].value;
    const Tensor& tb = t.nodes_[b].value;
    if (t.nodes_[a].needs_grad) {
      Tensor& ga = t.grad_buffer(a);
      for (std::size_t i = 0; i < g.size(); ++i) ga.at(i) += g.at(i) * tb.at(i);
    }
    if (t.nodes_[b].needs_grad) {
      Tensor& gb = t.grad_buffer(b);
      for (std::size_t i = 0; i < g.size(); ++i) gb.at(i) += g.at(i) * ta.at(i);
    }
  });
}

ValueId Tape::scale(ValueId a, float s) {
  const Tensor& ta = value(a);
  Tensor out(ta.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out.at(i) = ta.at(i) * s;
  return emit(std::move(out), requires_grad(a), [a, s](Tape& t, ValueId self) {
    if (!t.nodes_[a].needs_grad) return;
    const Tensor& g = t.grads_[self];
    Tensor& ga = t.grad_buffer(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga.at(i) += g.at(i) * s;
  });
}

ValueId Tape::square(ValueId a) {
  const Tensor& ta = value(a);
  Tensor out(ta.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out.at(i) = ta.at(i) * ta.at(i);
  return emit(std::move(out), requires_grad(a), [a](Tape& t, ValueId self) {
    if (!t.nodes_[a].needs_grad) return;
    const Tensor& g = t.grads_[self];
    const Tensor& ta = t.nodes_[a].value;
    Tensor& ga = t.grad_buffer(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga.at(i) += 2.0f * ta.at(i) * g.at(i);
  });
}

ValueId Tape::relu(ValueId a) {
  const Tensor& ta = value(a);
  Tensor out(ta.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out.at(i) = ta.at(i) > 0.0f ? ta.at(i) : 0.0f;
  return emit(std::move(out), requires_grad(a), [a](Tape& t, ValueId self) {
    if (!t.nodes_[a].needs_grad) return;
    const Tensor& g = t.grads_[self];
    const Tensor& ta = t.nodes_[a].value;
    Tensor& ga = t.grad_buffer(a);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (ta.at(i) > 0.0f) ga.at(i) += g.at(i);
    }
  });
}

ValueId Tape::matmul(ValueId a, ValueId b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  if (ta.rank() != 2 || tb.rank() != 2) {
    raise(ErrorCode::kDimension, "matmul: expected rank-2 operands, got " + ta.shape_str() +
                                     " and " + tb.shape_str());
  }
  const int m = ta.dim(0), k = ta.dim(1), n = tb.dim(1);
  if (tb.dim(0) != k) {
    raise(ErrorCode::kDimension, "matmul: inner dimensions disagree (axis 1 of lhs is " +
                                     std::to_string(k) + ", axis 0 of rhs is " +
                                     std::to_string(tb.dim(0)) + ")");
  }
  Tensor out({m, n});
  detail::gemm_nn(m, k, n, ta.data(), tb.data(), out.data(), false);
  const bool ng = requires_grad(a) || requires_grad(b);
  return emit(std::move(out), ng, [a, b, m, k, n](Tape& t, ValueId self) {
    const Tensor& g = t.grads_[self];
    if (t.nodes_[a].needs_grad) {
      detail::gemm_nt(m, n, k, g.data(), t.nodes_[b].value.data(),
                      t.grad_buffer(a).data(), true);
    }
    if (t.nodes_[b].needs_grad) {
      detail::gemm_tn(k, m, n, t.nodes_[a].value.data(), g.data(),
                      t.grad_buffer(b).data(), true);
    }
  });
}

ValueId Tape::bias_add(ValueId x, ValueId bias) {
  const Tensor& tx = value(x);
  const Tensor& tb = value(bias);
  if (tb.rank() != 1) raise(ErrorCode::kDimension, "bias_add: bias must be rank 1");
  if (tx.rank() < 1 || tx.dim(tx.rank() - 1) != tb.dim(0)) {
    raise(ErrorCode::kDimension, "bias_add: trailing axis of " + tx.shape_str() +
                                     " does not match bias " + tb.shape_str());
  }
  const std::size_t d = static_cast<std::size_t>(tb.dim(0));
  Tensor out(tx.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out.at(i) = tx.at(i) + tb.at(i % d);
  const bool ng = requires_grad(x) || requires_grad(bias);
  return emit(std::move(out), ng, [x, bias, d](Tape& t, ValueId self) {
    const Tensor& g = t.grads_[self];
    if (t.nodes_[x].needs_grad) {
      Tensor& gx = t.grad_buffer(x);
      for (std::size_t i = 0; i < g.size(); ++i) gx.at(i) += g.at(i);
    }
    if (t.nodes_[bias].needs_grad) {
      Tensor& gb = t.grad_buffer(bias);
      for (std::size_t i = 0; i < g.size(); ++i) gb.at(i % d) += g.at(i);
    }
  });
}

ValueId Tape::conv2d(ValueId input, ValueId kernels, int stride, Padding padding) {
  const Tensor& tx = value(input);
  const Tensor& tk = value(kernels);
  const detail::Conv2dDims d =
      detail::conv2d_dims(tx.shape(), tk.shape(), stride, to_detail(padding));

  const std::size_t rows = d.cols_rows();
  const int patch = d.patch_size();
  std::vector<float> cols(rows * static_cast<std::size_t>(patch));
  detail::im2col(tx.data(), d, cols.data());

  std::vector<int> out_shape;
  if (tx.rank() == 4) out_shape = {d.batch, d.out_h, d.out_w, d.out_c};
  else out_shape = {d.out_h, d.out_w, d.out_c};
  Tensor out(out_shape);
  detail::gemm_nn(static_cast<int>(rows), patch, d.out_c, cols.data(), tk.data(),
                  out.data(), false);

  const bool ng = requires_grad(input) || requires_grad(kernels);
  return emit(std::move(out), ng, [input, kernels, d, rows, patch](Tape& t, ValueId self) {
    const Tensor& g = t.grads_[self];
    // The column matrix is recomputed rather than kept alive on the tape;
    // it is the largest buffer in the whole pipeline.
    std::vector<float> cols;
    if (t.nodes_[kernels].needs_grad) {
      cols.resize(rows * static_cast<std::size_t>(patch));
      detail::im2col(t.nodes_[input].value.data(), d, cols.data());
      detail::gemm_tn(patch, static_cast<int>(rows), d.out_c, cols.data(), g.data(),
                      t.grad_buffer(kernels).data(), true);
    }
    if (t.nodes_[input].needs_grad) {
      std::vector<float> dcols(rows * static_cast<std::size_t>(patch));
      detail::gemm_nt(static_cast<int>(rows), d.out_c, patch, g.data(),
                      t.nodes_[kernels].value.data(), dcols.data(), false);
      detail::col2im_acc(dcols.data(), d, t.grad_buffer(input).data());
    }
  });
}

ValueId Tape::maxpool2x2(ValueId x) {
  const Tensor& tx = value(x);
  int batch = 1, h = 0, w = 0, c = 0;
  if (tx.rank() == 3) {
    h = tx.dim(0); w = tx.dim(1); c = tx.dim(2);
  } else if (tx.rank() == 4) {
    batch = tx.dim(0); h = tx.dim(1); w = tx.dim(2); c = tx.dim(3);
  } else {
    raise(ErrorCode::kDimension, "maxpool2x2: expected HxWxC or NxHxWxC, got " + tx.shape_str());
  }
  if (h < 2 || w < 2) {
    raise(ErrorCode::kDimension, "maxpool2x2: spatial dims must be >= 2, got " + tx.shape_str());
  }
  std::vector<int> out_shape;
  if (tx.rank() == 4) out_shape = {batch, h / 2, w / 2, c};
  else out_shape = {h / 2, w / 2, c};
  Tensor out(out_shape);
  auto argmax = std::make_shared<std::vector<std::size_t>>();
  detail::maxpool2x2_forward(tx.data(), batch, h, w, c, out.data(), *argmax);
  return emit(std::move(out), requires_grad(x), [x, argmax](Tape& t, ValueId self) {
    if (!t.nodes_[x].needs_grad) return;
    detail::maxpool2x2_backward(t.grads_[self].data(), *argmax, t.grad_buffer(x).data());
  });
}

ValueId Tape::dropout(ValueId x, float rate, bool training, SeededRng* rng) {
  if (rate < 0.0f || rate >= 1.0f) {
    raise(ErrorCode::kConfig, "dropout: rate must be in [0,1), got " + std::to_string(rate));
  }
  const Tensor& tx = value(x);
  if (!training || rate == 0.0f) {
    Tensor out = tx;
    return emit(std::move(out), requires_grad(x), [x](Tape& t, ValueId self) {
      if (!t.nodes_[x].needs_grad) return;
      const Tensor& g = t.grads_[self];
      Tensor& gx = t.grad_buffer(x);
      for (std::size_t i = 0; i < g.size(); ++i) gx.at(i) += g.at(i);
    });
  }
  if (rng == nullptr) {
    raise(ErrorCode::kContract, "dropout: training mode requires an rng");
  }
  const float keep = 1.0f - rate;
  const float inv_keep = 1.0f / keep;
  auto mask = std::make_shared<Tensor>(tx.shape());
  Tensor out(tx.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const float m = rng->bernoulli(keep) ? inv_keep : 0.0f;
    mask->at(i) = m;
    out.at(i) = tx.at(i) * m;
  }
  return emit(std::move(out), requires_grad(x), [x, mask](Tape& t, ValueId self) {
    if (!t.nodes_[x].needs_grad) return;
    const Tensor& g = t.grads_[self];
    Tensor& gx = t.grad_buffer(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx.at(i) += g.at(i) * mask->at(i);
  });
}

ValueId Tape::batchnorm(ValueId x, ValueId gamma, ValueId beta, Tensor& running_mean,
                        Tensor& running_var, const BatchNormOptions& opt) {
  const Tensor& tx = value(x);
  if (tx.rank() != 2) {
    raise(ErrorCode::kDimension, "batchnorm: expected [N,F] input, got " + tx.shape_str());
  }
  const int n = tx.dim(0), f = tx.dim(1);
  const Tensor& tg = value(gamma);
  const Tensor& tb = value(beta);
  if (tg.rank() != 1 || tg.dim(0) != f || tb.rank() != 1 || tb.dim(0) != f ||
      running_mean.size() != static_cast<std::size_t>(f) ||
      running_var.size() != static_cast<std::size_t>(f)) {
    raise(ErrorCode::kDimension, "batchnorm: parameter shapes do not match feature count " +
                                     std::to_string(f));
  }

  Tensor out({n, f});
  const bool ng = requires_grad(x) || requires_grad(gamma) || requires_grad(beta);

  if (!opt.training) {
    auto rstd = std::make_shared<std::vector<float>>(static_cast<std::size_t>(f));
    for (int j = 0; j < f; ++j) {
      (*rstd)[j] = 1.0f / std::sqrt(running_var.at(j) + opt.epsilon);
    }
    auto mean = std::make_shared<std::vector<float>>(running_mean.values().begin(),
                                                     running_mean.values().end());
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < f; ++j) {
        const std::size_t idx = static_cast<std::size_t>(i) * f + j;
        out.at(idx) = tg.at(j) * (tx.at(idx) - (*mean)[j]) * (*rstd)[j] + tb.at(j);
      }
    }
    return emit(std::move(out), ng, [x, gamma, beta, n, f, rstd, mean](Tape& t, ValueId self) {
      const Tensor& g = t.grads_[self];
      const Tensor& tx = t.nodes_[x].value;
      const Tensor& tg = t.nodes_[gamma].value;
      if (t.nodes_[x].needs_grad) {
        Tensor& gx = t.grad_buffer(x);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < f; ++j) {
            const std::size_t idx = static_cast<std::size_t>(i) * f + j;
            gx.at(idx) += g.at(idx) * tg.at(j) * (*rstd)[j];
          }
      }
      if (t.nodes_[gamma].needs_grad) {
        Tensor& gg = t.grad_buffer(gamma);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < f; ++j) {
            const std::size_t idx = static_cast<std::size_t>(i) * f + j;
            gg.at(j) += g.at(idx) * (tx.at(idx) - (*mean)[j]) * (*rstd)[j];
          }
      }
      if (t.nodes_[beta].needs_grad) {
        Tensor& gb = t.grad_buffer(beta);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < f; ++j) gb.at(j) += g.at(static_cast<std::size_t>(i) * f + j);
      }
    });
  }

  // Training mode: batch statistics, biased variance (matching the running
  // accumulators used at inference).
  auto xhat = std::make_shared<Tensor>(std::vector<int>{n, f});
  auto rstd = std::make_shared<std::vector<float>>(static_cast<std::size_t>(f));
  for (int j = 0; j < f; ++j) {
    float mu = 0.0f;
    for (int i = 0; i < n; ++i) mu += tx.at(static_cast<std::size_t>(i) * f + j);
    mu /= static_cast<float>(n);
    float var = 0.0f;
    for (int i = 0; i < n; ++i) {
      const float dv = tx.at(static_cast<std::size_t>(i) * f + j) - mu;
      var += dv * dv;
    }
    var /= static_cast<float>(n);
    const float rs = 1.0f / std::sqrt(var + opt.epsilon);
    (*rstd)[j] = rs;
    for (int i = 0; i < n; ++i) {
      const std::size_t idx = static_cast<std::size_t>(i) * f + j;
      xhat->at(idx) = (tx.at(idx) - mu) * rs;
      out.at(idx) = tg.at(j) * xhat->at(idx) + tb.at(j);
    }
    running_mean.at(j) = opt.momentum * running_mean.at(j) + (1.0f - opt.momentum) * mu;
    running_var.at(j) = opt.momentum * running_var.at(j) + (1.0f - opt.momentum) * var;
  }

  return emit(std::move(out), ng, [x, gamma, beta, n, f, xhat, rstd](Tape& t, ValueId self) {
    const Tensor& g = t.grads_[self];
    const Tensor& tg = t.nodes_[gamma].value;
    if (t.nodes_[gamma].needs_grad) {
      Tensor& gg = t.grad_buffer(gamma);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < f; ++j) {
          const std::size_t idx = static_cast<std::size_t>(i) * f + j;
          gg.at(j) += g.at(idx) * xhat->at(idx);
        }
    }
    if (t.nodes_[beta].needs_grad) {
      Tensor& gb = t.grad_buffer(beta);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < f; ++j) gb.at(j) += g.at(static_cast<std::size_t>(i) * f + j);
    }
    if (t.nodes_[x].needs_grad) {
      Tensor& gx = t.grad_buffer(x);
      const float inv_n = 1.0f / static_cast<float>(n);
      for (int j = 0; j < f; ++j) {
        float sum_g = 0.0f, sum_gx = 0.0f;
        for (int i = 0; i < n; ++i) {
          const std::size_t idx = static_cast<std::size_t>(i) * f + j;
          sum_g += g.at(idx);
          sum_gx += g.at(idx) * xhat->at(idx);
        }
        const float scale = tg.at(j) * (*rstd)[j];
        for (int i = 0; i < n; ++i) {
          const std::size_t idx = static_cast<std::size_t>(i) * f + j;
          gx.at(idx) += scale * (g.at(idx) - inv_n * sum_g - xhat->at(idx) * inv_n * sum_gx);
        }
      }
    }
  });
}

ValueId Tape::flatten(ValueId x, bool keep_batch) {
  const Tensor& tx = value(x);
  std::vector<int> out_shape;
  if (keep_batch) {
    if (tx.rank() < 2) {
      raise(ErrorCode::kDimension, "flatten: keep_batch requires rank >= 2, got " + tx.shape_str());
    }
    int rest = 1;
    for (int i = 1; i < tx.rank(); ++i) rest *= tx.dim(i);
    out_shape = {tx.dim(0), rest};
  } else {
    out_shape = {static_cast<int>(tx.size())};
  }
  Tensor out(std::move(out_shape), std::vector<float>(tx.values().begin(), tx.values().end()));
  return emit(std::move(out), requires_grad(x), [x](Tape& t, ValueId self) {
    if (!t.nodes_[x].needs_grad) return;
    const Tensor& g = t.grads_[self];
    Tensor& gx = t.grad_buffer(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx.at(i) += g.at(i);
  });
}

ValueId Tape::reshape(ValueId x, std::vector<int> shape) {
  const Tensor& tx = value(x);
  if (shape_product(shape) != tx.size()) {
    raise(ErrorCode::kDimension, "reshape: cannot view " + tx.shape_str() + " as " +
                                     shape_to_string(shape));
  }
  Tensor out(std::move(shape), std::vector<float>(tx.values().begin(), tx.values().end()));
  return emit(std::move(out), requires_grad(x), [x](Tape& t, ValueId self) {
    if (!t.nodes_[x].needs_grad) return;
    const Tensor& g = t.grads_[self];
    Tensor& gx = t.grad_buffer(x);
    for (std::size_t i = 0; i < g.size(); ++i) gx.at(i) += g.at(i);
  });
}

ValueId Tape::sum_all(ValueId a) {
  const Tensor& ta = value(a);
  float acc = 0.0f;
  for (std::size_t i = 0; i < ta.size(); ++i) acc += ta.at(i);
  return emit(Tensor::scalar(acc), requires_grad(a), [a](Tape& t, ValueId self) {
    if (!t.nodes_[a].needs_grad) return;
    const float g = t.grads_[self].at(0);
    Tensor& ga = t.grad_buffer(a);
    for (std::size_t i = 0; i < ga.size(); ++i) ga.at(i) += g;
  });
}

ValueId Tape::mean_all(ValueId a) {
  const Tensor& ta = value(a);
  float acc = 0.0f;
  for (std::size_t i = 0; i < ta.size(); ++i) acc += ta.at(i);
  const float inv = 1.0f / static_cast<float>(ta.size());
  return emit(Tensor::scalar(acc * inv), requires_grad(a), [a, inv](Tape& t, ValueId self) {
    if (!t.nodes_[a].needs_grad) return;
    const float g = t.grads_[self].at(0) * inv;
    Tensor& ga = t.grad_buffer(a);
    for (std::size_t i = 0; i < ga.size(); ++i) ga.at(i) += g;
  });
}

ValueId Tape::pick(ValueId a, std::size_t flat_index) {
  const Tensor& ta = value(a);
  if (flat_index >= ta.size()) {
    raise(ErrorCode::kDimension, "pick: flat index " + std::to_string(flat_index) +
                                     " out of range for " + ta.shape_str());
  }
  return emit(Tensor::scalar(ta.at(flat_index)), requires_grad(a),
              [a, flat_index](Tape& t, ValueId self) {
                if (!t.nodes_[a].needs_grad) return;
                t.grad_buffer(a).at(flat_index) += t.grads_[self].at(0);
              });
}

ValueId Tape::softmax_cross_entropy(ValueId logits, std::span<const int> labels) {
  const Tensor& tz = value(logits);
  int n = 0, k = 0;
  if (tz.rank() == 1) {
    n = 1;
    k = tz.dim(0);
  } else if (tz.rank() == 2) {
    n = tz.dim(0);
    k = tz.dim(1);
  } else {
    raise(ErrorCode::kDimension, "softmax_cross_entropy: logits must be [K] or [N,K]");
  }
  if (static_cast<std::size_t>(n) != labels.size()) {
    raise(ErrorCode::kDimension, "softmax_cross_entropy: " + std::to_string(labels.size()) +
                                     " labels for " + std::to_string(n) + " rows");
  }
  auto probs = std::make_shared<Tensor>(std::vector<int>{n, k});
  auto label_copy = std::make_shared<std::vector<int>>(labels.begin(), labels.end());
  double loss = 0.0;
  for (int i = 0; i < n; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= k) {
      raise(ErrorCode::kContract, "softmax_cross_entropy: label " + std::to_string(y) +
                                      " out of range for " + std::to_string(k) + " classes");
    }
    const std::size_t base = static_cast<std::size_t>(i) * k;
    float mx = tz.at(base);
    for (int j = 1; j < k; ++j) mx = std::max(mx, tz.at(base + j));
    float denom = 0.0f;
    for (int j = 0; j < k; ++j) denom += std::exp(tz.at(base + j) - mx);
    const float lse = mx + std::log(denom);
    for (int j = 0; j < k; ++j) probs->at(base + j) = std::exp(tz.at(base + j) - lse);
    loss += static_cast<double>(lse - tz.at(base + y));
  }
  const float mean_loss = static_cast<float>(loss / n);
  return emit(Tensor::scalar(mean_loss), requires_grad(logits),
              [logits, probs, label_copy, n, k](Tape& t, ValueId self) {
                if (!t.nodes_[logits].needs_grad) return;
                const float g = t.grads_[self].at(0) / static_cast<float>(n);
                Tensor& gz = t.grad_buffer(logits);
                for (int i = 0; i < n; ++i) {
                  const std::size_t base = static_cast<std::size_t>(i) * k;
                  const int y = (*label_copy)[static_cast<std::size_t>(i)];
                  for (int j = 0; j < k; ++j) {
                    const float onehot = (j == y) ? 1.0f : 0.0f;
                    gz.at(base + j) += g * (probs->at(base + j) - onehot);
                  }
                }
              });
}

ValueId Tape::mse(ValueId pred, Tensor targets) {
  const Tensor& tp = value(pred);
  if (tp.size() != targets.size()) {
    raise(ErrorCode::kDimension, "mse: prediction count " + std::to_string(tp.size()) +
                                     " does not match target count " +
                                     std::to_string(targets.size()));
  }
  auto tgt = std::make_shared<Tensor>(std::move(targets));
  double loss = 0.0;
  for (std::size_t i = 0; i < tp.size(); ++i) {
    const double d = static_cast<double>(tp.at(i)) - tgt->at(i);
    loss += d * d;
  }
  const float mean_loss = static_cast<float>(loss / static_cast<double>(tp.size()));
  return emit(Tensor::scalar(mean_loss), requires_grad(pred),
              [pred, tgt](Tape& t, ValueId self) {
                if (!t.nodes_[pred].needs_grad) return;
                const Tensor& tp = t.nodes_[pred].value;
                const float g = t.grads_[self].at(0) * 2.0f / static_cast<float>(tp.size());
                Tensor& gp = t.grad_buffer(pred);
                for (std::size_t i = 0; i < tp.size(); ++i) {
                  gp.at(i) += g * (tp.at(i) - tgt->at(i));
                }
              });
}

std::vector<Tensor> Tape::gradients(ValueId loss, std::span<const ValueId> wrt) {
  check_id(loss);
  if (value(loss).size() != 1) {
    raise(ErrorCode::kContract,
          "gradients: loss must be scalar, got " + value(loss).shape_str());
  }
  grads_.assign(nodes_.size(), Tensor());
  grad_buffer(loss).at(0) = 1.0f;
  for (ValueId id = loss; id >= 0; --id) {
    const Node& nd = nodes_[static_cast<std::size_t>(id)];
    if (!nd.backward || !nd.needs_grad) continue;
    if (!grad_seeded(id)) continue;
    nd.backward(*this, id);
  }
  std::vector<Tensor> out;
  out.reserve(wrt.size());
  for (ValueId id : wrt) {
    check_id(id);
    if (grad_seeded(id)) out.push_back(grads_[static_cast<std::size_t>(id)]);
    else out.push_back(Tensor::zeros(nodes_[static_cast<std::size_t>(id)].value.shape()));
  }
  grads_.clear();
  return out;
}

}  // namespace introspect
