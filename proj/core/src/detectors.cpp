#include "introspect/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "introspect/error.hpp"
#include "introspect/math.hpp"

namespace introspect {

float softmax_baseline_score(std::span<const float> logits) {
  const std::vector<float> probs = softmax(logits);
  return *std::max_element(probs.begin(), probs.end());
}

TrustScoreIndex TrustScoreIndex::fit(const std::vector<std::vector<float>>& points,
                                     const std::vector<int>& labels,
                                     const TrustScoreConfig& config) {
  if (points.size() != labels.size()) {
    raise(ErrorCode::kContract, "trust fit: point and label counts differ");
  }
  if (points.empty()) raise(ErrorCode::kConfig, "trust fit: no points");
  if (config.k < 1) raise(ErrorCode::kConfig, "trust fit: k must be >= 1");
  if (config.alpha < 0.0f || config.alpha >= 1.0f) {
    raise(ErrorCode::kConfig, "trust fit: alpha must be in [0,1)");
  }

  const std::size_t dim = points[0].size();
  int num_classes = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != dim) raise(ErrorCode::kContract, "trust fit: ragged feature vectors");
    if (labels[i] < 0) raise(ErrorCode::kContract, "trust fit: negative class label");
    num_classes = std::max(num_classes, labels[i] + 1);
  }

  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(num_classes));
  for (std::size_t i = 0; i < points.size(); ++i) {
    members[static_cast<std::size_t>(labels[i])].push_back(i);
  }

  TrustScoreIndex index;
  index.dimension_ = dim;
  index.class_points_.resize(static_cast<std::size_t>(num_classes));

  for (int cls = 0; cls < num_classes; ++cls) {
    const auto& ids = members[static_cast<std::size_t>(cls)];
    const std::size_t n = ids.size();
    if (n < static_cast<std::size_t>(config.k)) {
      raise(ErrorCode::kConfig, "trust fit: class " + std::to_string(cls) + " has " +
                                    std::to_string(n) + " points, fewer than k=" +
                                    std::to_string(config.k));
    }

    // k-NN radius within the class, the query point counting as its own
    // nearest neighbor at distance zero.
    std::vector<float> radius(n, 0.0f);
    if (config.k > 1) {
      std::vector<float> dist2(n);
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
          double acc = 0.0;
          const float* pa = points[ids[a]].data();
          const float* pb = points[ids[b]].data();
          for (std::size_t t = 0; t < dim; ++t) {
            const double d = static_cast<double>(pa[t]) - pb[t];
            acc += d * d;
          }
          dist2[b] = static_cast<float>(acc);
        }
        std::nth_element(dist2.begin(), dist2.begin() + (config.k - 1), dist2.end());
        radius[a] = std::sqrt(dist2[static_cast<std::size_t>(config.k - 1)]);
      }
    }

    const std::size_t drop = static_cast<std::size_t>(
        std::floor(static_cast<double>(config.alpha) * static_cast<double>(n)));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    // Largest radius last; ties keep insertion order so filtering is
    // deterministic.
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return radius[a] < radius[b]; });

    auto& kept = index.class_points_[static_cast<std::size_t>(cls)];
    kept.reserve((n - drop) * dim);
    std::vector<std::size_t> kept_order(order.begin(), order.end() - static_cast<long>(drop));
    std::sort(kept_order.begin(), kept_order.end());  // preserve input order
    for (std::size_t o : kept_order) {
      const auto& p = points[ids[o]];
      kept.insert(kept.end(), p.begin(), p.end());
    }
    if (kept.empty()) {
      raise(ErrorCode::kConfig, "trust fit: filtering left class " + std::to_string(cls) + " empty");
    }
  }
  return index;
}

const std::vector<float>& TrustScoreIndex::class_points(int cls) const {
  if (cls < 0 || cls >= class_count()) {
    raise(ErrorCode::kContract, "trust: class " + std::to_string(cls) + " out of range");
  }
  return class_points_[static_cast<std::size_t>(cls)];
}

std::size_t TrustScoreIndex::class_size(int cls) const {
  return class_points(cls).size() / dimension_;
}

namespace {

// Squared distance from x to the nearest row; early-abandons a row once its
// partial sum exceeds the best so far.
double nearest_dist2(std::span<const float> x, const std::vector<float>& rows, std::size_t dim) {
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = rows.size() / dim;
  for (std::size_t i = 0; i < n; ++i) {
    const float* p = rows.data() + i * dim;
    double acc = 0.0;
    for (std::size_t t = 0; t < dim; ++t) {
      const double d = static_cast<double>(x[t]) - p[t];
      acc += d * d;
      if (acc >= best) break;
    }
    if (acc < best) best = acc;
  }
  return best;
}

}  // namespace

float TrustScoreIndex::score(std::span<const float> x, int predicted) const {
  if (x.size() != dimension_) {
    raise(ErrorCode::kDimension, "trust score: query has dimension " + std::to_string(x.size()) +
                                     ", index has " + std::to_string(dimension_));
  }
  if (predicted < 0 || predicted >= class_count() ||
      class_points_[static_cast<std::size_t>(predicted)].empty()) {
    raise(ErrorCode::kContract,
          "trust score: predicted class " + std::to_string(predicted) + " not in the index");
  }

  const double d2_pred = nearest_dist2(x, class_points_[static_cast<std::size_t>(predicted)],
                                       dimension_);
  double d2_other = std::numeric_limits<double>::infinity();
  for (int cls = 0; cls < class_count(); ++cls) {
    if (cls == predicted || class_points_[static_cast<std::size_t>(cls)].empty()) continue;
    d2_other = std::min(d2_other, nearest_dist2(x, class_points_[static_cast<std::size_t>(cls)],
                                                dimension_));
  }
  if (!std::isfinite(d2_other)) {
    raise(ErrorCode::kConfig, "trust score: no non-predicted class in the index");
  }

  const double d_pred = std::sqrt(d2_pred);
  const double d_other = std::sqrt(d2_other);
  if (d_pred == 0.0) return kSentinel;
  return static_cast<float>(d_other / d_pred);
}

ModelSpec introspection_net_spec(int num_classes) {
  if (num_classes < 2) raise(ErrorCode::kConfig, "introspection net: need >= 2 classes");
  ModelSpec spec;
  spec.input_shape = {num_classes};
  spec.layers = {
      LayerDesc::dense(128, Activation::kRelu),
      LayerDesc::dropout(0.20f),
      LayerDesc::dense(128, Activation::kRelu),
      LayerDesc::dropout(0.20f),
      LayerDesc::batchnorm(),
      LayerDesc::dense(1, Activation::kNone),
  };
  return spec;
}

namespace {

Tensor records_to_matrix(const std::vector<LogitRecord>& records, std::size_t k) {
  Tensor m({static_cast<int>(records.size()), static_cast<int>(k)});
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].logits.size() != k) {
      raise(ErrorCode::kDimension, "introspection: record " + std::to_string(i) +
                                       " has logit width " +
                                       std::to_string(records[i].logits.size()) + ", expected " +
                                       std::to_string(k));
    }
    std::copy(records[i].logits.begin(), records[i].logits.end(), m.data() + i * k);
  }
  return m;
}

float mse_on(Model& model, const Tensor& inputs, const std::vector<float>& targets) {
  Tape tape;
  ValueId in = tape.leaf(inputs, false);
  ForwardOptions opt;  // inference
  ValueId out = model.forward(tape, in, opt);
  const Tensor& ov = tape.value(out);
  double acc = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double d = static_cast<double>(ov.at(i)) - targets[i];
    acc += d * d;
  }
  return static_cast<float>(acc / static_cast<double>(targets.size()));
}

}  // namespace

IntrospectionTrainResult train_introspection(const std::vector<LogitRecord>& train_records,
                                             const std::vector<LogitRecord>& val_records,
                                             const IntrospectionConfig& config) {
  if (train_records.empty()) raise(ErrorCode::kConfig, "introspection: empty training set");
  if (config.epochs < 1 || config.batch_size < 1) {
    raise(ErrorCode::kConfig, "introspection: epochs and batch_size must be >= 1");
  }
  const std::size_t k = train_records[0].logits.size();

  const Tensor train_x = records_to_matrix(train_records, k);
  std::vector<float> train_y(train_records.size());
  for (std::size_t i = 0; i < train_records.size(); ++i) {
    train_y[i] = train_records[i].correct ? 1.0f : 0.0f;
  }
  Tensor val_x;
  std::vector<float> val_y;
  if (!val_records.empty()) {
    val_x = records_to_matrix(val_records, k);
    val_y.resize(val_records.size());
    for (std::size_t i = 0; i < val_records.size(); ++i) {
      val_y[i] = val_records[i].correct ? 1.0f : 0.0f;
    }
  }

  Model model(introspection_net_spec(static_cast<int>(k)));
  SeededRng init_rng = SeededRng(config.seed).derive("init");
  SeededRng shuffle_rng = SeededRng(config.seed).derive("shuffle");
  SeededRng dropout_rng = SeededRng(config.seed).derive("dropout");
  model.init_weights(init_rng);

  RmsPropState optimizer(config.optimizer);
  const auto param_names = model.trainable_param_names();

  IntrospectionTrainResult result{std::move(model), {}};
  Model& net = result.model;

  std::vector<std::size_t> order(train_records.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t count =
          std::min<std::size_t>(config.batch_size, order.size() - start);
      Tensor batch({static_cast<int>(count), static_cast<int>(k)});
      Tensor targets({static_cast<int>(count)});
      for (std::size_t i = 0; i < count; ++i) {
        const std::size_t src = order[start + i];
        std::copy(train_x.data() + src * k, train_x.data() + (src + 1) * k,
                  batch.data() + i * k);
        targets.at(i) = train_y[src];
      }

      Tape tape;
      ValueId in = tape.leaf(std::move(batch), false);
      ForwardOptions opt;
      opt.training = true;
      opt.params_require_grad = true;
      opt.dropout_rng = &dropout_rng;
      std::vector<ValueId> param_ids;
      ValueId out = net.forward(tape, in, opt, &param_ids);
      ValueId loss = tape.mse(out, std::move(targets));

      if (!std::isfinite(tape.value(loss).at(0))) {
        raise(ErrorCode::kTraining,
              "introspection: loss diverged at epoch " + std::to_string(epoch));
      }

      auto grads = tape.gradients(loss, param_ids);
      std::vector<Tensor*> params;
      params.reserve(param_names.size());
      for (const auto& name : param_names) params.push_back(&net.weights().at(name));
      optimizer.step(params, grads);
    }

    const float val_loss = val_records.empty() ? mse_on(net, train_x, train_y)
                                               : mse_on(net, val_x, val_y);
    result.val_loss_history.push_back(val_loss);
    if (config.verbose) {
      std::fprintf(stderr, "introspection epoch %d/%d  val mse %.5f\n", epoch + 1,
                   config.epochs, val_loss);
    }
  }
  return result;
}

float introspection_score(const Model& model, std::span<const float> logits) {
  Tensor row({1, static_cast<int>(logits.size())},
             std::vector<float>(logits.begin(), logits.end()));
  const Tensor out = predict_logits(model, row);
  return out.at(0);
}

std::vector<float> introspection_scores(const Model& model, const Tensor& logits_nk) {
  const Tensor out = predict_logits(model, logits_nk);
  std::vector<float> scores(static_cast<std::size_t>(out.dim(0)));
  for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = out.at(i);
  return scores;
}

}  // namespace introspect
