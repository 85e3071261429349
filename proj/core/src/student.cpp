#include "dmt/student.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

#include "dmt/dataset_io.hpp"
#include "dmt/errors.hpp"
#include "dmt/rng.hpp"

namespace dmt {

namespace {

// Offsets into the flat weight vector.
struct Layout {
  std::size_t d = 0;  // input dim
  std::size_t c = 0;  // classes
  std::size_t h = 0;  // hidden width, 0 for softmax regression
  std::size_t w1 = 0, b1 = 0, w2 = 0, b2 = 0;

  explicit Layout(const ModelParams& theta)
      : Layout(theta.spec, theta.input_dim, theta.output_dim) {}
  Layout(const ModelSpec& spec, std::size_t input_dim, std::size_t output_dim)
      : d(input_dim), c(output_dim) {
    if (spec.architecture == Architecture::SoftmaxRegression) {
      w2 = 0;
      b2 = c * d;
    } else {
      h = spec.hidden;
      w1 = 0;
      b1 = h * d;
      w2 = b1 + h;
      b2 = w2 + c * h;
    }
  }
  bool mlp() const { return h > 0; }
  std::size_t total() const { return b2 + c; }
};

double activate(Activation act, double a) { return act == Activation::Tanh ? std::tanh(a) : std::max(0.0, a); }

double activate_d1(Activation act, double a, double h) {
  if (act == Activation::Tanh) return 1.0 - h * h;
  return a > 0.0 ? 1.0 : 0.0;
}

double activate_d2(Activation act, double h) {
  return act == Activation::Tanh ? -2.0 * h * (1.0 - h * h) : 0.0;
}

void softmax_inplace(std::vector<double>& z) {
  const double mx = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double& v : z) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

double log_softmax_at(const std::vector<double>& z, int y) {
  const double mx = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - mx);
  return z[static_cast<std::size_t>(y)] - mx - std::log(sum);
}

struct Forward {
  std::vector<double> a;  // hidden pre-activation
  std::vector<double> h;  // hidden activation
  std::vector<double> z;  // logits
  std::vector<double> p;  // probabilities
};

Forward forward(const ModelParams& theta, const Layout& L, std::span<const double> x) {
  const std::vector<double>& w = theta.weights;
  Forward f;
  std::span<const double> top_in = x;
  std::size_t top_dim = L.d;
  if (L.mlp()) {
    f.a.assign(w.begin() + static_cast<long>(L.b1), w.begin() + static_cast<long>(L.b1 + L.h));
    for (std::size_t j = 0; j < L.h; ++j) {
      const double* row = &w[L.w1 + j * L.d];
      double acc = 0.0;
      for (std::size_t i = 0; i < L.d; ++i) {
        if (x[i] != 0.0) acc += row[i] * x[i];
      }
      f.a[j] += acc;
    }
    f.h.resize(L.h);
    for (std::size_t j = 0; j < L.h; ++j) f.h[j] = activate(theta.spec.activation, f.a[j]);
    top_in = f.h;
    top_dim = L.h;
  }
  f.z.assign(w.begin() + static_cast<long>(L.b2), w.begin() + static_cast<long>(L.b2 + L.c));
  for (std::size_t c = 0; c < L.c; ++c) {
    const double* row = &w[L.w2 + c * top_dim];
    double acc = 0.0;
    for (std::size_t i = 0; i < top_dim; ++i) {
      if (top_in[i] != 0.0) acc += row[i] * top_in[i];
    }
    f.z[c] += acc;
  }
  f.p = f.z;
  softmax_inplace(f.p);
  return f;
}

void check_input(const ModelParams& theta, std::span<const double> x) {
  if (x.size() != theta.input_dim) {
    throw ShapeError("input has " + std::to_string(x.size()) + " entries, model expects " +
                     std::to_string(theta.input_dim));
  }
}

void check_label(const ModelParams& theta, int y) {
  if (y < 0 || static_cast<std::size_t>(y) >= theta.output_dim) {
    throw LabelError("label " + std::to_string(y) + " outside [0, " +
                     std::to_string(theta.output_dim) + ")");
  }
}

std::vector<double> delta(const Forward& f, int y) {
  std::vector<double> d = f.p;
  d[static_cast<std::size_t>(y)] -= 1.0;
  return d;
}

/// W^T v for a row-major [rows x cols] block starting at `offset`.
std::vector<double> transpose_times(const std::vector<double>& w, std::size_t offset,
                                    std::size_t rows, std::size_t cols,
                                    std::span<const double> v) {
  std::vector<double> out(cols, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    if (v[r] == 0.0) continue;
    const double* row = &w[offset + r * cols];
    for (std::size_t i = 0; i < cols; ++i) out[i] += row[i] * v[r];
  }
  return out;
}

/// W v for a row-major [rows x cols] block starting at `offset`.
std::vector<double> times(const std::vector<double>& w, std::size_t offset, std::size_t rows,
                          std::size_t cols, std::span<const double> v) {
  std::vector<double> out(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = &w[offset + r * cols];
    double acc = 0.0;
    for (std::size_t i = 0; i < cols; ++i) acc += row[i] * v[i];
    out[r] = acc;
  }
  return out;
}

// Sparse-input forward/backward for training on binary data.
class SparseTrainer {
 public:
  SparseTrainer(ModelParams& theta) : theta_(theta), L_(theta) {
    a_.resize(L_.h);
    h_.resize(L_.h);
    z_.resize(L_.c);
    ga_.resize(L_.h);
  }

  /// Writes logits into z_ and returns log p_y.
  double forward(const std::vector<std::uint32_t>& active, int y) {
    const std::vector<double>& w = theta_.weights;
    if (L_.mlp()) {
      for (std::size_t j = 0; j < L_.h; ++j) {
        double acc = w[L_.b1 + j];
        const double* row = &w[L_.w1 + j * L_.d];
        for (std::uint32_t i : active) acc += row[i];
        a_[j] = acc;
        h_[j] = activate(theta_.spec.activation, acc);
      }
      for (std::size_t c = 0; c < L_.c; ++c) {
        double acc = w[L_.b2 + c];
        const double* row = &w[L_.w2 + c * L_.h];
        for (std::size_t j = 0; j < L_.h; ++j) acc += row[j] * h_[j];
        z_[c] = acc;
      }
    } else {
      for (std::size_t c = 0; c < L_.c; ++c) {
        double acc = w[L_.b2 + c];
        const double* row = &w[L_.w2 + c * L_.d];
        for (std::uint32_t i : active) acc += row[i];
        z_[c] = acc;
      }
    }
    return y >= 0 ? log_softmax_at(z_, y) : 0.0;
  }

  /// Adds d loss / d theta for the last forward() input into `grad`.
  void accumulate(const std::vector<std::uint32_t>& active, int y, std::vector<double>& grad) {
    std::vector<double>& p = z_;
    softmax_inplace(p);
    p[static_cast<std::size_t>(y)] -= 1.0;  // p now holds delta
    if (L_.mlp()) {
      const std::vector<double>& w = theta_.weights;
      std::fill(ga_.begin(), ga_.end(), 0.0);
      for (std::size_t c = 0; c < L_.c; ++c) {
        const double dc = p[c];
        grad[L_.b2 + c] += dc;
        double* grow = &grad[L_.w2 + c * L_.h];
        const double* wrow = &w[L_.w2 + c * L_.h];
        for (std::size_t j = 0; j < L_.h; ++j) {
          grow[j] += dc * h_[j];
          ga_[j] += wrow[j] * dc;
        }
      }
      for (std::size_t j = 0; j < L_.h; ++j) {
        const double g = ga_[j] * activate_d1(theta_.spec.activation, a_[j], h_[j]);
        grad[L_.b1 + j] += g;
        double* grow = &grad[L_.w1 + j * L_.d];
        for (std::uint32_t i : active) grow[i] += g;
      }
    } else {
      for (std::size_t c = 0; c < L_.c; ++c) {
        const double dc = p[c];
        grad[L_.b2 + c] += dc;
        double* grow = &grad[L_.w2 + c * L_.d];
        for (std::uint32_t i : active) grow[i] += dc;
      }
    }
  }

  const std::vector<double>& logits() const { return z_; }

 private:
  ModelParams& theta_;
  Layout L_;
  std::vector<double> a_, h_, z_, ga_;
};

std::vector<std::uint32_t> active_indices(const Instance& x) {
  std::vector<std::uint32_t> out;
  auto bits = x.bits();
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) out.push_back(static_cast<std::uint32_t>(i));
  }
  return out;
}

double l2_term(const std::vector<double>& w, double l2) {
  double s = 0.0;
  for (double v : w) s += v * v;
  return 0.5 * l2 * s;
}

}  // namespace

std::size_t ModelParams::parameter_count(const ModelSpec& spec, std::size_t input_dim,
                                         std::size_t output_dim) {
  return Layout(spec, input_dim, output_dim).total();
}

ModelParams ModelParams::zeros(const ModelSpec& spec, std::size_t input_dim,
                               std::size_t output_dim) {
  ModelParams theta{spec, input_dim, output_dim, {}};
  theta.weights.assign(parameter_count(spec, input_dim, output_dim), 0.0);
  return theta;
}

void ModelParams::validate() const {
  if (spec.architecture == Architecture::Mlp1h && spec.hidden < 1) {
    throw ConfigError("Mlp1h needs a hidden width >= 1");
  }
  if (input_dim < 1 || output_dim < 2) throw ConfigError("model dimensions out of range");
  if (weights.size() != parameter_count(spec, input_dim, output_dim)) {
    throw ConfigError("weight vector has " + std::to_string(weights.size()) +
                      " entries, architecture needs " +
                      std::to_string(parameter_count(spec, input_dim, output_dim)));
  }
  for (double w : weights) {
    if (!std::isfinite(w)) throw ConfigError("non-finite model weight");
  }
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("train: epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("train: learning_rate must be positive");
  }
  if (!(l2_penalty >= 0.0)) throw ConfigError("train: l2_penalty must be non-negative");
  if (!(init_scale > 0.0)) throw ConfigError("train: init_scale must be positive");
  if (model.architecture == Architecture::Mlp1h && model.hidden < 1) {
    throw ConfigError("train: hidden width must be >= 1");
  }
}

std::vector<double> LogitTrace::mean_logits(std::size_t target) const {
  const auto& epochs = logits.at(target);
  if (epochs.empty()) throw ConfigError("empty logit trace");
  std::vector<double> mean(epochs.front().size(), 0.0);
  for (const auto& z : epochs) {
    for (std::size_t c = 0; c < z.size(); ++c) mean[c] += z[c];
  }
  for (double& v : mean) v /= static_cast<double>(epochs.size());
  return mean;
}

TrainResult train(const Dataset& d, const TrainConfig& cfg, const TargetSpec* monitored,
                  const ModelParams* init) {
  cfg.validate();
  if (d.empty()) throw TrainingError("cannot train on an empty dataset");
  const DatasetSchema& schema = d.schema();
  const std::size_t input_dim = schema.input_dim();
  const std::size_t classes = schema.num_classes;

  TrainResult result;
  ModelParams& theta = result.params;
  if (cfg.warm_start) {
    if (init == nullptr) throw TrainingError("warm start requested without initial parameters");
    theta = *init;
    theta.validate();
    if (theta.input_dim != input_dim || theta.output_dim != classes || !(theta.spec == cfg.model)) {
      throw ShapeError("warm-start parameters do not match the dataset/model spec");
    }
  } else {
    theta = ModelParams::zeros(cfg.model, input_dim, classes);
    Layout L(theta);
    Rng init_rng(cfg.init_seed);
    // Weight matrices get uniform noise; biases start at zero.
    auto fill = [&](std::size_t from, std::size_t to) {
      for (std::size_t i = from; i < to; ++i) {
        theta.weights[i] = init_rng.uniform(-cfg.init_scale, cfg.init_scale);
      }
    };
    if (L.mlp()) fill(L.w1, L.b1);
    fill(L.w2, L.b2);
  }

  std::vector<std::vector<std::uint32_t>> active;
  std::vector<int> labels;
  active.reserve(d.size());
  for (const LabeledInstance& item : d.items()) {
    if (item.instance.size() != input_dim) throw ShapeError("dataset item shape mismatch");
    if (item.label < 0 || static_cast<std::size_t>(item.label) >= classes) {
      throw LabelError("dataset label outside [0, C)");
    }
    active.push_back(active_indices(item.instance));
    labels.push_back(item.label);
  }
  std::vector<std::vector<std::uint32_t>> monitored_active;
  if (monitored != nullptr) {
    for (const Target& t : monitored->targets) {
      if (t.instance.size() != input_dim) throw ShapeError("monitored target shape mismatch");
      monitored_active.push_back(active_indices(t.instance));
    }
  }
  result.trace.logits.assign(monitored_active.size(), {});

  SparseTrainer trainer(theta);
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), 0);
  Rng shuffle_rng(cfg.shuffle_seed);
  std::vector<double> grad(theta.size(), 0.0);
  const std::size_t trace_from = cfg.epochs - std::min(cfg.epochs, kTraceEpochs);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(std::span(order));
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t i = order[k];
        trainer.forward(active[i], labels[i]);
        trainer.accumulate(active[i], labels[i], grad);
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      for (std::size_t p = 0; p < grad.size(); ++p) {
        theta.weights[p] -= cfg.learning_rate * (grad[p] * inv + cfg.l2_penalty * theta.weights[p]);
      }
    }

    double nll = 0.0;
    for (std::size_t i = 0; i < active.size(); ++i) nll -= trainer.forward(active[i], labels[i]);
    const double objective = nll / static_cast<double>(active.size()) +
                             l2_term(theta.weights, cfg.l2_penalty);
    if (!std::isfinite(objective)) {
      throw DivergenceError("training objective became non-finite", static_cast<long>(epoch));
    }
    result.epoch_objective.push_back(objective);

    if (epoch >= trace_from) {
      for (std::size_t t = 0; t < monitored_active.size(); ++t) {
        trainer.forward(monitored_active[t], -1);
        result.trace.logits[t].push_back(trainer.logits());
      }
    }
  }
  return result;
}

std::vector<double> logits(const ModelParams& theta, std::span<const double> x) {
  check_input(theta, x);
  return forward(theta, Layout(theta), x).z;
}

std::vector<double> predict_probs(const ModelParams& theta, std::span<const double> x) {
  check_input(theta, x);
  return forward(theta, Layout(theta), x).p;
}

std::vector<double> predict_probs(const ModelParams& theta, const Instance& x) {
  const std::vector<double> v = x.to_real();
  return predict_probs(theta, v);
}

int predict(const ModelParams& theta, const Instance& x) {
  const std::vector<double> v = x.to_real();
  return argmax(logits(theta, v));
}

double loss(const ModelParams& theta, std::span<const double> x, int y) {
  check_input(theta, x);
  check_label(theta, y);
  return -log_softmax_at(forward(theta, Layout(theta), x).z, y);
}

double loss(const ModelParams& theta, const Instance& x, int y) {
  const std::vector<double> v = x.to_real();
  return loss(theta, v, y);
}

std::vector<double> grad_theta(const ModelParams& theta, std::span<const double> x, int y) {
  check_input(theta, x);
  check_label(theta, y);
  const Layout L(theta);
  const Forward f = forward(theta, L, x);
  const std::vector<double> dz = delta(f, y);
  std::vector<double> g(theta.size(), 0.0);
  const std::span<const double> top_in = L.mlp() ? std::span<const double>(f.h) : x;
  const std::size_t top_dim = L.mlp() ? L.h : L.d;
  for (std::size_t c = 0; c < L.c; ++c) {
    g[L.b2 + c] = dz[c];
    for (std::size_t i = 0; i < top_dim; ++i) g[L.w2 + c * top_dim + i] = dz[c] * top_in[i];
  }
  if (L.mlp()) {
    const std::vector<double> gh = transpose_times(theta.weights, L.w2, L.c, L.h, dz);
    for (std::size_t j = 0; j < L.h; ++j) {
      const double ga = gh[j] * activate_d1(theta.spec.activation, f.a[j], f.h[j]);
      g[L.b1 + j] = ga;
      for (std::size_t i = 0; i < L.d; ++i) g[L.w1 + j * L.d + i] = ga * x[i];
    }
  }
  return g;
}

std::vector<double> grad_theta(const ModelParams& theta, const Instance& x, int y) {
  const std::vector<double> v = x.to_real();
  return grad_theta(theta, v, y);
}

std::vector<double> grad_input(const ModelParams& theta, std::span<const double> x, int y) {
  check_input(theta, x);
  check_label(theta, y);
  const Layout L(theta);
  const Forward f = forward(theta, L, x);
  const std::vector<double> dz = delta(f, y);
  if (!L.mlp()) return transpose_times(theta.weights, L.w2, L.c, L.d, dz);
  std::vector<double> ga = transpose_times(theta.weights, L.w2, L.c, L.h, dz);
  for (std::size_t j = 0; j < L.h; ++j) {
    ga[j] *= activate_d1(theta.spec.activation, f.a[j], f.h[j]);
  }
  return transpose_times(theta.weights, L.w1, L.h, L.d, ga);
}

std::vector<double> grad_input(const ModelParams& theta, const Instance& x, int y) {
  const std::vector<double> v = x.to_real();
  return grad_input(theta, v, y);
}

std::vector<double> grad_input_logit(const ModelParams& theta, std::span<const double> x, int c) {
  check_input(theta, x);
  check_label(theta, c);
  const Layout L(theta);
  std::vector<double> unit(L.c, 0.0);
  unit[static_cast<std::size_t>(c)] = 1.0;
  if (!L.mlp()) return transpose_times(theta.weights, L.w2, L.c, L.d, unit);
  const Forward f = forward(theta, L, x);
  std::vector<double> ga = transpose_times(theta.weights, L.w2, L.c, L.h, unit);
  for (std::size_t j = 0; j < L.h; ++j) {
    ga[j] *= activate_d1(theta.spec.activation, f.a[j], f.h[j]);
  }
  return transpose_times(theta.weights, L.w1, L.h, L.d, ga);
}

std::vector<double> embedding(const ModelParams& theta, std::span<const double> x) {
  check_input(theta, x);
  const Layout L(theta);
  Forward f = forward(theta, L, x);
  return L.mlp() ? f.h : f.z;
}

std::vector<double> embedding_vjp(const ModelParams& theta, std::span<const double> x,
                                  std::span<const double> v) {
  check_input(theta, x);
  const Layout L(theta);
  if (!L.mlp()) {
    if (v.size() != L.c) throw ShapeError("embedding_vjp: vector has the wrong length");
    return transpose_times(theta.weights, L.w2, L.c, L.d, v);
  }
  if (v.size() != L.h) throw ShapeError("embedding_vjp: vector has the wrong length");
  const Forward f = forward(theta, L, x);
  std::vector<double> s(L.h);
  for (std::size_t j = 0; j < L.h; ++j) {
    s[j] = v[j] * activate_d1(theta.spec.activation, f.a[j], f.h[j]);
  }
  return transpose_times(theta.weights, L.w1, L.h, L.d, s);
}

std::vector<double> grad_input_of_grad_dot(const ModelParams& theta, std::span<const double> x,
                                           int y, std::span<const double> u) {
  check_input(theta, x);
  check_label(theta, y);
  if (u.size() != theta.size()) throw ShapeError("direction has the wrong length");
  const Layout L(theta);
  const Forward f = forward(theta, L, x);
  const std::vector<double> dz = delta(f, y);
  const std::vector<double>& w = theta.weights;
  // S(x) = <dz, v2 + ...> with v2 = U2 * top_in + ub2; the derivative
  // collects the softmax Jacobian path and the explicit input dependence.
  std::vector<double> u_vec(u.begin(), u.end());
  auto jp_times = [&](const std::vector<double>& v) {
    double pv = 0.0;
    for (std::size_t c = 0; c < L.c; ++c) pv += f.p[c] * v[c];
    std::vector<double> out(L.c);
    for (std::size_t c = 0; c < L.c; ++c) out[c] = f.p[c] * (v[c] - pv);
    return out;
  };

  if (!L.mlp()) {
    std::vector<double> wv = times(u_vec, L.w2, L.c, L.d, x);
    for (std::size_t c = 0; c < L.c; ++c) wv[c] += u[L.b2 + c];
    std::vector<double> out = transpose_times(w, L.w2, L.c, L.d, jp_times(wv));
    const std::vector<double> ut = transpose_times(u_vec, L.w2, L.c, L.d, dz);
    for (std::size_t i = 0; i < L.d; ++i) out[i] += ut[i];
    return out;
  }

  const Activation act = theta.spec.activation;
  std::vector<double> s(L.h), s2(L.h);
  for (std::size_t j = 0; j < L.h; ++j) {
    s[j] = activate_d1(act, f.a[j], f.h[j]);
    s2[j] = activate_d2(act, f.h[j]);
  }
  std::vector<double> v1 = times(u_vec, L.w1, L.h, L.d, x);
  for (std::size_t j = 0; j < L.h; ++j) v1[j] += u[L.b1 + j];
  std::vector<double> v2 = times(u_vec, L.w2, L.c, L.h, f.h);
  for (std::size_t c = 0; c < L.c; ++c) v2[c] += u[L.b2 + c];
  std::vector<double> sv1(L.h);
  for (std::size_t j = 0; j < L.h; ++j) sv1[j] = s[j] * v1[j];
  std::vector<double> wvec = times(w, L.w2, L.c, L.h, sv1);
  for (std::size_t c = 0; c < L.c; ++c) wvec[c] += v2[c];

  const std::vector<double> t1 = transpose_times(w, L.w2, L.c, L.h, jp_times(wvec));
  const std::vector<double> t2 = transpose_times(u_vec, L.w2, L.c, L.h, dz);
  const std::vector<double> gh = transpose_times(w, L.w2, L.c, L.h, dz);
  std::vector<double> inner(L.h), sgh(L.h);
  for (std::size_t j = 0; j < L.h; ++j) {
    inner[j] = s[j] * (t1[j] + t2[j]) + s2[j] * v1[j] * gh[j];
    sgh[j] = s[j] * gh[j];
  }
  std::vector<double> out = transpose_times(w, L.w1, L.h, L.d, inner);
  const std::vector<double> ut = transpose_times(u_vec, L.w1, L.h, L.d, sgh);
  for (std::size_t i = 0; i < L.d; ++i) out[i] += ut[i];
  return out;
}

double accuracy(const ModelParams& theta, const Dataset& d) {
  if (d.empty()) return 0.0;
  std::size_t correct = 0;
  for (const LabeledInstance& item : d.items()) {
    correct += predict(theta, item.instance) == item.label ? 1 : 0;
  }
  return static_cast<double>(correct) / static_cast<double>(d.size());
}

int argmax(std::span<const double> values) {
  int best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

int last5_prediction(const LogitTrace& trace, std::size_t target) {
  return argmax(trace.mean_logits(target));
}

bool last5_logit_decision(const LogitTrace& trace, int target_label, std::size_t target) {
  return last5_prediction(trace, target) == target_label;
}

std::string model_to_json(const ModelParams& theta) {
  nlohmann::json doc{{"architecture", to_string(theta.spec.architecture)},
                     {"input_dim", theta.input_dim},
                     {"output_dim", theta.output_dim},
                     {"weights", theta.weights}};
  if (theta.spec.architecture == Architecture::Mlp1h) {
    doc["hidden"] = theta.spec.hidden;
    doc["activation"] = to_string(theta.spec.activation);
  }
  return doc.dump() + "\n";
}

ModelParams model_from_json(const std::string& text) {
  ModelParams theta;
  try {
    const nlohmann::json doc = nlohmann::json::parse(text);
    theta.spec.architecture = parse_architecture(doc.at("architecture").get<std::string>());
    if (theta.spec.architecture == Architecture::Mlp1h) {
      theta.spec.hidden = doc.at("hidden").get<std::size_t>();
      theta.spec.activation = parse_activation(doc.at("activation").get<std::string>());
    }
    theta.input_dim = doc.at("input_dim").get<std::size_t>();
    theta.output_dim = doc.at("output_dim").get<std::size_t>();
    theta.weights = doc.at("weights").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad model checkpoint: ") + e.what());
  }
  try {
    theta.validate();
  } catch (const ConfigError& e) {
    throw ParseError(std::string("bad model checkpoint: ") + e.what());
  }
  return theta;
}

void save_model(const ModelParams& theta, const std::filesystem::path& path) {
  write_text_file(path, model_to_json(theta));
}

ModelParams load_model(const std::filesystem::path& path) {
  return model_from_json(read_text_file(path));
}

const char* to_string(Architecture a) {
  return a == Architecture::SoftmaxRegression ? "softmax_regression" : "mlp1h";
}

const char* to_string(Activation a) { return a == Activation::Tanh ? "tanh" : "relu"; }

Architecture parse_architecture(const std::string& s) {
  if (s == "softmax_regression" || s == "softmax") return Architecture::SoftmaxRegression;
  if (s == "mlp1h" || s == "mlp") return Architecture::Mlp1h;
  throw ConfigError("unknown architecture '" + s + "'");
}

Activation parse_activation(const std::string& s) {
  if (s == "tanh") return Activation::Tanh;
  if (s == "relu") return Activation::Relu;
  throw ConfigError("unknown activation '" + s + "'");
}

}  // namespace dmt
