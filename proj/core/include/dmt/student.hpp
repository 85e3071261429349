#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dmt/data.hpp"

namespace dmt {

enum class Architecture { SoftmaxRegression, Mlp1h };
enum class Activation { Tanh, Relu };

struct ModelSpec {
  Architecture architecture = Architecture::SoftmaxRegression;
  std::size_t hidden = 32;  // Mlp1h only
  Activation activation = Activation::Tanh;

  bool operator==(const ModelSpec&) const = default;
};

/// Student parameters. Flat weight layout, all matrices row-major:
///   SoftmaxRegression: W[C x D], b[C]
///   Mlp1h:             W1[H x D], b1[H], W2[C x H], b2[C]
/// where D = M*N is the flattened input and C the class count.
struct ModelParams {
  ModelSpec spec;
  std::size_t input_dim = 0;
  std::size_t output_dim = 0;
  std::vector<double> weights;

  static std::size_t parameter_count(const ModelSpec& spec, std::size_t input_dim,
                                     std::size_t output_dim);
  static ModelParams zeros(const ModelSpec& spec, std::size_t input_dim, std::size_t output_dim);

  std::size_t size() const { return weights.size(); }
  /// Throws ConfigError on a length mismatch or non-finite weights.
  void validate() const;

  bool operator==(const ModelParams&) const = default;
};

enum class Optimizer { Sgd };

struct TrainConfig {
  ModelSpec model;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  double learning_rate = 0.1;
  double l2_penalty = 1e-4;
  double init_scale = 0.01;
  Optimizer optimizer = Optimizer::Sgd;
  std::uint64_t shuffle_seed = 1;
  std::uint64_t init_seed = 2;
  bool warm_start = false;

  void validate() const;
};

/// Logits of monitored targets over the final min(5, E) epochs.
struct LogitTrace {
  /// logits[target][epoch][class]
  std::vector<std::vector<std::vector<double>>> logits;

  std::vector<double> mean_logits(std::size_t target) const;
};

struct TrainResult {
  ModelParams params;
  LogitTrace trace;
  /// Full-data objective (mean cross-entropy + l2/2 * |theta|^2) after each epoch.
  std::vector<double> epoch_objective;
};

inline constexpr std::size_t kTraceEpochs = 5;

/// Mini-batch SGD on mean cross-entropy plus L2. Deterministic for fixed
/// seeds. `init` is required when cfg.warm_start is set.
TrainResult train(const Dataset& d, const TrainConfig& cfg, const TargetSpec* monitored = nullptr,
                  const ModelParams* init = nullptr);

// Queries. Inputs are flat M*N vectors; binary instances go through the
// Instance overloads. All throw ShapeError on dimension mismatch and
// LabelError on labels outside [0, C).

std::vector<double> logits(const ModelParams& theta, std::span<const double> x);
std::vector<double> predict_probs(const ModelParams& theta, std::span<const double> x);
std::vector<double> predict_probs(const ModelParams& theta, const Instance& x);
int predict(const ModelParams& theta, const Instance& x);

double loss(const ModelParams& theta, std::span<const double> x, int y);
double loss(const ModelParams& theta, const Instance& x, int y);

/// d loss / d theta, same layout as ModelParams::weights.
std::vector<double> grad_theta(const ModelParams& theta, std::span<const double> x, int y);
std::vector<double> grad_theta(const ModelParams& theta, const Instance& x, int y);

/// d loss / d x on the relaxed input, flat M*N (row-major M x N).
std::vector<double> grad_input(const ModelParams& theta, std::span<const double> x, int y);
std::vector<double> grad_input(const ModelParams& theta, const Instance& x, int y);

/// d logit_c / d x, the alternative gradient source for candidate filtering.
std::vector<double> grad_input_logit(const ModelParams& theta, std::span<const double> x, int c);

/// Embedding used by feature collision: logits for SoftmaxRegression,
/// hidden activations for Mlp1h.
std::vector<double> embedding(const ModelParams& theta, std::span<const double> x);
/// J^T v where J = d embedding / d x.
std::vector<double> embedding_vjp(const ModelParams& theta, std::span<const double> x,
                                  std::span<const double> v);

/// d/dx < grad_theta(theta, x, y), u >, the mixed second derivative used by
/// gradient matching.
std::vector<double> grad_input_of_grad_dot(const ModelParams& theta, std::span<const double> x,
                                           int y, std::span<const double> u);

/// Accuracy of argmax predictions over a dataset, in [0, 1].
double accuracy(const ModelParams& theta, const Dataset& d);

/// Argmax of the mean logit vector of `trace` for `target`, lower index on ties.
int last5_prediction(const LogitTrace& trace, std::size_t target);
/// True iff the last-epochs mean logit argmax equals `target_label`.
bool last5_logit_decision(const LogitTrace& trace, int target_label, std::size_t target = 0);

/// Index of the largest value, lower index on ties.
int argmax(std::span<const double> values);

std::string model_to_json(const ModelParams& theta);
ModelParams model_from_json(const std::string& text);
void save_model(const ModelParams& theta, const std::filesystem::path& path);
ModelParams load_model(const std::filesystem::path& path);

const char* to_string(Architecture a);
const char* to_string(Activation a);
Architecture parse_architecture(const std::string& s);
Activation parse_activation(const std::string& s);

}  // namespace dmt
