#pragma once

// Classifier backend: a one-hidden-layer ReLU network with a softmax head.
// The hidden layer plays the role of a transferable trunk; fine-tuning keeps
// it and replaces the head.

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "ltpc/types.hpp"

namespace ltpc::classify {

/// Row-major parameters. body_w is H x F, head_w is K x H.
struct ModelParams {
  std::size_t input_dim = 0;   // F
  std::size_t hidden_dim = 0;  // H
  std::size_t n_classes = 0;   // K
  std::vector<double> body_w, body_b;
  std::vector<double> head_w, head_b;

  std::size_t parameter_count() const noexcept;
  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

struct TrainConfig {
  double learning_rate = 0.05;
  int epochs = 30;
  std::size_t batch_size = 32;
  std::size_t hidden_width = 64;
  double weight_scale = 0.1;
  std::uint64_t seed = 0;
  bool full_batch = false;

  void validate() const;
};

struct Prediction {
  std::vector<double> probs;
};

struct Example {
  std::span<const double> feature;
  std::size_t label = 0;
};

/// Weights i.i.d. uniform in [-weight_scale, weight_scale], zero biases.
ModelParams init_model(std::size_t F, std::size_t H, std::size_t K, double weight_scale,
                       std::uint64_t seed);

std::vector<double> logits(const ModelParams& m, std::span<const double> feature);
Prediction predict(const ModelParams& m, std::span<const double> feature);

/// Max-subtracted softmax.
std::vector<double> softmax(std::span<const double> z);

struct Gradient {
  std::vector<double> body_w, body_b;
  std::vector<double> head_w, head_b;
};

struct LossAndGradient {
  double loss = 0.0;
  Gradient grad;
};

/// Mean cross-entropy over the batch and its exact gradient.
LossAndGradient loss_and_gradient(const ModelParams& m, std::span<const Example> batch);
double loss(const ModelParams& m, std::span<const Example> batch);

struct TrainResult {
  ModelParams model;
  std::vector<double> epoch_loss;  // full-data loss after each epoch
  double final_loss = 0.0;
};

/// Labeled examples from a training set and the partition over it.
std::vector<Example> examples_from(const TrainingSet& set, const PlacePartition& partition);

/// Fresh model trained by minibatch gradient descent with seeded shuffling.
TrainResult train(std::span<const Example> data, std::size_t n_classes, const TrainConfig& cfg);

/// Warm start: copies the body of `base`, draws a fresh head sized to
/// n_classes, then trains exactly as train() does.
TrainResult fine_tune(const ModelParams& base, std::span<const Example> data,
                      std::size_t n_classes, const TrainConfig& cfg);

/// Gradient descent from an explicit starting point.
TrainResult descend(ModelParams start, std::span<const Example> data, const TrainConfig& cfg);

double accuracy(const ModelParams& m, std::span<const Example> data);

/// Predictions computed elsewhere, keyed by query id. CSV schema:
/// `query_id,class_id,prob`, optional header row.
class PrecomputedPredictions {
 public:
  static PrecomputedPredictions load(const std::string& path);
  static PrecomputedPredictions parse(const std::string& csv_text);

  Prediction predict(const std::string& query_id) const;
  bool contains(const std::string& query_id) const { return rows_.count(query_id) > 0; }
  std::size_t size() const noexcept { return rows_.size(); }

 private:
  std::map<std::string, std::vector<double>> rows_;
};

}  // namespace ltpc::classify
