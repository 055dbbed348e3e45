#pragma once

// Quantum self-attention block: three variational circuits produce Q, K, V
// rows (one per token) as Pauli-Z expectation vectors; classical softmax
// attention mixes them, the rows are mean-pooled and an affine head with a
// sigmoid yields P(rebalance).

#include "qasa/featuremap.hpp"
#include "qasa/vqc.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace qasa::model {

enum class Variant { Sequence, Hybrid };
enum class TokenOrigin { PriceWindow, EngineeredFeatures };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

/// T tokens of dimension d, one per row.
struct TokenBatch {
  Eigen::MatrixXd tokens;
  TokenOrigin origin = TokenOrigin::PriceWindow;
};

struct ModelSpec {
  Variant variant = Variant::Sequence;
  int window = 8;
  int layers = 2;
  bool raw_price_tokens = false;  // Sequence only: prices instead of log-returns
};

struct QasaModel {
  Variant variant = Variant::Sequence;
  int window = 8;
  bool raw_price_tokens = false;
  vqc::VqcParams query;
  vqc::VqcParams key;
  vqc::VqcParams value;
  Eigen::VectorXd head_weights;
  double head_bias = 0;

  int n_qubits() const { return query.n_qubits(); }
  void validate() const;
};

/// Register width for a Sequence model: ceil(log2 W) (at least one qubit).
int sequence_qubits(int window);

/// Fresh model; the three circuits and the head get independent seeds derived from `seed`.
QasaModel init_model(const ModelSpec& spec, std::uint64_t seed);

/// Sliding windows over a price series. Returns mode: row j holds the W
/// log-returns ending at bar j+W (len-W rows). Raw mode: the W prices ending
/// at bar j+W-1 (len-W+1 rows).
TokenBatch make_tokens_sequence(const Eigen::VectorXd& prices, int window, bool raw_prices = false);

/// Angle rows (T x 8) as hybrid tokens.
TokenBatch make_tokens_hybrid(const Eigen::MatrixXd& angles);

/// Encoded input state per token. A zero-norm amplitude token maps to |0...0>.
std::vector<vqc::State> encode_tokens(const TokenBatch& tokens, const QasaModel& model);

struct Qkv {
  Eigen::MatrixXd q, k, v;  // T x n
};

Qkv qkv(const std::vector<vqc::State>& states, const QasaModel& model);
Qkv qkv(const TokenBatch& tokens, const QasaModel& model);

struct ForwardTrace {
  Qkv qkv;
  Eigen::MatrixXd weights;  // T x T attention weights
  Eigen::MatrixXd output;   // T x n attention output
  Eigen::VectorXd pooled;   // mean over token rows
  double logit = 0;
  double probability = 0.5;
};

ForwardTrace trace_forward(const std::vector<vqc::State>& states, const QasaModel& model);

/// Same pipeline with every <Z_i> estimated from `shots` measurements.
ForwardTrace trace_forward_sampled(const std::vector<vqc::State>& states, const QasaModel& model, int shots,
                                   std::mt19937_64& rng);

/// P(rebalance) in (0, 1).
double forward(const TokenBatch& tokens, const QasaModel& model);

/// Hybrid variant over a context of per-bar angle vectors (T x 8).
double forward_hybrid(const Eigen::MatrixXd& angles, const QasaModel& model);

struct ModelGradient {
  Eigen::MatrixXd query, key, value;
  Eigen::VectorXd head_weights;
  double head_bias = 0;

  static ModelGradient zeros_like(const QasaModel& model);
  ModelGradient& operator+=(const ModelGradient& other);
  ModelGradient& operator*=(double s);
};

/// dL/dparams given dL/dlogit, through the head, pooling, attention, and the
/// parameter-shift rule on each circuit.
ModelGradient backward(const std::vector<vqc::State>& states, const QasaModel& model, const ForwardTrace& trace,
                       double d_logit);

}  // namespace qasa::model
