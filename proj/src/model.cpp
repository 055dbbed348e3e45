#include "qasa/model.hpp"

#include "qasa/attention.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace qasa::model {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

double sigmoid(double z) {
  constexpr double kFloor = 1e-15;
  const double p = z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
  return std::clamp(p, kFloor, 1.0 - kFloor);
}

}  // namespace

std::string to_string(Variant v) { return v == Variant::Sequence ? "sequence" : "hybrid"; }

Variant variant_from_string(const std::string& s) {
  if (s == "sequence") return Variant::Sequence;
  if (s == "hybrid") return Variant::Hybrid;
  throw std::invalid_argument("unknown variant '" + s + "' (expected sequence or hybrid)");
}

void QasaModel::validate() const {
  if (window < 1) throw std::invalid_argument("context window must be >= 1");
  query.validate();
  key.validate();
  value.validate();
  if (key.thetas.cols() != query.thetas.cols() || value.thetas.cols() != query.thetas.cols() ||
      key.thetas.rows() != query.thetas.rows() || value.thetas.rows() != query.thetas.rows() ||
      key.encoding != query.encoding || value.encoding != query.encoding) {
    throw std::invalid_argument("Q/K/V circuits must share width, depth and encoding");
  }
  if (head_weights.size() != query.n_qubits()) throw std::invalid_argument("head input width must equal qubit count");
  const auto expected = variant == Variant::Hybrid ? vqc::Encoding::Angle : vqc::Encoding::Amplitude;
  if (query.encoding != expected) throw std::invalid_argument("encoding does not match model variant");
  if (variant == Variant::Hybrid && query.n_qubits() != featuremap::kHybridQubits) {
    throw std::invalid_argument("hybrid variant runs on six qubits");
  }
}

int sequence_qubits(int window) {
  if (window < 1) throw std::invalid_argument("window must be >= 1");
  return qsim::qubits_for_dim(window);
}

QasaModel init_model(const ModelSpec& spec, std::uint64_t seed) {
  if (spec.layers < 1) throw std::invalid_argument("layers must be >= 1");
  QasaModel m;
  m.variant = spec.variant;
  m.window = spec.window;
  m.raw_price_tokens = spec.raw_price_tokens;
  const int n = spec.variant == Variant::Hybrid ? featuremap::kHybridQubits : sequence_qubits(spec.window);
  const auto enc = spec.variant == Variant::Hybrid ? vqc::Encoding::Angle : vqc::Encoding::Amplitude;
  m.query = vqc::init_params(n, spec.layers, splitmix64(seed ^ 0x51), enc);
  m.key = vqc::init_params(n, spec.layers, splitmix64(seed ^ 0x4B), enc);
  m.value = vqc::init_params(n, spec.layers, splitmix64(seed ^ 0x56), enc);
  std::mt19937_64 rng(splitmix64(seed ^ 0x48));
  m.head_weights.resize(n);
  for (int i = 0; i < n; ++i) m.head_weights(i) = (double(rng() >> 11) * 0x1.0p-53 - 0.5);
  m.head_bias = 0;
  m.validate();
  return m;
}

TokenBatch make_tokens_sequence(const Eigen::VectorXd& prices, int window, bool raw_prices) {
  if (window < 1) throw std::invalid_argument("window must be >= 1");
  if ((prices.array() <= 0).any()) throw std::invalid_argument("prices must be positive");
  TokenBatch batch{{}, TokenOrigin::PriceWindow};
  if (raw_prices) {
    if (prices.size() < window) throw std::invalid_argument("insufficient history for one price window");
    const Eigen::Index rows = prices.size() - window + 1;
    batch.tokens.resize(rows, window);
    for (Eigen::Index j = 0; j < rows; ++j) batch.tokens.row(j) = prices.segment(j, window).transpose();
    return batch;
  }
  if (prices.size() <= window) throw std::invalid_argument("insufficient history for one return window");
  const Eigen::ArrayXd logp = prices.array().log();
  const Eigen::VectorXd r = (logp.tail(prices.size() - 1) - logp.head(prices.size() - 1)).matrix();
  const Eigen::Index rows = prices.size() - window;
  batch.tokens.resize(rows, window);
  for (Eigen::Index j = 0; j < rows; ++j) batch.tokens.row(j) = r.segment(j, window).transpose();
  return batch;
}

TokenBatch make_tokens_hybrid(const Eigen::MatrixXd& angles) {
  if (angles.cols() != featuremap::kChannels) throw std::invalid_argument("hybrid tokens carry eight angles");
  return {angles, TokenOrigin::EngineeredFeatures};
}

std::vector<vqc::State> encode_tokens(const TokenBatch& batch, const QasaModel& model) {
  if (batch.tokens.rows() < 1) throw std::invalid_argument("token batch is empty");
  if (!batch.tokens.allFinite()) throw std::invalid_argument("tokens must be finite");
  std::vector<vqc::State> states;
  states.reserve(std::size_t(batch.tokens.rows()));
  if (model.variant == Variant::Hybrid) {
    if (batch.origin != TokenOrigin::EngineeredFeatures) throw std::invalid_argument("hybrid model expects feature tokens");
    if (batch.tokens.cols() != featuremap::kChannels) throw std::invalid_argument("hybrid tokens carry eight angles");
    for (Eigen::Index t = 0; t < batch.tokens.rows(); ++t) {
      const featuremap::AngleVector a = batch.tokens.row(t).transpose();
      states.push_back(vqc::encode(featuremap::to_angle_input(a), model.query));
    }
    return states;
  }
  if (batch.origin != TokenOrigin::PriceWindow) throw std::invalid_argument("sequence model expects price-window tokens");
  const int n = model.n_qubits();
  if (batch.tokens.cols() > (Eigen::Index{1} << n)) throw std::invalid_argument("token dimension exceeds 2^n");
  for (Eigen::Index t = 0; t < batch.tokens.rows(); ++t) {
    const Eigen::VectorXd x = batch.tokens.row(t).transpose();
    if (x.squaredNorm() == 0.0) {
      states.emplace_back(n);
    } else {
      states.push_back(qsim::amplitude_encode(x, n));
    }
  }
  return states;
}

Qkv qkv(const std::vector<vqc::State>& states, const QasaModel& model) {
  const auto T = static_cast<Eigen::Index>(states.size());
  const int n = model.n_qubits();
  Qkv out{Eigen::MatrixXd(T, n), Eigen::MatrixXd(T, n), Eigen::MatrixXd(T, n)};
  for (Eigen::Index t = 0; t < T; ++t) {
    const auto& s = states[std::size_t(t)];
    out.q.row(t) = vqc::forward_state(s, model.query.thetas).transpose();
    out.k.row(t) = vqc::forward_state(s, model.key.thetas).transpose();
    out.v.row(t) = vqc::forward_state(s, model.value.thetas).transpose();
  }
  return out;
}

Qkv qkv(const TokenBatch& tokens, const QasaModel& model) {
  model.validate();
  return qkv(encode_tokens(tokens, model), model);
}

namespace {

ForwardTrace finish_forward(Qkv q, const QasaModel& model) {
  ForwardTrace tr;
  tr.qkv = std::move(q);
  tr.weights = attention_weights(tr.qkv.q, tr.qkv.k, tr.qkv.v.cols());
  tr.output = tr.weights * tr.qkv.v;
  tr.pooled = tr.output.colwise().mean().transpose();
  tr.logit = model.head_weights.dot(tr.pooled) + model.head_bias;
  tr.probability = sigmoid(tr.logit);
  return tr;
}

}  // namespace

ForwardTrace trace_forward(const std::vector<vqc::State>& states, const QasaModel& model) {
  return finish_forward(qkv(states, model), model);
}

ForwardTrace trace_forward_sampled(const std::vector<vqc::State>& states, const QasaModel& model, int shots,
                                   std::mt19937_64& rng) {
  const auto T = static_cast<Eigen::Index>(states.size());
  const int n = model.n_qubits();
  Qkv out{Eigen::MatrixXd(T, n), Eigen::MatrixXd(T, n), Eigen::MatrixXd(T, n)};
  for (Eigen::Index t = 0; t < T; ++t) {
    const auto& s = states[std::size_t(t)];
    out.q.row(t) = qsim::sample_expectations_z(vqc::evolve(s, model.query.thetas), shots, rng).transpose();
    out.k.row(t) = qsim::sample_expectations_z(vqc::evolve(s, model.key.thetas), shots, rng).transpose();
    out.v.row(t) = qsim::sample_expectations_z(vqc::evolve(s, model.value.thetas), shots, rng).transpose();
  }
  return finish_forward(std::move(out), model);
}

double forward(const TokenBatch& tokens, const QasaModel& model) {
  model.validate();
  return trace_forward(encode_tokens(tokens, model), model).probability;
}

double forward_hybrid(const Eigen::MatrixXd& angles, const QasaModel& model) {
  if (model.variant != Variant::Hybrid) throw std::invalid_argument("forward_hybrid needs a hybrid model");
  return forward(make_tokens_hybrid(angles), model);
}

ModelGradient ModelGradient::zeros_like(const QasaModel& m) {
  return {Eigen::MatrixXd::Zero(m.query.thetas.rows(), m.query.thetas.cols()),
          Eigen::MatrixXd::Zero(m.key.thetas.rows(), m.key.thetas.cols()),
          Eigen::MatrixXd::Zero(m.value.thetas.rows(), m.value.thetas.cols()),
          Eigen::VectorXd::Zero(m.head_weights.size()), 0.0};
}

ModelGradient& ModelGradient::operator+=(const ModelGradient& o) {
  query += o.query;
  key += o.key;
  value += o.value;
  head_weights += o.head_weights;
  head_bias += o.head_bias;
  return *this;
}

ModelGradient& ModelGradient::operator*=(double s) {
  query *= s;
  key *= s;
  value *= s;
  head_weights *= s;
  head_bias *= s;
  return *this;
}

ModelGradient backward(const std::vector<vqc::State>& states, const QasaModel& model, const ForwardTrace& tr,
                       double d_logit) {
  ModelGradient g = ModelGradient::zeros_like(model);
  g.head_weights = d_logit * tr.pooled;
  g.head_bias = d_logit;
  const auto T = static_cast<Eigen::Index>(states.size());
  // Mean pooling spreads dL/dpooled evenly over the output rows.
  const Eigen::MatrixXd d_out = (d_logit / double(T)) * Eigen::VectorXd::Ones(T) * model.head_weights.transpose();
  const auto d = attention_backward(tr.qkv.q, tr.qkv.k, tr.qkv.v, tr.weights, d_out);
  for (Eigen::Index t = 0; t < T; ++t) {
    const auto& s = states[std::size_t(t)];
    g.query += vqc::parameter_shift_grad(s, model.query.thetas, d.dq.row(t).transpose());
    g.key += vqc::parameter_shift_grad(s, model.key.thetas, d.dk.row(t).transpose());
    g.value += vqc::parameter_shift_grad(s, model.value.thetas, d.dv.row(t).transpose());
  }
  return g;
}

}  // namespace qasa::model
