#include "qasa/serialization.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace qasa::io {

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json ratio_json(const backtest::Ratio& r) {
  return {{"value", finite_or_null(r.value)}, {"degenerate", r.degenerate}};
}

}  // namespace

json to_json(const vqc::VqcParams& p) {
  std::vector<double> flat;
  for (Eigen::Index l = 0; l < p.thetas.rows(); ++l)
    for (Eigen::Index i = 0; i < p.thetas.cols(); ++i) flat.push_back(p.thetas(l, i));
  return {{"n_qubits", p.n_qubits()},
          {"n_layers", p.n_layers()},
          {"encoding", vqc::to_string(p.encoding)},
          {"thetas", flat},
          {"seed", p.seed}};
}

vqc::VqcParams vqc_from_json(const json& j) {
  vqc::VqcParams p;
  const int n = j.at("n_qubits").get<int>();
  const int layers = j.at("n_layers").get<int>();
  const auto flat = j.at("thetas").get<std::vector<double>>();
  if (n < 1 || layers < 1 || flat.size() != std::size_t(n) * std::size_t(layers)) {
    throw std::invalid_argument("circuit parameters do not match n_qubits x n_layers");
  }
  p.thetas.resize(layers, n);
  for (int l = 0; l < layers; ++l)
    for (int i = 0; i < n; ++i) p.thetas(l, i) = flat[std::size_t(l * n + i)];
  p.encoding = vqc::encoding_from_string(j.at("encoding").get<std::string>());
  p.seed = j.value("seed", std::uint64_t{0});
  p.validate();
  return p;
}

json to_json(const featuremap::MinMaxScaler& s) {
  json j = json::object();
  const auto& names = featuremap::channel_names();
  for (int c = 0; c < featuremap::kChannels; ++c) {
    j[names[std::size_t(c)]] = {{"a", s.bounds()[std::size_t(c)].a}, {"b", s.bounds()[std::size_t(c)].b}};
  }
  return j;
}

featuremap::MinMaxScaler scaler_from_json(const json& j) {
  std::array<featuremap::ChannelBounds, featuremap::kChannels> bounds{};
  const auto& names = featuremap::channel_names();
  for (int c = 0; c < featuremap::kChannels; ++c) {
    const auto& e = j.at(names[std::size_t(c)]);
    bounds[std::size_t(c)] = {e.at("a").get<double>(), e.at("b").get<double>()};
  }
  return featuremap::MinMaxScaler(bounds);
}

json to_json(const Checkpoint& c) {
  const auto& m = c.model;
  json j = {{"variant", model::to_string(m.variant)},
            {"window", m.window},
            {"raw_price_tokens", m.raw_price_tokens},
            {"query", to_json(m.query)},
            {"key", to_json(m.key)},
            {"value", to_json(m.value)},
            {"head", {{"weights", std::vector<double>(m.head_weights.data(), m.head_weights.data() + m.head_weights.size())},
                      {"bias", m.head_bias}}},
            {"scaler", c.scaler ? to_json(*c.scaler) : json(nullptr)}};
  return j;
}

Checkpoint checkpoint_from_json(const json& j) {
  Checkpoint c;
  auto& m = c.model;
  m.variant = model::variant_from_string(j.at("variant").get<std::string>());
  m.window = j.at("window").get<int>();
  m.raw_price_tokens = j.value("raw_price_tokens", false);
  m.query = vqc_from_json(j.at("query"));
  m.key = vqc_from_json(j.at("key"));
  m.value = vqc_from_json(j.at("value"));
  const auto w = j.at("head").at("weights").get<std::vector<double>>();
  m.head_weights = Eigen::Map<const Eigen::VectorXd>(w.data(), Eigen::Index(w.size()));
  m.head_bias = j.at("head").at("bias").get<double>();
  m.validate();
  if (j.contains("scaler") && !j["scaler"].is_null()) c.scaler = scaler_from_json(j["scaler"]);
  if (m.variant == model::Variant::Hybrid && !c.scaler) throw std::invalid_argument("hybrid checkpoint lacks its scaler");
  return c;
}

json to_json(const backtest::BacktestReport& r) {
  json trades = json::array();
  for (const auto& t : r.trades) trades.push_back({{"bar", t.bar}, {"fee_paid", t.fee_paid}});
  return {{"total_return", finite_or_null(r.total_return)},
          {"sharpe", ratio_json(r.sharpe)},
          {"max_drawdown", finite_or_null(r.max_drawdown)},
          {"calmar", ratio_json(r.calmar)},
          {"n_trades", r.trades.size()},
          {"trades", trades}};
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path.string() + " is not valid JSON: " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace qasa::io
