#pragma once

#include "qasa/backtest.hpp"
#include "qasa/featuremap.hpp"
#include "qasa/model.hpp"
#include "qasa/vqc.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>

namespace qasa::io {

using nlohmann::json;

/// {n_qubits, n_layers, encoding, thetas (row-major, layer by layer), seed}
json to_json(const vqc::VqcParams& params);
vqc::VqcParams vqc_from_json(const json& j);

/// {channel name: {a, b}}
json to_json(const featuremap::MinMaxScaler& scaler);
featuremap::MinMaxScaler scaler_from_json(const json& j);

struct Checkpoint {
  model::QasaModel model;
  std::optional<featuremap::MinMaxScaler> scaler;
};

json to_json(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_json(const json& j);

/// Non-finite ratios are written as null next to a `degenerate` flag.
json to_json(const backtest::BacktestReport& report);

json read_json(const std::filesystem::path& path);

/// Two-space indented JSON with a trailing newline.
void write_json(const std::filesystem::path& path, const json& j);

}  // namespace qasa::io
