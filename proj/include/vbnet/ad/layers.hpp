#pragma once

#include <random>
#include <string>
#include <utility>
#include <vector>

#include "vbnet/ad/ops.hpp"
#include "vbnet/ad/value.hpp"

namespace vbnet::ad {

struct NamedParam {
    std::string name;
    Value value;
    double lr_scale = 1.0;  ///< multiplier on the optimiser's base learning rate
};

using ParamList = std::vector<NamedParam>;
using Rng = std::mt19937_64;

/// y = x·W + b with W[in,out]; uniform(±1/√in) initialisation.
class Dense {
public:
    Dense() = default;
    Dense(std::size_t in, std::size_t out, Rng& rng);

    Value operator()(const Value& x) const { return add_row(matmul(x, W_), b_); }
    void collect(const std::string& prefix, ParamList& out) const;

    std::size_t in() const { return W_.shape()[0]; }
    std::size_t out() const { return W_.shape()[1]; }
    const Value& weight() const { return W_; }
    const Value& bias() const { return b_; }

private:
    Value W_;
    Value b_;
};

class Conv1d {
public:
    Conv1d() = default;
    Conv1d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
           std::size_t padding, Rng& rng);

    Value operator()(const Value& x) const { return conv1d(x, W_, b_, padding_); }
    void collect(const std::string& prefix, ParamList& out) const;

    std::size_t out_length(std::size_t in_length) const {
        return in_length + 2 * padding_ - W_.shape()[2] + 1;
    }

private:
    Value W_;
    Value b_;
    std::size_t padding_ = 0;
};

/// Initial spread of embedding rows; small, so a barely trained row stays
/// close to the fleet average.
inline constexpr double kEmbeddingInitStd = 0.1;

/// Lookup table of learnable row vectors, N(0, stddev²) initialised.
class Embedding {
public:
    Embedding() = default;
    Embedding(std::size_t rows, std::size_t dim, Rng& rng, double stddev = kEmbeddingInitStd);

    Value operator()(std::span<const int> index) const { return gather_rows(table_, index); }
    void collect(const std::string& prefix, ParamList& out) const;

    std::size_t rows() const { return table_.shape()[0]; }
    std::size_t dim() const { return table_.shape()[1]; }
    const Value& table() const { return table_; }

private:
    Value table_;
};

/// Gated recurrent cell with input, forget and output gates (gate order i, f, g, o).
class LstmCell {
public:
    LstmCell() = default;
    LstmCell(std::size_t in, std::size_t hidden, Rng& rng);

    /// One step; returns (h', c').
    std::pair<Value, Value> operator()(const Value& x, const Value& h, const Value& c) const;
    void collect(const std::string& prefix, ParamList& out) const;

    std::size_t hidden() const { return hidden_; }

private:
    Value Wx_;
    Value Wh_;
    Value b_;
    std::size_t hidden_ = 0;
};

std::size_t parameter_count(const ParamList& params);

}  // namespace vbnet::ad
