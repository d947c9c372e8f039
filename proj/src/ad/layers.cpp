#include "vbnet/ad/layers.hpp"

#include <cmath>

namespace vbnet::ad {

namespace {

Value uniform(Shape shape, double bound, Rng& rng) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    Tensor t(std::move(shape));
    for (double& v : t.data) v = dist(rng);
    return Value::parameter(std::move(t));
}

}  // namespace

Dense::Dense(std::size_t in, std::size_t out, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    W_ = uniform({in, out}, bound, rng);
    b_ = uniform({1, out}, bound, rng);
}

void Dense::collect(const std::string& prefix, ParamList& out) const {
    out.push_back({prefix + ".weight", W_});
    out.push_back({prefix + ".bias", b_});
}

Conv1d::Conv1d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
               std::size_t padding, Rng& rng)
    : padding_(padding) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(in_channels * kernel));
    W_ = uniform({out_channels, in_channels, kernel}, bound, rng);
    b_ = uniform({out_channels}, bound, rng);
}

void Conv1d::collect(const std::string& prefix, ParamList& out) const {
    out.push_back({prefix + ".weight", W_});
    out.push_back({prefix + ".bias", b_});
}

Embedding::Embedding(std::size_t rows, std::size_t dim, Rng& rng, double stddev) {
    std::normal_distribution<double> dist(0.0, stddev);
    Tensor t({rows, dim});
    for (double& v : t.data) v = dist(rng);
    table_ = Value::parameter(std::move(t));
}

void Embedding::collect(const std::string& prefix, ParamList& out) const {
    out.push_back({prefix + ".table", table_});
}

LstmCell::LstmCell(std::size_t in, std::size_t hidden, Rng& rng) : hidden_(hidden) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
    Wx_ = uniform({in, 4 * hidden}, bound, rng);
    Wh_ = uniform({hidden, 4 * hidden}, bound, rng);
    b_ = uniform({1, 4 * hidden}, bound, rng);
}

std::pair<Value, Value> LstmCell::operator()(const Value& x, const Value& h, const Value& c) const {
    const Value z = add_row(add(matmul(x, Wx_), matmul(h, Wh_)), b_);
    const Value i = sigmoid(slice_cols(z, 0, hidden_));
    const Value f = sigmoid(slice_cols(z, hidden_, hidden_));
    const Value g = tanh(slice_cols(z, 2 * hidden_, hidden_));
    const Value o = sigmoid(slice_cols(z, 3 * hidden_, hidden_));
    Value c_next = add(mul(f, c), mul(i, g));
    Value h_next = mul(o, tanh(c_next));
    return {std::move(h_next), std::move(c_next)};
}

void LstmCell::collect(const std::string& prefix, ParamList& out) const {
    out.push_back({prefix + ".w_input", Wx_});
    out.push_back({prefix + ".w_hidden", Wh_});
    out.push_back({prefix + ".bias", b_});
}

std::size_t parameter_count(const ParamList& params) {
    std::size_t n = 0;
    for (const auto& p : params) n += p.value.size();
    return n;
}

}  // namespace vbnet::ad
