#pragma once

#include <span>
#include <vector>

#include "vbnet/ad/value.hpp"

/// Differentiable primitives. Every op throws ShapeError on incompatible
/// inputs at graph-construction time.
namespace vbnet::ad {

Value add(const Value& a, const Value& b);
Value sub(const Value& a, const Value& b);
Value mul(const Value& a, const Value& b);
Value div(const Value& a, const Value& b);
Value scale(const Value& a, double c);
Value add_scalar(const Value& a, double c);
Value square(const Value& a);

/// a[B,n] + row[1,n] broadcast over rows.
Value add_row(const Value& a, const Value& row);

/// a[B,k] · b[k,n].
Value matmul(const Value& a, const Value& b);

Value relu(const Value& a);
Value sigmoid(const Value& a);
Value tanh(const Value& a);

/// Gradient passes where lo ≤ x ≤ hi and is zero strictly outside.
Value clamp(const Value& a, double lo, double hi);

/// Concatenation of 2-D tensors along columns; all parts share the row count.
Value concat_cols(std::span<const Value> parts);
Value concat_cols(std::initializer_list<Value> parts);
Value slice_cols(const Value& a, std::size_t from, std::size_t len);
Value slice_rows(const Value& a, std::size_t from, std::size_t len);

Value reshape(const Value& a, Shape shape);

/// Rows of table[K,d] selected by `index`; result [B,d].
Value gather_rows(const Value& table, std::span<const int> index);

/// x[B,Cin,L] ⊛ w[Cout,Cin,K] + b[Cout], stride 1, zero padding.
Value conv1d(const Value& x, const Value& w, const Value& b, std::size_t padding);

/// Non-overlapping max over windows of `width` along the last axis of x[B,C,L].
Value maxpool1d(const Value& x, std::size_t width = 2);

Value sum(const Value& a);
Value mean(const Value& a);
/// mean((a − b)²) as a scalar.
Value mse(const Value& a, const Value& b);

}  // namespace vbnet::ad
