#include "vbnet/ad/ops.hpp"

#include <algorithm>
#include <cmath>

#include "vbnet/errors.hpp"

namespace vbnet::ad {

namespace {

void require_same(const Value& a, const Value& b, const char* op) {
    if (a.shape() != b.shape()) {
        throw ShapeError(std::string(op) + ": shapes " + to_string(a.shape()) + " and " +
                         to_string(b.shape()) + " differ");
    }
}

void require_2d(const Value& a, const char* op) {
    if (a.tensor().rank() != 2) {
        throw ShapeError(std::string(op) + ": expected 2-D tensor, got " + to_string(a.shape()));
    }
}

Node& parent(Node& self, std::size_t i) { return *self.parents[i]; }

template <typename F>
Value unary(const Value& a, F&& f, std::function<void(Node&)> back) {
    Tensor out(a.shape());
    const auto x = a.data();
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = f(x[i]);
    return Value::from_op(std::move(out), {a}, std::move(back));
}

}  // namespace

Value add(const Value& a, const Value& b) {
    require_same(a, b, "add");
    Tensor out(a.shape());
    const auto x = a.data();
    const auto y = b.data();
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = x[i] + y[i];
    return Value::from_op(std::move(out), {a, b}, [](Node& self) {
        for (std::size_t p = 0; p < 2; ++p) {
            Node& n = parent(self, p);
            if (!n.requires_grad) continue;
            auto& g = n.ensure_grad();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
        }
    });
}

Value sub(const Value& a, const Value& b) {
    require_same(a, b, "sub");
    Tensor out(a.shape());
    const auto x = a.data();
    const auto y = b.data();
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = x[i] - y[i];
    return Value::from_op(std::move(out), {a, b}, [](Node& self) {
        Node& na = parent(self, 0);
        Node& nb = parent(self, 1);
        if (na.requires_grad) {
            auto& g = na.ensure_grad();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
        }
        if (nb.requires_grad) {
            auto& g = nb.ensure_grad();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] -= self.grad[i];
        }
    });
}

Value mul(const Value& a, const Value& b) {
    require_same(a, b, "mul");
    Tensor out(a.shape());
    const auto x = a.data();
    const auto y = b.data();
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = x[i] * y[i];
    return Value::from_op(std::move(out), {a, b}, [](Node& self) {
        Node& na = parent(self, 0);
        Node& nb = parent(self, 1);
        if (na.requires_grad) {
            auto& g = na.ensure_grad();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * nb.value.data[i];
        }
        if (nb.requires_grad) {
            auto& g = nb.ensure_grad();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * na.value.data[i];
        }
    });
}

Value div(const Value& a, const Value& b) {
    require_same(a, b, "div");
    Tensor out(a.shape());
    const auto x = a.data();
    const auto y = b.data();
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] = x[i] / y[i];
    return Value::from_op(std::move(out), {a, b}, [](Node& self) {
        Node& na = parent(self, 0);
        Node& nb = parent(self, 1);
        if (na.requires_grad) {
            auto& g = na.ensure_grad();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] / nb.value.data[i];
        }
        if (nb.requires_grad) {
            auto& g = nb.ensure_grad();
            for (std::size_t i = 0; i < g.size(); ++i) {
                g[i] -= self.grad[i] * self.value.data[i] / nb.value.data[i];
            }
        }
    });
}

Value scale(const Value& a, double c) {
    return unary(a, [c](double x) { return c * x; }, [c](Node& self) {
        auto& g = parent(self, 0).ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += c * self.grad[i];
    });
}

Value add_scalar(const Value& a, double c) {
    return unary(a, [c](double x) { return x + c; }, [](Node& self) {
        auto& g = parent(self, 0).ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    });
}

Value square(const Value& a) {
    return unary(a, [](double x) { return x * x; }, [](Node& self) {
        Node& n = parent(self, 0);
        auto& g = n.ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += 2.0 * n.value.data[i] * self.grad[i];
    });
}

Value add_row(const Value& a, const Value& row) {
    require_2d(a, "add_row");
    const std::size_t B = a.shape()[0];
    const std::size_t n = a.shape()[1];
    if (row.size() != n) {
        throw ShapeError("add_row: row of " + std::to_string(row.size()) + " for " +
                         to_string(a.shape()));
    }
    Tensor out(a.shape());
    const auto x = a.data();
    const auto r = row.data();
    for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t j = 0; j < n; ++j) out.data[b * n + j] = x[b * n + j] + r[j];
    }
    return Value::from_op(std::move(out), {a, row}, [B, n](Node& self) {
        Node& na = parent(self, 0);
        Node& nr = parent(self, 1);
        if (na.requires_grad) {
            auto& g = na.ensure_grad();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
        }
        if (nr.requires_grad) {
            auto& g = nr.ensure_grad();
            for (std::size_t b = 0; b < B; ++b) {
                for (std::size_t j = 0; j < n; ++j) g[j] += self.grad[b * n + j];
            }
        }
    });
}

Value matmul(const Value& a, const Value& b) {
    require_2d(a, "matmul");
    require_2d(b, "matmul");
    const std::size_t M = a.shape()[0];
    const std::size_t K = a.shape()[1];
    const std::size_t N = b.shape()[1];
    if (b.shape()[0] != K) {
        throw ShapeError("matmul: " + to_string(a.shape()) + " · " + to_string(b.shape()));
    }
    Tensor out({M, N});
    const double* A = a.data().data();
    const double* Bm = b.data().data();
    double* C = out.data.data();
    for (std::size_t i = 0; i < M; ++i) {
        double* c = C + i * N;
        for (std::size_t p = 0; p < K; ++p) {
            const double av = A[i * K + p];
            if (av == 0.0) continue;
            const double* brow = Bm + p * N;
            for (std::size_t j = 0; j < N; ++j) c[j] += av * brow[j];
        }
    }
    return Value::from_op(std::move(out), {a, b}, [M, K, N](Node& self) {
        Node& na = parent(self, 0);
        Node& nb = parent(self, 1);
        const double* G = self.grad.data();
        if (na.requires_grad) {
            double* gA = na.ensure_grad().data();
            const double* Bm = nb.value.data.data();
            for (std::size_t i = 0; i < M; ++i) {
                const double* grow = G + i * N;
                for (std::size_t p = 0; p < K; ++p) {
                    const double* brow = Bm + p * N;
                    double acc = 0.0;
                    for (std::size_t j = 0; j < N; ++j) acc += grow[j] * brow[j];
                    gA[i * K + p] += acc;
                }
            }
        }
        if (nb.requires_grad) {
            double* gB = nb.ensure_grad().data();
            const double* A = na.value.data.data();
            for (std::size_t i = 0; i < M; ++i) {
                const double* grow = G + i * N;
                for (std::size_t p = 0; p < K; ++p) {
                    const double av = A[i * K + p];
                    if (av == 0.0) continue;
                    double* gbrow = gB + p * N;
                    for (std::size_t j = 0; j < N; ++j) gbrow[j] += av * grow[j];
                }
            }
        }
    });
}

Value relu(const Value& a) {
    if (BranchTrace::active()) {
        for (double x : a.data()) BranchTrace::record(x > 0.0 ? 1 : 2);
    }
    return unary(a, [](double x) { return x > 0.0 ? x : 0.0; }, [](Node& self) {
        Node& n = parent(self, 0);
        auto& g = n.ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (n.value.data[i] > 0.0) g[i] += self.grad[i];
        }
    });
}

Value sigmoid(const Value& a) {
    return unary(a,
                 [](double x) {
                     if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
                     const double e = std::exp(x);
                     return e / (1.0 + e);
                 },
                 [](Node& self) {
                     auto& g = parent(self, 0).ensure_grad();
                     for (std::size_t i = 0; i < g.size(); ++i) {
                         const double s = self.value.data[i];
                         g[i] += self.grad[i] * s * (1.0 - s);
                     }
                 });
}

Value tanh(const Value& a) {
    return unary(a, [](double x) { return std::tanh(x); }, [](Node& self) {
        auto& g = parent(self, 0).ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double t = self.value.data[i];
            g[i] += self.grad[i] * (1.0 - t * t);
        }
    });
}

Value clamp(const Value& a, double lo, double hi) {
    if (BranchTrace::active()) {
        for (double x : a.data()) BranchTrace::record(x < lo ? 3 : (x > hi ? 5 : 4));
    }
    return unary(a, [lo, hi](double x) { return std::clamp(x, lo, hi); }, [lo, hi](Node& self) {
        Node& n = parent(self, 0);
        auto& g = n.ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double x = n.value.data[i];
            if (x >= lo && x <= hi) g[i] += self.grad[i];
        }
    });
}

Value concat_cols(std::span<const Value> parts) {
    if (parts.empty()) throw ShapeError("concat_cols: no inputs");
    const std::size_t B = parts[0].shape().at(0);
    std::vector<std::size_t> widths;
    std::size_t total = 0;
    for (const Value& p : parts) {
        require_2d(p, "concat_cols");
        if (p.shape()[0] != B) throw ShapeError("concat_cols: row counts differ");
        widths.push_back(p.shape()[1]);
        total += p.shape()[1];
    }
    Tensor out({B, total});
    std::size_t off = 0;
    for (std::size_t k = 0; k < parts.size(); ++k) {
        const auto x = parts[k].data();
        const std::size_t w = widths[k];
        for (std::size_t b = 0; b < B; ++b) {
            std::copy_n(x.data() + b * w, w, out.data.data() + b * total + off);
        }
        off += w;
    }
    std::vector<Value> parents(parts.begin(), parts.end());
    return Value::from_op(std::move(out), std::move(parents), [B, total, widths](Node& self) {
        std::size_t off = 0;
        for (std::size_t k = 0; k < widths.size(); ++k) {
            Node& n = parent(self, k);
            const std::size_t w = widths[k];
            if (n.requires_grad) {
                auto& g = n.ensure_grad();
                for (std::size_t b = 0; b < B; ++b) {
                    for (std::size_t j = 0; j < w; ++j) g[b * w + j] += self.grad[b * total + off + j];
                }
            }
            off += w;
        }
    });
}

Value concat_cols(std::initializer_list<Value> parts) {
    return concat_cols(std::span<const Value>(parts.begin(), parts.size()));
}

Value slice_cols(const Value& a, std::size_t from, std::size_t len) {
    require_2d(a, "slice_cols");
    const std::size_t B = a.shape()[0];
    const std::size_t n = a.shape()[1];
    if (from + len > n) throw ShapeError("slice_cols: range exceeds " + to_string(a.shape()));
    Tensor out({B, len});
    const auto x = a.data();
    for (std::size_t b = 0; b < B; ++b) {
        std::copy_n(x.data() + b * n + from, len, out.data.data() + b * len);
    }
    return Value::from_op(std::move(out), {a}, [B, n, from, len](Node& self) {
        auto& g = parent(self, 0).ensure_grad();
        for (std::size_t b = 0; b < B; ++b) {
            for (std::size_t j = 0; j < len; ++j) g[b * n + from + j] += self.grad[b * len + j];
        }
    });
}

Value slice_rows(const Value& a, std::size_t from, std::size_t len) {
    require_2d(a, "slice_rows");
    const std::size_t n = a.shape()[1];
    if (from + len > a.shape()[0]) throw ShapeError("slice_rows: range exceeds " + to_string(a.shape()));
    Tensor out({len, n});
    std::copy_n(a.data().data() + from * n, len * n, out.data.data());
    return Value::from_op(std::move(out), {a}, [n, from](Node& self) {
        auto& g = parent(self, 0).ensure_grad();
        for (std::size_t i = 0; i < self.grad.size(); ++i) g[from * n + i] += self.grad[i];
    });
}

Value reshape(const Value& a, Shape shape) {
    if (numel(shape) != a.size()) {
        throw ShapeError("reshape: " + to_string(a.shape()) + " → " + to_string(shape));
    }
    Tensor out(std::move(shape), std::vector<double>(a.data().begin(), a.data().end()));
    return Value::from_op(std::move(out), {a}, [](Node& self) {
        auto& g = parent(self, 0).ensure_grad();
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    });
}

Value gather_rows(const Value& table, std::span<const int> index) {
    require_2d(table, "gather_rows");
    const std::size_t K = table.shape()[0];
    const std::size_t d = table.shape()[1];
    Tensor out({index.size(), d});
    for (std::size_t b = 0; b < index.size(); ++b) {
        if (index[b] < 0 || static_cast<std::size_t>(index[b]) >= K) {
            throw LookupError("gather_rows: index " + std::to_string(index[b]) +
                              " outside table of " + std::to_string(K) + " rows");
        }
        std::copy_n(table.data().data() + static_cast<std::size_t>(index[b]) * d, d,
                    out.data.data() + b * d);
    }
    std::vector<int> idx(index.begin(), index.end());
    return Value::from_op(std::move(out), {table}, [idx, d](Node& self) {
        auto& g = parent(self, 0).ensure_grad();
        for (std::size_t b = 0; b < idx.size(); ++b) {
            const std::size_t r = static_cast<std::size_t>(idx[b]);
            for (std::size_t j = 0; j < d; ++j) g[r * d + j] += self.grad[b * d + j];
        }
    });
}

Value conv1d(const Value& x, const Value& w, const Value& bias, std::size_t padding) {
    if (x.tensor().rank() != 3 || w.tensor().rank() != 3) {
        throw ShapeError("conv1d: expected x[B,Cin,L] and w[Cout,Cin,K], got " +
                         to_string(x.shape()) + " and " + to_string(w.shape()));
    }
    const std::size_t B = x.shape()[0];
    const std::size_t Cin = x.shape()[1];
    const std::size_t L = x.shape()[2];
    const std::size_t Cout = w.shape()[0];
    const std::size_t K = w.shape()[2];
    if (w.shape()[1] != Cin) throw ShapeError("conv1d: channel mismatch");
    if (bias.size() != Cout) throw ShapeError("conv1d: bias length mismatch");
    if (L + 2 * padding < K) throw ShapeError("conv1d: input shorter than kernel");
    const std::size_t Lout = L + 2 * padding - K + 1;

    Tensor out({B, Cout, Lout});
    const double* X = x.data().data();
    const double* W = w.data().data();
    const double* bv = bias.data().data();
    for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t o = 0; o < Cout; ++o) {
            double* y = out.data.data() + (b * Cout + o) * Lout;
            std::fill_n(y, Lout, bv[o]);
            for (std::size_t c = 0; c < Cin; ++c) {
                const double* xr = X + (b * Cin + c) * L;
                const double* wr = W + (o * Cin + c) * K;
                for (std::size_t k = 0; k < K; ++k) {
                    // output t reads input t + k − padding
                    const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(k) -
                                                 static_cast<std::ptrdiff_t>(padding);
                    const std::size_t t0 = shift < 0 ? static_cast<std::size_t>(-shift) : 0;
                    const std::size_t t1 = std::min<std::ptrdiff_t>(
                        static_cast<std::ptrdiff_t>(Lout), static_cast<std::ptrdiff_t>(L) - shift);
                    for (std::size_t t = t0; t < t1; ++t) {
                        y[t] += wr[k] * xr[static_cast<std::ptrdiff_t>(t) + shift];
                    }
                }
            }
        }
    }
    return Value::from_op(
        std::move(out), {x, w, bias}, [B, Cin, L, Cout, K, Lout, padding](Node& self) {
            Node& nx = parent(self, 0);
            Node& nw = parent(self, 1);
            Node& nb = parent(self, 2);
            const double* G = self.grad.data();
            const double* X = nx.value.data.data();
            const double* W = nw.value.data.data();
            double* gX = nx.requires_grad ? nx.ensure_grad().data() : nullptr;
            double* gW = nw.requires_grad ? nw.ensure_grad().data() : nullptr;
            double* gb = nb.requires_grad ? nb.ensure_grad().data() : nullptr;
            for (std::size_t b = 0; b < B; ++b) {
                for (std::size_t o = 0; o < Cout; ++o) {
                    const double* g = G + (b * Cout + o) * Lout;
                    if (gb) {
                        for (std::size_t t = 0; t < Lout; ++t) gb[o] += g[t];
                    }
                    for (std::size_t c = 0; c < Cin; ++c) {
                        const std::size_t xoff = (b * Cin + c) * L;
                        const std::size_t woff = (o * Cin + c) * K;
                        for (std::size_t k = 0; k < K; ++k) {
                            const std::ptrdiff_t shift = static_cast<std::ptrdiff_t>(k) -
                                                         static_cast<std::ptrdiff_t>(padding);
                            const std::size_t t0 = shift < 0 ? static_cast<std::size_t>(-shift) : 0;
                            const std::size_t t1 = std::min<std::ptrdiff_t>(
                                static_cast<std::ptrdiff_t>(Lout),
                                static_cast<std::ptrdiff_t>(L) - shift);
                            double acc = 0.0;
                            for (std::size_t t = t0; t < t1; ++t) {
                                const std::size_t xi = static_cast<std::size_t>(
                                    static_cast<std::ptrdiff_t>(t) + shift);
                                acc += g[t] * X[xoff + xi];
                                if (gX) gX[xoff + xi] += g[t] * W[woff + k];
                            }
                            if (gW) gW[woff + k] += acc;
                        }
                    }
                }
            }
        });
}

Value maxpool1d(const Value& x, std::size_t width) {
    if (x.tensor().rank() != 3) throw ShapeError("maxpool1d: expected x[B,C,L]");
    if (width == 0) throw ShapeError("maxpool1d: zero width");
    const std::size_t rows = x.shape()[0] * x.shape()[1];
    const std::size_t L = x.shape()[2];
    const std::size_t Lout = L / width;
    Tensor out({x.shape()[0], x.shape()[1], Lout});
    std::vector<std::size_t> argmax(rows * Lout);
    const double* X = x.data().data();
    const bool trace = BranchTrace::active();
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t t = 0; t < Lout; ++t) {
            std::size_t best = r * L + t * width;
            for (std::size_t k = 1; k < width; ++k) {
                const std::size_t i = r * L + t * width + k;
                if (X[i] > X[best]) best = i;
            }
            argmax[r * Lout + t] = best;
            out.data[r * Lout + t] = X[best];
            if (trace) BranchTrace::record(best - (r * L + t * width) + 7);
        }
    }
    return Value::from_op(std::move(out), {x}, [argmax](Node& self) {
        auto& g = parent(self, 0).ensure_grad();
        for (std::size_t i = 0; i < argmax.size(); ++i) g[argmax[i]] += self.grad[i];
    });
}

Value sum(const Value& a) {
    double s = 0.0;
    for (double v : a.data()) s += v;
    return Value::from_op(Tensor({1}, std::vector<double>{s}), {a}, [](Node& self) {
        auto& g = parent(self, 0).ensure_grad();
        for (double& v : g) v += self.grad[0];
    });
}

Value mean(const Value& a) {
    if (a.size() == 0) throw ShapeError("mean: empty tensor");
    return scale(sum(a), 1.0 / static_cast<double>(a.size()));
}

Value mse(const Value& a, const Value& b) { return mean(square(sub(a, b))); }

}  // namespace vbnet::ad
