#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "vbnet/ad/grad_check.hpp"
#include "vbnet/ad/layers.hpp"
#include "vbnet/ad/ops.hpp"
#include "vbnet/ad/optim.hpp"
#include "vbnet/errors.hpp"

using namespace vbnet;
using namespace vbnet::ad;

namespace {

Value random_param(Shape shape, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    Tensor t(std::move(shape));
    for (double& v : t.data) v = u(rng);
    return Value::parameter(std::move(t));
}

/// Scalar ⟨w, y⟩ with fixed random weights so every output entry matters.
Value project(const Value& y, std::uint64_t seed = 99) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Tensor w(y.shape());
    for (double& v : w.data) v = u(rng);
    return sum(mul(y, Value::constant(std::move(w))));
}

double check(const std::function<Value()>& f, const ParamList& params) {
    const GradCheckResult r = grad_check(f, params);
    EXPECT_GT(r.checked, 0u);
    return r.max_rel_error;
}

}  // namespace

TEST(Primitives, ForwardValues) {
    const Value x = Value::matrix(1, 3, {-1.0, 0.0, 2.0});
    EXPECT_DOUBLE_EQ(sigmoid(x).data()[1], 0.5);
    EXPECT_DOUBLE_EQ(relu(x).data()[0], 0.0);
    EXPECT_DOUBLE_EQ(relu(x).data()[2], 2.0);
    EXPECT_DOUBLE_EQ(clamp(x, -0.5, 1.0).data()[0], -0.5);
    EXPECT_DOUBLE_EQ(clamp(x, -0.5, 1.0).data()[2], 1.0);
    EXPECT_DOUBLE_EQ(mean(x).item(), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(mse(x, Value::matrix(1, 3, {0.0, 0.0, 0.0})).item(), 5.0 / 3.0);
    const Value m = matmul(Value::matrix(1, 2, {1.0, 2.0}), Value::matrix(2, 2, {1.0, 2.0, 3.0, 4.0}));
    EXPECT_DOUBLE_EQ(m.data()[0], 7.0);
    EXPECT_DOUBLE_EQ(m.data()[1], 10.0);
}

TEST(Primitives, SquareGradientAtThree) {
    Value x = Value::scalar(3.0, true);
    sum(square(x)).backward();
    EXPECT_DOUBLE_EQ(x.grad()[0], 6.0);
}

TEST(Primitives, SigmoidSlopeAtZero) {
    Value x = Value::scalar(0.0, true);
    sum(sigmoid(x)).backward();
    EXPECT_DOUBLE_EQ(x.grad()[0], 0.25);
}

TEST(Primitives, ReluAndClampSubgradients) {
    Value x = Value::parameter(Tensor({1, 5}, {-1.0, 0.5, 1.0, 1.5, 0.0}));
    sum(clamp(x, 0.0, 1.0)).backward();
    const std::vector<double> expected = {0.0, 1.0, 1.0, 0.0, 1.0};
    for (std::size_t i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(x.grad()[i], expected[i]) << i;

    Value y = Value::parameter(Tensor({1, 3}, {-2.0, 3.0, 0.1}));
    sum(relu(y)).backward();
    EXPECT_DOUBLE_EQ(y.grad()[0], 0.0);
    EXPECT_DOUBLE_EQ(y.grad()[1], 1.0);
    EXPECT_DOUBLE_EQ(y.grad()[2], 1.0);
}

TEST(Primitives, ConvAndPoolShapes) {
    Rng rng(1);
    Conv1d conv(1, 32, 3, 1, rng);
    const Value x = Value::constant(Tensor({5, 1, 24}, 0.3));
    const Value y = conv(x);
    EXPECT_EQ(y.shape(), (Shape{5, 32, 24}));
    EXPECT_EQ(conv.out_length(24), 24u);
    EXPECT_EQ(maxpool1d(y, 2).shape(), (Shape{5, 32, 12}));
}

TEST(Primitives, MaxPoolForwardAndRouting) {
    Value x = Value::parameter(Tensor({1, 1, 4}, {1.0, 3.0, 5.0, 2.0}));
    const Value y = maxpool1d(x, 2);
    EXPECT_DOUBLE_EQ(y.data()[0], 3.0);
    EXPECT_DOUBLE_EQ(y.data()[1], 5.0);
    sum(y).backward();
    EXPECT_EQ(std::vector<double>(x.grad().begin(), x.grad().end()),
              (std::vector<double>{0.0, 1.0, 1.0, 0.0}));
}

TEST(Primitives, ShapeErrors) {
    const Value a = Value::matrix(2, 2, {1, 2, 3, 4});
    const Value b = Value::matrix(2, 3, {1, 2, 3, 4, 5, 6});
    EXPECT_THROW(add(a, b), ShapeError);
    EXPECT_THROW(mul(a, b), ShapeError);
    EXPECT_THROW(matmul(b, a), ShapeError);
    EXPECT_THROW(slice_cols(a, 1, 2), ShapeError);
    EXPECT_THROW(reshape(a, {3}), ShapeError);
    EXPECT_THROW(a.item(), ShapeError);
    EXPECT_THROW(a.backward(), ShapeError);
    EXPECT_THROW(conv1d(a, a, Value::matrix(1, 1, {0.0}), 0), ShapeError);
    EXPECT_THROW(concat_cols(std::span<const Value>{}), ShapeError);
    const std::vector<int> idx = {0, 5};
    EXPECT_THROW(gather_rows(a, idx), LookupError);
}

TEST(GradCheck, ElementwisePrimitives) {
    Value a = random_param({3, 4}, 1);
    Value b = random_param({3, 4}, 2, 0.5, 2.0);
    const ParamList ps = {{"a", a}, {"b", b}};
    EXPECT_LT(check([&] { return project(add(a, b)); }, ps), 1e-6);
    EXPECT_LT(check([&] { return project(sub(a, b)); }, ps), 1e-6);
    EXPECT_LT(check([&] { return project(mul(a, b)); }, ps), 1e-6);
    EXPECT_LT(check([&] { return project(div(a, b)); }, ps), 1e-6);
    EXPECT_LT(check([&] { return project(scale(a, -2.5)); }, ps), 1e-6);
    EXPECT_LT(check([&] { return project(add_scalar(a, 0.7)); }, ps), 1e-6);
    EXPECT_LT(check([&] { return project(square(a)); }, ps), 1e-6);
    EXPECT_LT(check([&] { return project(sigmoid(a)); }, ps), 1e-6);
    EXPECT_LT(check([&] { return project(tanh(a)); }, ps), 1e-6);
    EXPECT_LT(check([&] { return project(relu(a)); }, ps), 1e-6);
    EXPECT_LT(check([&] { return project(clamp(a, -0.3, 0.4)); }, ps), 1e-6);
    EXPECT_LT(check([&] { return mean(a); }, ps), 1e-6);
    EXPECT_LT(check([&] { return mse(a, b); }, ps), 1e-6);
}

TEST(GradCheck, StructuralPrimitives) {
    Value a = random_param({3, 4}, 3);
    Value w = random_param({4, 2}, 4);
    Value row = random_param({1, 4}, 5);
    Value c = random_param({3, 2}, 6);
    const ParamList ps = {{"a", a}, {"w", w}, {"row", row}, {"c", c}};
    EXPECT_LT(check([&] { return project(matmul(a, w)); }, ps), 1e-6);
    EXPECT_LT(check([&] { return project(add_row(a, row)); }, ps), 1e-6);
    EXPECT_LT(check([&] { return project(concat_cols({a, c, a})); }, ps), 1e-6);
    EXPECT_LT(check([&] { return project(slice_cols(a, 1, 2)); }, ps), 1e-6);
    EXPECT_LT(check([&] { return project(slice_rows(a, 1, 2)); }, ps), 1e-6);
    EXPECT_LT(check([&] { return project(reshape(a, {2, 6})); }, ps), 1e-6);
    const std::vector<int> idx = {2, 0, 2};
    EXPECT_LT(check([&] { return project(gather_rows(a, idx)); }, ps), 1e-6);
}

TEST(GradCheck, ConvolutionAndPooling) {
    Value x = random_param({2, 3, 8}, 7);
    Value w = random_param({4, 3, 3}, 8);
    Value b = random_param({4, 1}, 9);
    const ParamList ps = {{"x", x}, {"w", w}, {"b", b}};
    EXPECT_LT(check([&] { return project(conv1d(x, w, reshape(b, {4}), 1)); }, ps), 1e-6);
    EXPECT_LT(check([&] { return project(conv1d(x, w, reshape(b, {4}), 0)); }, ps), 1e-6);
    EXPECT_LT(check([&] { return project(maxpool1d(conv1d(x, w, reshape(b, {4}), 1), 2)); }, ps),
              1e-6);
}

TEST(GradCheck, Layers) {
    Rng rng(11);
    Dense dense(5, 3, rng);
    Embedding emb(4, 3, rng);
    LstmCell cell(3, 4, rng);
    ParamList ps;
    dense.collect("dense", ps);
    emb.collect("emb", ps);
    cell.collect("lstm", ps);
    const Value x = Value::constant(Tensor({2, 5}, {0.1, -0.2, 0.3, 0.5, -0.4,
                                                    0.9, 0.0, -0.7, 0.2, 0.6}));
    const std::vector<int> idx = {1, 3};
    const double err = check(
        [&] {
            Value h = Value::constant(Tensor({2, 4}));
            Value c = Value::constant(Tensor({2, 4}));
            Value in = add(tanh(dense(x)), emb(idx));
            for (int t = 0; t < 3; ++t) std::tie(h, c) = cell(in, h, c);
            return project(h);
        },
        ps);
    EXPECT_LT(err, 1e-6);
}

TEST(GradCheck, ReportsWrongGradient) {
    Value a = random_param({1, 3}, 12);
    const ParamList ps = {{"a", a}};
    // forward is a², backward claims a
    auto broken = [&] {
        Tensor out(a.shape());
        for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = a.data()[i] * a.data()[i];
        Value y = Value::from_op(std::move(out), {a}, [](Node& self) {
            Node& p = *self.parents[0];
            auto& g = p.ensure_grad();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * p.value.data[i];
        });
        return sum(y);
    };
    EXPECT_GT(grad_check(broken, ps).max_rel_error, 0.1);
}

TEST(Backward, SharedSubgraphAccumulates) {
    // y = (x·x) + (x·x) through one shared node: dy/dx = 4x
    Value x = Value::scalar(1.5, true);
    const Value s = mul(x, x);
    const Value y = sum(add(s, s));
    y.backward();
    EXPECT_DOUBLE_EQ(x.grad()[0], 6.0);
}

TEST(Backward, ConstantsReceiveNoGradient) {
    Value p = Value::scalar(2.0, true);
    Value c = Value::scalar(5.0);
    sum(mul(p, c)).backward();
    EXPECT_DOUBLE_EQ(p.grad()[0], 5.0);
    EXPECT_DOUBLE_EQ(c.grad()[0], 0.0);
}

TEST(Adam, FirstStepMovesByLearningRate) {
    std::vector<double> w = {1.0, -2.0};
    const std::vector<double> g = {0.5, -3.0};
    AdamMoments st;
    adam_step(w, g, st, 0.1);
    EXPECT_NEAR(w[0], 0.9, 1e-7);
    EXPECT_NEAR(w[1], -1.9, 1e-7);
    EXPECT_EQ(st.t, 1u);
}

TEST(Adam, ConstantGradientGivesConstantSteps) {
    std::vector<double> w = {0.0};
    AdamMoments st;
    double prev = 0.0;
    for (int i = 0; i < 20; ++i) {
        adam_step(w, std::vector<double>{2.0}, st, 0.01);
        EXPECT_NEAR(prev - w[0], 0.01, 1e-8);
        prev = w[0];
    }
}

TEST(Adam, ZeroGradientOrZeroRateLeavesParameters) {
    std::vector<double> w = {1.0, 2.0};
    AdamMoments st;
    adam_step(w, std::vector<double>{0.0, 0.0}, st, 0.1);
    EXPECT_EQ(w, (std::vector<double>{1.0, 2.0}));
    adam_step(w, std::vector<double>{1.0, -1.0}, st, 0.0);
    EXPECT_EQ(w, (std::vector<double>{1.0, 2.0}));
}

TEST(Adam, NonFiniteGradientRejectedWithoutSideEffects) {
    std::vector<double> w = {1.0, 2.0};
    AdamMoments st;
    const std::vector<double> g = {0.1, std::numeric_limits<double>::infinity()};
    try {
        adam_step(w, g, st, 0.1, {}, "enc.W");
        FAIL();
    } catch (const TrainingError& e) {
        EXPECT_NE(std::string(e.what()).find("enc.W"), std::string::npos);
    }
    EXPECT_EQ(w, (std::vector<double>{1.0, 2.0}));
    EXPECT_EQ(st.t, 0u);
}

TEST(Adam, LearningRateScalePerParameter) {
    Value a = Value::scalar(0.0, true);
    Value b = Value::scalar(0.0, true);
    Adam opt({{"a", a, 1.0}, {"b", b, 10.0}}, 0.01);
    opt.zero_grad();
    sum(add(a, b)).backward();
    opt.step();
    EXPECT_NEAR(a.data()[0], -0.01, 1e-7);
    EXPECT_NEAR(b.data()[0], -0.1, 1e-6);
}

TEST(Adam, MinimisesQuadratic) {
    Value x = Value::parameter(Tensor({1, 2}, {3.0, -4.0}));
    Adam opt({{"x", x}}, 0.1);
    for (int i = 0; i < 500; ++i) {
        opt.zero_grad();
        sum(square(x)).backward();
        opt.step();
    }
    EXPECT_LT(std::abs(x.data()[0]), 1e-2);
    EXPECT_LT(std::abs(x.data()[1]), 1e-2);
}

TEST(Parameters, JsonRoundTripAndMismatch) {
    Rng rng(5);
    Dense d1(3, 2, rng), d2(3, 2, rng), d3(2, 2, rng);
    ParamList p1, p2, p3;
    d1.collect("fc", p1);
    d2.collect("fc", p2);
    d3.collect("fc", p3);
    params_from_json(params_to_json(p1), p2);
    for (std::size_t i = 0; i < p1.size(); ++i) {
        EXPECT_EQ(std::vector<double>(p1[i].value.data().begin(), p1[i].value.data().end()),
                  std::vector<double>(p2[i].value.data().begin(), p2[i].value.data().end()));
    }
    EXPECT_THROW(params_from_json(params_to_json(p1), p3), ShapeError);
    ParamList renamed;
    d2.collect("other", renamed);
    EXPECT_THROW(params_from_json(params_to_json(p1), renamed), LookupError);
}

TEST(Parameters, SnapshotRestore) {
    Rng rng(6);
    Dense d(2, 2, rng);
    ParamList ps;
    d.collect("fc", ps);
    const auto snap = snapshot(ps);
    ps[0].value.mutable_data()[0] += 1.0;
    restore(ps, snap);
    EXPECT_EQ(snapshot(ps), snap);
    EXPECT_EQ(parameter_count(ps), 6u);
}

TEST(Layers, SeededInitialisationIsDeterministic) {
    Rng r1(42), r2(42);
    Dense a(4, 3, r1), b(4, 3, r2);
    EXPECT_TRUE(std::equal(a.weight().data().begin(), a.weight().data().end(),
                           b.weight().data().begin()));
    Rng r3(3);
    Embedding e(1000, 8, r3);
    double sq = 0.0;
    for (double v : e.table().data()) sq += v * v;
    EXPECT_NEAR(std::sqrt(sq / 8000.0), kEmbeddingInitStd, 0.01);
    const double bound = 1.0 / std::sqrt(4.0);
    for (double v : a.weight().data()) EXPECT_LE(std::abs(v), bound);
}

TEST(BranchTrace, DigestTracksBranches) {
    const Value x = Value::matrix(1, 2, {-1.0, 2.0});
    const Value y = Value::matrix(1, 2, {1.0, 2.0});
    std::uint64_t dx = 0, dx2 = 0, dy = 0;
    {
        BranchTrace t;
        relu(x);
        dx = t.digest();
    }
    {
        BranchTrace t;
        relu(x);
        dx2 = t.digest();
    }
    {
        BranchTrace t;
        relu(y);
        dy = t.digest();
    }
    EXPECT_EQ(dx, dx2);
    EXPECT_NE(dx, dy);
    EXPECT_FALSE(BranchTrace::active());
}
