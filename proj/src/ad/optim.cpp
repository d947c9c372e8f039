#include "vbnet/ad/optim.hpp"

#include <cmath>
#include <set>

#include "vbnet/errors.hpp"

namespace vbnet::ad {

void adam_step(std::span<double> params, std::span<const double> grads, AdamMoments& st,
               double lr, const AdamHyper& h, std::string_view name) {
    if (grads.size() != params.size()) throw ShapeError("adam_step: gradient size mismatch");
    if (st.m.empty()) {
        st.m.assign(params.size(), 0.0);
        st.v.assign(params.size(), 0.0);
    }
    if (st.m.size() != params.size()) throw ShapeError("adam_step: state size mismatch");
    for (double g : grads) {
        if (!std::isfinite(g)) {
            throw TrainingError("non-finite gradient in parameter '" + std::string(name) + "'");
        }
    }
    ++st.t;
    const double c1 = 1.0 - std::pow(h.beta1, static_cast<double>(st.t));
    const double c2 = 1.0 - std::pow(h.beta2, static_cast<double>(st.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        st.m[i] = h.beta1 * st.m[i] + (1.0 - h.beta1) * grads[i];
        st.v[i] = h.beta2 * st.v[i] + (1.0 - h.beta2) * grads[i] * grads[i];
        const double m_hat = st.m[i] / c1;
        const double v_hat = st.v[i] / c2;
        params[i] -= lr * m_hat / (std::sqrt(v_hat) + h.eps);
    }
}

Adam::Adam(ParamList params, double lr, AdamHyper hyper)
    : params_(std::move(params)), state_(params_.size()), lr_(lr), hyper_(hyper) {}

void Adam::zero_grad() {
    for (auto& p : params_) p.value.zero_grad();
}

void Adam::step() {
    for (std::size_t i = 0; i < params_.size(); ++i) {
        adam_step(params_[i].value.mutable_data(), params_[i].value.grad(), state_[i],
                  lr_ * params_[i].lr_scale, hyper_, params_[i].name);
    }
}

std::vector<std::vector<double>> snapshot(const ParamList& params) {
    std::vector<std::vector<double>> out;
    out.reserve(params.size());
    for (const auto& p : params) out.emplace_back(p.value.data().begin(), p.value.data().end());
    return out;
}

void restore(ParamList& params, const std::vector<std::vector<double>>& snap) {
    if (snap.size() != params.size()) throw ShapeError("restore: snapshot size mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto dst = params[i].value.mutable_data();
        if (dst.size() != snap[i].size()) throw ShapeError("restore: " + params[i].name);
        std::copy(snap[i].begin(), snap[i].end(), dst.begin());
    }
}

nlohmann::json params_to_json(const ParamList& params) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& p : params) {
        j[p.name] = {{"shape", p.value.shape()},
                     {"values", std::vector<double>(p.value.data().begin(), p.value.data().end())}};
    }
    return j;
}

void params_from_json(const nlohmann::json& j, ParamList& params) {
    std::set<std::string> expected;
    for (auto& p : params) {
        expected.insert(p.name);
        auto it = j.find(p.name);
        if (it == j.end()) throw LookupError("checkpoint: missing parameter '" + p.name + "'");
        const auto shape = it->at("shape").get<Shape>();
        if (shape != p.value.shape()) {
            throw ShapeError("checkpoint: parameter '" + p.name + "' has shape " + to_string(shape) +
                             ", model expects " + to_string(p.value.shape()));
        }
        const auto values = it->at("values").get<std::vector<double>>();
        if (values.size() != p.value.size()) throw ShapeError("checkpoint: '" + p.name + "' size");
        std::copy(values.begin(), values.end(), p.value.mutable_data().begin());
    }
    for (const auto& [k, v] : j.items()) {
        if (!expected.count(k)) throw LookupError("checkpoint: unexpected parameter '" + k + "'");
    }
}

}  // namespace vbnet::ad
