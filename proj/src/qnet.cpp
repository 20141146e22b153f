#include "dqmnav/qnet.hpp"

#include "dqmnav/errors.hpp"
#include "dqmnav/rng.hpp"

namespace dqmnav {

QNetwork zero_network() { return QNetwork{}; }

QNetwork init_network(std::uint64_t seed) {
    Rng rng(seed);
    QNetwork net;
    for (int r = 0; r < kHiddenDim; ++r)
        for (int c = 0; c < kStateDim; ++c) net.w1(r, c) = 0.1 * rng.gaussian();
    for (int r = 0; r < kActionDim; ++r)
        for (int c = 0; c < kHiddenDim; ++c) net.w2(r, c) = 0.1 * rng.gaussian();
    return net;
}

Vec2 forward(const QNetwork& net, const Vec6& state) {
    const Vec10 hidden = (net.w1 * state + net.b1).cwiseMax(0.0);
    return net.w2 * hidden + net.b2;
}

std::pair<double, QNetwork> loss_and_gradients(const QNetwork& net,
                                               std::span<const Vec6> states,
                                               std::span<const int> actions,
                                               std::span<const double> targets) {
    if (states.empty()) throw UsageError("loss_and_gradients: empty batch");
    if (states.size() != actions.size() || states.size() != targets.size())
        throw UsageError("loss_and_gradients: batch arrays differ in length");

    QNetwork grads;
    double loss = 0.0;
    const double inv_b = 1.0 / static_cast<double>(states.size());
    for (std::size_t i = 0; i < states.size(); ++i) {
        const int a = actions[i];
        if (a < 0 || a >= kActionDim)
            throw UsageError("loss_and_gradients: action index out of range");

        const Vec6& s = states[i];
        const Vec10 pre = net.w1 * s + net.b1;
        const Vec10 hidden = pre.cwiseMax(0.0);
        const Vec2 q = net.w2 * hidden + net.b2;

        const double diff = q[a] - targets[i];
        loss += diff * diff * inv_b;

        const double d = 2.0 * diff * inv_b;
        grads.b2[a] += d;
        grads.w2.row(a) += d * hidden.transpose();

        // ReLU gates the hidden error; inactive units pass nothing back.
        const Vec10 mask = (pre.array() > 0.0).cast<double>();
        const Vec10 d_pre = (d * net.w2.row(a).transpose()).cwiseProduct(mask);
        grads.b1 += d_pre;
        grads.w1 += d_pre * s.transpose();
    }
    return {loss, grads};
}

void optimizer_step(OptimizerState& opt, QNetwork& net, const QNetwork& grads) {
    opt.step += 1;
    if (opt.kind == OptimizerKind::Sgd) {
        net.w1 -= opt.lr * grads.w1;
        net.b1 -= opt.lr * grads.b1;
        net.w2 -= opt.lr * grads.w2;
        net.b2 -= opt.lr * grads.b2;
        return;
    }
    const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.step));
    const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.step));
    const auto update = [&](auto& theta, auto& m, auto& v, const auto& g) {
        m = opt.beta1 * m + (1.0 - opt.beta1) * g;
        v = opt.beta2 * v + (1.0 - opt.beta2) * g.cwiseProduct(g);
        theta -= (opt.lr * (m / c1).array() / ((v / c2).array().sqrt() + opt.eps)).matrix();
    };
    update(net.w1, opt.m.w1, opt.v.w1, grads.w1);
    update(net.b1, opt.m.b1, opt.v.b1, grads.b1);
    update(net.w2, opt.m.w2, opt.v.w2, grads.w2);
    update(net.b2, opt.m.b2, opt.v.b2, grads.b2);
}

void copy_into(QNetwork& target, const QNetwork& source) { target = source; }

}  // namespace dqmnav
