#include <gtest/gtest.h>

#include <cmath>

#include "snf/lstm.hpp"
#include "snf/param_set.hpp"
#include "snf/rng.hpp"

using namespace snf;

namespace {

LstmParams make_spec(std::size_t input, std::size_t hidden) {
    LstmParams spec;
    spec.input_size = input;
    spec.hidden_size = hidden;
    return spec;
}

ParamSet zero_params(const LstmParams& spec) {
    ParamSet params;
    for (char g : kLstmGates) {
        params.add(spec.wx(g), Tensor(spec.hidden_size, spec.input_size));
        params.add(spec.wh(g), Tensor(spec.hidden_size, spec.hidden_size));
        params.add(spec.bias(g), Tensor(spec.hidden_size, 1));
    }
    return params;
}

ParamSet random_params(const LstmParams& spec, std::uint64_t seed) {
    ParamSet params;
    Rng rng(seed);
    register_lstm_params(params, spec, rng);
    return params;
}

Tensor scalar_input(double v) {
    Tensor x = Tensor::vec(1);
    x.data[0] = v;
    return x;
}

std::vector<Tensor> random_inputs(std::size_t len, std::size_t input_size, Rng& rng) {
    std::vector<Tensor> xs;
    for (std::size_t t = 0; t < len; ++t) {
        Tensor x = Tensor::vec(input_size);
        for (double& v : x.data) v = rng.uniform(-1.0, 1.0);
        xs.push_back(std::move(x));
    }
    return xs;
}

// Loss = sum_t dot(probe_t, h_t); its analytic output_grads are the probes.
double probed_sequence_loss(const ParamSet& params, const LstmParams& spec,
                            const std::vector<Tensor>& inputs,
                            const std::vector<Tensor>& probes) {
    const SequenceResult r =
        sequence_forward(params, spec, inputs, zero_state(spec.hidden_size));
    double loss = 0.0;
    for (std::size_t t = 0; t < r.outputs.size(); ++t) {
        for (std::size_t j = 0; j < spec.hidden_size; ++j) {
            loss += probes[t].data[j] * r.outputs[t].data[j];
        }
    }
    return loss;
}

double bptt_vs_finite_differences(std::size_t input_size, std::size_t hidden,
                                  std::size_t len, std::uint64_t seed) {
    const LstmParams spec = make_spec(input_size, hidden);
    ParamSet params = random_params(spec, seed);
    Rng rng(seed ^ 0x9e3779b97f4a7c15ull);
    const std::vector<Tensor> inputs = random_inputs(len, input_size, rng);
    const std::vector<Tensor> probes = random_inputs(len, hidden, rng);

    const SequenceResult fwd =
        sequence_forward(params, spec, inputs, zero_state(hidden));
    bptt_backward(params, spec, fwd.cache, probes);
    return finite_difference_check(
        [&](ParamSet& ps) { return probed_sequence_loss(ps, spec, inputs, probes); }, params,
        1e-5);
}

}  // namespace

TEST(CellForward, ZeroNetwork) {
    const LstmParams spec = make_spec(1, 3);
    const ParamSet params = zero_params(spec);
    const auto [state, cache] = cell_forward(params, spec, scalar_input(0.7), zero_state(3));
    for (std::size_t j = 0; j < 3; ++j) {
        EXPECT_DOUBLE_EQ(cache.f.data[j], 0.5);
        EXPECT_DOUBLE_EQ(cache.i.data[j], 0.5);
        EXPECT_DOUBLE_EQ(cache.o.data[j], 0.5);
        EXPECT_DOUBLE_EQ(cache.g.data[j], 0.0);
        EXPECT_DOUBLE_EQ(state.c.data[j], 0.0);
        EXPECT_DOUBLE_EQ(state.h.data[j], 0.0);
    }
}

TEST(CellForward, ScalarHandEvaluation) {
    // All weights 1, biases 0, x = 1, zero previous state.
    const LstmParams spec = make_spec(1, 1);
    ParamSet params = zero_params(spec);
    for (char g : kLstmGates) {
        params.value(spec.wx(g)).data[0] = 1.0;
        params.value(spec.wh(g)).data[0] = 1.0;
    }
    const auto [state, cache] = cell_forward(params, spec, scalar_input(1.0), zero_state(1));
    EXPECT_NEAR(cache.f.data[0], 0.7310586, 1e-6);
    EXPECT_NEAR(cache.i.data[0], 0.7310586, 1e-6);
    EXPECT_NEAR(cache.o.data[0], 0.7310586, 1e-6);
    EXPECT_NEAR(cache.g.data[0], 0.7615942, 1e-6);
    // c = sigma(1) * tanh(1), h = sigma(1) * tanh(c)
    EXPECT_NEAR(state.c.data[0], 0.5567699411459397, 1e-9);
    EXPECT_NEAR(state.h.data[0], 0.36960635293570576, 1e-9);
}

TEST(CellForward, SaturatedForgetPreservesCellState) {
    const LstmParams spec = make_spec(1, 1);
    ParamSet params = zero_params(spec);
    params.value(spec.bias('f')).data[0] = 50.0;   // forget gate -> 1
    params.value(spec.bias('i')).data[0] = -50.0;  // input gate -> 0
    LstmState prev = zero_state(1);
    prev.c.data[0] = 5.0;
    const auto [state, cache] = cell_forward(params, spec, scalar_input(0.3), prev);
    EXPECT_NEAR(state.c.data[0], 5.0, 1e-6);
}

TEST(CellForward, ShapeMismatch) {
    const LstmParams spec = make_spec(1, 3);
    const ParamSet params = zero_params(spec);
    EXPECT_THROW(cell_forward(params, spec, Tensor::vec(2), zero_state(3)), ShapeError);
    EXPECT_THROW(cell_forward(params, spec, scalar_input(0.0), zero_state(2)), ShapeError);
}

TEST(SequenceForward, LengthOneEqualsCellForward) {
    const LstmParams spec = make_spec(2, 4);
    const ParamSet params = random_params(spec, 3);
    Rng rng(5);
    const std::vector<Tensor> inputs = random_inputs(1, 2, rng);
    const SequenceResult seq = sequence_forward(params, spec, inputs, zero_state(4));
    const auto [state, cache] = cell_forward(params, spec, inputs[0], zero_state(4));
    EXPECT_EQ(seq.final_state.h.data, state.h.data);
    EXPECT_EQ(seq.final_state.c.data, state.c.data);
    ASSERT_EQ(seq.cache.size(), 1u);
}

TEST(SequenceForward, ZeroNetworkAllOutputsZero) {
    const LstmParams spec = make_spec(1, 3);
    const ParamSet params = zero_params(spec);
    Rng rng(5);
    const SequenceResult seq =
        sequence_forward(params, spec, random_inputs(8, 1, rng), zero_state(3));
    for (const Tensor& h : seq.outputs) {
        for (double v : h.data) EXPECT_DOUBLE_EQ(v, 0.0);
    }
}

TEST(SequenceForward, StateCarryOverComposes) {
    const LstmParams spec = make_spec(1, 4);
    const ParamSet params = random_params(spec, 17);
    Rng rng(23);
    const std::vector<Tensor> inputs = random_inputs(10, 1, rng);
    const SequenceResult whole = sequence_forward(params, spec, inputs, zero_state(4));
    const std::vector<Tensor> first(inputs.begin(), inputs.begin() + 4);
    const std::vector<Tensor> second(inputs.begin() + 4, inputs.end());
    const SequenceResult part1 = sequence_forward(params, spec, first, zero_state(4));
    const SequenceResult part2 = sequence_forward(params, spec, second, part1.final_state);
    for (std::size_t j = 0; j < 4; ++j) {
        EXPECT_NEAR(part2.final_state.h.data[j], whole.final_state.h.data[j], 1e-12);
        EXPECT_NEAR(part2.final_state.c.data[j], whole.final_state.c.data[j], 1e-12);
    }
}

TEST(SequenceForward, EmptyInputRejected) {
    const LstmParams spec = make_spec(1, 2);
    const ParamSet params = zero_params(spec);
    EXPECT_THROW(sequence_forward(params, spec, {}, zero_state(2)), ArgumentError);
}

TEST(SequenceForward, GateRangesAndHiddenBound) {
    const LstmParams spec = make_spec(1, 6);
    const ParamSet params = random_params(spec, 99);
    Rng rng(100);
    const SequenceResult seq =
        sequence_forward(params, spec, random_inputs(30, 1, rng), zero_state(6));
    for (const LstmStepCache& s : seq.cache) {
        for (std::size_t j = 0; j < 6; ++j) {
            EXPECT_GT(s.f.data[j], 0.0);
            EXPECT_LT(s.f.data[j], 1.0);
            EXPECT_GT(s.i.data[j], 0.0);
            EXPECT_LT(s.i.data[j], 1.0);
            EXPECT_GT(s.o.data[j], 0.0);
            EXPECT_LT(s.o.data[j], 1.0);
            EXPECT_GT(s.g.data[j], -1.0);
            EXPECT_LT(s.g.data[j], 1.0);
        }
    }
    for (const Tensor& h : seq.outputs) {
        for (double v : h.data) EXPECT_LT(std::abs(v), 1.0);
    }
}

TEST(SequenceForward, HugeInputsStayFinite) {
    const LstmParams spec = make_spec(1, 4);
    const ParamSet params = random_params(spec, 5);
    std::vector<Tensor> inputs;
    for (int t = 0; t < 10; ++t) inputs.push_back(scalar_input(t % 2 == 0 ? 1e3 : -1e3));
    const SequenceResult seq = sequence_forward(params, spec, inputs, zero_state(4));
    for (double v : seq.final_state.c.data) EXPECT_TRUE(std::isfinite(v));
}

TEST(SequenceForward, DeterministicBitwise) {
    const LstmParams spec = make_spec(1, 5);
    const ParamSet params = random_params(spec, 77);
    Rng rng(78);
    const std::vector<Tensor> inputs = random_inputs(20, 1, rng);
    const SequenceResult a = sequence_forward(params, spec, inputs, zero_state(5));
    const SequenceResult b = sequence_forward(params, spec, inputs, zero_state(5));
    EXPECT_EQ(a.final_state.h.data, b.final_state.h.data);
    EXPECT_EQ(a.final_state.c.data, b.final_state.c.data);
}

TEST(BpttBackward, ZeroOutputGradsGiveZeroParameterGrads) {
    const LstmParams spec = make_spec(1, 3);
    ParamSet params = random_params(spec, 13);
    Rng rng(14);
    const std::vector<Tensor> inputs = random_inputs(6, 1, rng);
    const SequenceResult fwd = sequence_forward(params, spec, inputs, zero_state(3));
    std::vector<Tensor> zeros(6, Tensor::vec(3));
    bptt_backward(params, spec, fwd.cache, zeros);
    for (const std::string& name : params.names()) {
        for (double g : params.param(name).grad.data) EXPECT_DOUBLE_EQ(g, 0.0);
    }
}

TEST(BpttBackward, ScalarTwoStepMatchesFiniteDifferences) {
    EXPECT_LT(bptt_vs_finite_differences(1, 1, 2, 42), 1e-6);
}

TEST(BpttBackward, FullWindowLengthMatchesFiniteDifferences) {
    EXPECT_LT(bptt_vs_finite_differences(1, 4, 50, 7), 1e-5);
}

TEST(BpttBackward, RandomizedConfigurations) {
    Rng rng(2024);
    for (int trial = 0; trial < 15; ++trial) {
        const std::size_t hidden = 1 + static_cast<std::size_t>(rng.uniform() * 8);
        const std::size_t input = 1 + static_cast<std::size_t>(rng.uniform() * 3);
        const std::size_t len = 1 + static_cast<std::size_t>(rng.uniform() * 12);
        EXPECT_LT(bptt_vs_finite_differences(input, hidden, len, rng.next_u64()), 1e-5)
            << "hidden=" << hidden << " input=" << input << " len=" << len;
    }
}

TEST(BpttBackward, LengthMismatchRejected) {
    const LstmParams spec = make_spec(1, 2);
    ParamSet params = random_params(spec, 1);
    Rng rng(2);
    const SequenceResult fwd =
        sequence_forward(params, spec, random_inputs(4, 1, rng), zero_state(2));
    std::vector<Tensor> grads(3, Tensor::vec(2));
    EXPECT_THROW(bptt_backward(params, spec, fwd.cache, grads), ArgumentError);
}

TEST(BpttBackward, AccumulatesAcrossCalls) {
    const LstmParams spec = make_spec(1, 2);
    ParamSet params = random_params(spec, 4);
    Rng rng(6);
    const std::vector<Tensor> inputs = random_inputs(3, 1, rng);
    const std::vector<Tensor> probes = random_inputs(3, 2, rng);
    const SequenceResult fwd = sequence_forward(params, spec, inputs, zero_state(2));
    bptt_backward(params, spec, fwd.cache, probes);
    const std::vector<double> once = params.grad(spec.wh('f')).data;
    bptt_backward(params, spec, fwd.cache, probes);
    for (std::size_t i = 0; i < once.size(); ++i) {
        EXPECT_NEAR(params.grad(spec.wh('f')).data[i], 2.0 * once[i],
                    1e-12 + std::abs(once[i]) * 1e-12);
    }
}

TEST(LstmParams, CoordinateCountClosedForm) {
    const LstmParams spec = make_spec(3, 8);
    ParamSet params = random_params(spec, 1);
    EXPECT_EQ(params.total_coordinates(), spec.coordinate_count());
    EXPECT_EQ(spec.coordinate_count(), 4u * (8 * 3 + 8 * 8 + 8));
}
