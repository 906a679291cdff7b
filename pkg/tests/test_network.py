import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ridgepoly.errors import GrowthExhaustedError
from ridgepoly.network import (FeedbackMode, PiSigmaBlock, RidgePolyNet,
                               SigmaUnit, add_block, assemble_inputs,
                               dumps_model, forward, loads_model, new_network,
                               sigmoid)


def unit(weights, bias=0.0):
    return SigmaUnit(weights=np.asarray(weights, dtype=float), bias=bias)


def net_of(blocks, mode=FeedbackMode.NONE, m=None, frozen=0):
    m = m if m is not None else blocks[0].units[0].weights.size - mode.n_feedback
    return RidgePolyNet(mode=mode, m_external=m, blocks=blocks, frozen_count=frozen)


class TestSigmoid:
    def test_zero_is_half(self):
        assert sigmoid(0.0) == 0.5

    def test_symmetry_identity(self):
        assert sigmoid(1.3) + sigmoid(-1.3) == pytest.approx(1.0, abs=1e-15)

    def test_scalar_oracle(self):
        # independent scalar evaluation of 1/(1+e^-0.6)
        expected = 1.0 / (1.0 + math.exp(-0.6))
        assert sigmoid(0.6) == pytest.approx(expected, abs=1e-15)
        assert sigmoid(0.6) == pytest.approx(0.6456563062257954, abs=1e-15)

    def test_monotone(self):
        xs = np.linspace(-20, 20, 101)
        ys = [sigmoid(x) for x in xs]
        assert all(a < b for a, b in zip(ys, ys[1:]))

    def test_saturates_without_error(self):
        assert sigmoid(800.0) == 1.0
        assert sigmoid(-800.0) == 0.0


class TestAssembleInputs:
    def test_no_feedback(self):
        z = assemble_inputs([1.0, 2.0, 3.0, 4.0], 9.0, 9.0, FeedbackMode.NONE)
        assert z.tolist() == [1.0, 2.0, 3.0, 4.0]

    def test_error_output_layout(self):
        z = assemble_inputs([1.0, 2.0, 3.0, 4.0], 0.25, 0.75,
                            FeedbackMode.ERROR_OUTPUT)
        assert z.tolist() == [1.0, 2.0, 3.0, 4.0, 0.25, 0.75]

    def test_single_error_feedback_appended(self):
        z = assemble_inputs([1.0], 0.5, 9.0, FeedbackMode.ERROR)
        assert z.tolist() == [1.0, 0.5]

    def test_single_output_feedback_appended(self):
        z = assemble_inputs([1.0], 9.0, 0.75, FeedbackMode.OUTPUT)
        assert z.tolist() == [1.0, 0.75]

    def test_rejects_non_vector(self):
        with pytest.raises(ValueError):
            assemble_inputs([[1.0, 2.0]], 0.5, 0.5, FeedbackMode.NONE)


class TestForward:
    def test_zero_network(self):
        net = net_of([PiSigmaBlock(1, [unit([0.0, 0.0])]),
                      PiSigmaBlock(2, [unit([0.0, 0.0]), unit([0.0, 0.0])])])
        trace = forward(net, [0.7, -1.3])
        assert all(np.all(h == 0.0) for h in trace.h)
        assert np.all(trace.p == 0.0)
        assert trace.y == 0.5

    def test_single_unit_scalar_oracle(self):
        net = net_of([PiSigmaBlock(1, [unit([0.5], bias=0.1)])])
        trace = forward(net, [1.0])
        assert trace.h[0][0] == 0.6
        assert trace.p[0] == 0.6
        assert trace.y == pytest.approx(1.0 / (1.0 + math.exp(-0.6)), abs=1e-15)

    def test_order_two_product_oracle(self):
        # first block zeroed out so only the order-2 block contributes
        net = net_of([PiSigmaBlock(1, [unit([0.0])]),
                      PiSigmaBlock(2, [unit([0.2]), unit([-0.3])])])
        trace = forward(net, [1.0])
        assert trace.h[1].tolist() == [0.2, -0.3]
        expected_p = 0.2 * -0.3
        assert trace.p[1] == expected_p
        assert trace.y == pytest.approx(1.0 / (1.0 + math.exp(-expected_p)), abs=1e-15)

    def test_dimension_mismatch(self):
        net = net_of([PiSigmaBlock(1, [unit([0.5, 0.5])])])
        with pytest.raises(ValueError):
            forward(net, [1.0])

    def test_deterministic(self):
        rng = np.random.default_rng(3)
        net = new_network(FeedbackMode.ERROR_OUTPUT, 3, rng=rng)
        add_block(net, rng=rng)
        z = rng.uniform(-1, 1, net.n_inputs)
        t1 = forward(net, z)
        t2 = forward(net, z)
        assert t1.y == t2.y
        assert t1.p.tobytes() == t2.p.tobytes()
        assert all(a.tobytes() == b.tobytes() for a, b in zip(t1.h, t2.h))

    def test_zero_feedback_weights_match_plain_mode(self):
        rng = np.random.default_rng(11)
        w = rng.uniform(-0.5, 0.5, 4)
        b = float(rng.uniform(-0.5, 0.5))
        plain = net_of([PiSigmaBlock(1, [unit(w, b)])], mode=FeedbackMode.NONE, m=4)
        w_fb = np.concatenate([w, [0.0, 0.0]])
        fb = net_of([PiSigmaBlock(1, [unit(w_fb, b)])],
                    mode=FeedbackMode.ERROR_OUTPUT, m=4)
        x = rng.uniform(0, 1, 4)
        y_plain = forward(plain, x).y
        y_fb = forward(fb, assemble_inputs(x, 0.77, 0.33, fb.mode)).y
        assert y_plain == y_fb

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_output_strictly_inside_unit_interval(self, seed):
        rng = np.random.default_rng(seed)
        net = new_network(FeedbackMode.ERROR_OUTPUT, 3, rng=rng)
        add_block(net, rng=rng)
        z = rng.uniform(-2, 2, net.n_inputs)
        y = forward(net, z).y
        assert 0.0 < y < 1.0


class TestNetValidation:
    def test_block_orders_must_be_consecutive(self):
        with pytest.raises(ValueError):
            net_of([PiSigmaBlock(2, [unit([0.1]), unit([0.2])])])

    def test_unit_count_must_match_order(self):
        with pytest.raises(ValueError):
            PiSigmaBlock(2, [unit([0.1])])

    def test_frozen_count_bounds(self):
        blocks = [PiSigmaBlock(1, [unit([0.1])])]
        with pytest.raises(ValueError):
            net_of(blocks, frozen=1)


class TestAddBlock:
    def test_grows_to_next_order(self):
        net = new_network(FeedbackMode.NONE, 2, rng=0)
        add_block(net, rng=1)
        assert net.k == 2
        assert net.blocks[1].order == 2
        assert len(net.blocks[1].units) == 2
        assert net.frozen_count == 1

    def test_exhausted_at_max(self):
        rng = np.random.default_rng(0)
        net = new_network(FeedbackMode.NONE, 2, rng=rng)
        for _ in range(4):
            add_block(net, rng=rng)
        assert net.k == 5
        with pytest.raises(GrowthExhaustedError):
            add_block(net, rng=rng)

    @pytest.mark.parametrize("seed", [0, 1, 17, 12345])
    def test_new_weights_in_range_old_untouched(self, seed):
        rng = np.random.default_rng(seed)
        net = new_network(FeedbackMode.ERROR_OUTPUT, 4, rng=rng)
        before = [(u.weights.copy(), u.bias) for b in net.blocks for u in b.units]
        add_block(net, init_range=(-0.5, 0.5), rng=rng)
        after = [(u.weights, u.bias) for b in net.blocks[:-1] for u in b.units]
        for (w0, b0), (w1, b1) in zip(before, after):
            assert w0.tobytes() == w1.tobytes()
            assert b0 == b1
        for u in net.blocks[-1].units:
            assert np.all(u.weights >= -0.5) and np.all(u.weights <= 0.5)
            assert -0.5 <= u.bias <= 0.5

    def test_orders_stay_consecutive_after_growth(self):
        rng = np.random.default_rng(2)
        net = new_network(FeedbackMode.ERROR, 3, rng=rng)
        for _ in range(3):
            add_block(net, rng=rng)
        assert [b.order for b in net.blocks] == [1, 2, 3, 4]


class TestSerialization:
    def test_round_trip_exact(self):
        rng = np.random.default_rng(5)
        net = new_network(FeedbackMode.ERROR_OUTPUT, 4, rng=rng)
        add_block(net, rng=rng)
        add_block(net, rng=rng)
        text = dumps_model(net)
        back = loads_model(text)
        assert back.mode is net.mode
        assert back.m_external == net.m_external
        assert back.frozen_count == net.frozen_count
        for b0, b1 in zip(net.blocks, back.blocks):
            for u0, u1 in zip(b0.units, b1.units):
                assert u0.weights.tobytes() == u1.weights.tobytes()
                assert u0.bias == u1.bias

    def test_rejects_bad_header(self):
        with pytest.raises(ValueError):
            loads_model("something-else v9\n")

    def test_rejects_missing_unit(self):
        net = new_network(FeedbackMode.NONE, 2, rng=0)
        add_block(net, rng=0)
        lines = dumps_model(net).splitlines()
        with pytest.raises(ValueError):
            loads_model("\n".join(lines[:-1]) + "\n")
