import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vpbgk.control import (
    ControlField,
    StatOperator,
    cellwise_feedback_appendix,
    compute_control,
    interpolate_cellwise,
    interpolate_nearest_center,
    pointwise_feedback_discrete,
    pointwise_feedback_limit,
    reference_positions,
    reference_x,
    select_worst_case_node,
)
from vpbgk.domain import ControlParams

ZERO = dict(alpha_x=0.0, beta_x=0.0, alpha_v=0.0, beta_v=0.0)


def single(kind="expectation"):
    return StatOperator(kind, np.array([1.0]), 0)


def test_worst_case_selection():
    assert select_worst_case_node([0.2, 0.5, 0.3]) == 1
    assert select_worst_case_node([0.4, 0.4, 0.4]) == 0
    assert select_worst_case_node([7.0]) == 0
    with pytest.raises(ValueError):
        select_worst_case_node([])


def test_operator_reductions():
    vals = np.array([[1.0, 10.0], [3.0, 30.0]])
    e = StatOperator("expectation", np.array([0.5, 0.5]))
    np.testing.assert_allclose(e.apply(vals), [2.0, 20.0])
    w = StatOperator("worst-case", np.array([0.5, 0.5]), z0=1)
    np.testing.assert_array_equal(w.apply(vals), [3.0, 30.0])
    with pytest.raises(ValueError):
        StatOperator("worst-case", np.array([1.0]))


def test_limit_hand_value():
    p = ControlParams(**{**ZERO, "alpha_x": 1.0}, gamma=1.0, y_hat=0.75)
    b = pointwise_feedback_limit([[1.0]], [[2.0]], [[0.0]], p, single())
    assert b[0] == pytest.approx(0.5)


def test_limit_zero_vx_and_clamp():
    p = ControlParams(gamma=1e-3, M=50.0)
    y = np.array([[0.2, 1.4]])
    assert np.all(pointwise_feedback_limit(y, [[0.0, 0.0]], [[1.0, -2.0]], p, single()) == 0.0)
    pc = ControlParams(**{**ZERO, "alpha_v": 1.0}, gamma=1.0, M=50.0)
    assert pointwise_feedback_limit([[0.5]], [[1.0]], [[1000.0]], pc, single())[0] == 50.0


def test_discrete_degenerate_cases():
    p = ControlParams()
    assert pointwise_feedback_discrete([[0.3]], [[0.0]], [[1.0]], [[0.5]], 0.05, p, single())[0] == 0.0
    pz = ControlParams(**ZERO)
    assert pointwise_feedback_discrete([[0.3]], [[2.0]], [[1.0]], [[0.5]], 0.05, pz, single())[0] == 0.0


def _state(seed, n_nodes=3, n=400):
    g = np.random.default_rng(seed)
    y = g.uniform(0, 1.5, (n_nodes, n))
    vx, vy, ey = g.normal(size=(3, n_nodes, n))
    return y, vx, vy, ey


def test_discrete_tends_to_limit():
    # the denominator is gamma + O(h vx^2), so the O(h) regime needs h << gamma
    p = ControlParams(M=1e9, gamma=1.0)
    y, vx, vy, ey = _state(1)
    op = StatOperator("expectation", np.full(3, 1 / 3))
    lim = pointwise_feedback_limit(y, vx, vy, p, op)
    d3 = np.max(np.abs(pointwise_feedback_discrete(y, vx, vy, ey, 1e-3, p, op) - lim))
    d4 = np.max(np.abs(pointwise_feedback_discrete(y, vx, vy, ey, 1e-4, p, op) - lim))
    assert d4 < d3 and d3 / d4 == pytest.approx(10.0, rel=0.2)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from(["pointwise-limit", "pointwise-discrete"]), st.floats(1e-4, 1.0))
def test_sign_antisymmetry(seed, method, gamma):
    p = ControlParams(gamma=gamma, M=1e12)
    y, vx, vy, ey = _state(seed)
    op = StatOperator("worst-case", np.full(3, 1 / 3), z0=seed % 3)
    f = pointwise_feedback_limit if method == "pointwise-limit" else None

    def b(vx_):
        if f is not None:
            return f(y, vx_, vy, p, op)
        return pointwise_feedback_discrete(y, vx_, vy, ey, 0.05, p, op)

    np.testing.assert_allclose(b(-vx), -b(vx), rtol=1e-12, atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(
    st.integers(0, 2**31),
    st.sampled_from(["pointwise-limit", "pointwise-discrete", "cellwise-appendix"]),
    st.sampled_from(["worst-case", "expectation"]),
    st.sampled_from(["nearest-center", "mean"]),
    st.floats(1.0, 100.0),
)
def test_emitted_control_bounded(seed, method, operator, interp, M):
    p = ControlParams(method=method, operator=operator, interpolation=interp, M=M, gamma=1e-4)
    y, vx, vy, ey = _state(seed)
    g = np.random.default_rng(seed)
    x = g.uniform(0, 1.5, y.shape)
    vx = vx * 100.0
    op = StatOperator(operator, np.full(3, 1 / 3), z0=seed % 3)
    field = ControlField.uniform_slabs(0.0, 1.5, 4)
    out = compute_control(p, op, field, x, y, vx, vy, ey, 0.05, (0.0, 1.5))
    assert np.all(np.abs(out.values) <= M)


def test_single_node_operators_agree():
    p = ControlParams()
    y, vx, vy, ey = _state(5, n_nodes=1)
    assert np.array_equal(
        pointwise_feedback_limit(y, vx, vy, p, single("expectation")),
        pointwise_feedback_limit(y, vx, vy, p, single("worst-case")),
    )


def test_node_means_two_pass():
    # beta_x term with alpha_x = 0 isolates y - ybar per node
    p = ControlParams(**{**ZERO, "beta_x": 1.0}, gamma=1.0, M=1e12)
    y, vx, vy, _ = _state(6, n_nodes=1, n=1000)
    b = pointwise_feedback_limit(y, vx, vy, p, single())
    ybar = np.sum(y[0]) / y.shape[1]
    np.testing.assert_allclose(b, (y[0] - ybar) * vx[0], rtol=1e-12)


def test_interpolate_mean():
    field = ControlField.uniform_slabs(0.0, 1.0, 2)
    out = interpolate_cellwise(np.array([10.0, 20.0]), np.array([0.1, 0.2]), field, 50.0)
    np.testing.assert_array_equal(out.values, [15.0, 0.0])
    out = interpolate_cellwise(np.full(3, 7.0), np.array([0.6, 0.7, 0.8]), field, 50.0)
    np.testing.assert_array_equal(out.values, [0.0, 7.0])


def test_interpolate_nearest_center():
    field = ControlField.uniform_slabs(0.0, 1.0, 2)  # centres y = 0.25, 0.75
    b = np.array([1.0, 2.0, 3.0, 99.0])
    x = np.array([0.5, 0.9, 0.5, 0.1])
    y = np.array([0.3, 0.25, 0.95, 0.76])
    out = interpolate_nearest_center(b, x, y, field, 0.5, 50.0)
    np.testing.assert_array_equal(out.values, [1.0, 3.0])
    clamped = interpolate_nearest_center(b * 100, x, y, field, 0.5, 50.0)
    np.testing.assert_array_equal(clamped.values, [50.0, 50.0])
    empty = interpolate_nearest_center(b[:2], x[:2], y[:2], field, 0.5, 50.0)
    assert empty.values[1] == 0.0


def test_reference_positions():
    y = np.array([[0.1, 0.2], [0.3, 0.6]])
    e = StatOperator("expectation", np.array([0.25, 0.75]))
    np.testing.assert_allclose(reference_positions(y, e), [0.25, 0.5])
    w = StatOperator("worst-case", np.array([0.5, 0.5]), z0=0)
    np.testing.assert_array_equal(reference_positions(y, w), [0.1, 0.2])
    # periodic mean of 0.05 and 1.45 on [0, 1.5) sits at the seam, not at 0.75
    xr = reference_x(np.array([[0.05], [1.45]]), StatOperator("expectation", np.array([0.5, 0.5])), 0.0, 1.5)
    assert min(xr[0], 1.5 - xr[0]) < 1e-12


def test_appendix_hand_value():
    p = ControlParams(**{**ZERO, "alpha_v": 1.0}, gamma=1.0, M=50.0, y_hat=0.75)
    field = ControlField.uniform_slabs(0.0, 1.0, 2)
    y, vx, vy, ey = [[0.25, 0.75]], [[1.0, 1.0]], [[3.0, 3.0]], [[0.0, 0.0]]
    out = cellwise_feedback_appendix(y, vx, vy, ey, 0.05, p, single(), field, limit=True)
    np.testing.assert_allclose(out.values, [3.0, 3.0])


def test_appendix_zero_vx_and_clamp():
    p = ControlParams(**{**ZERO, "alpha_v": 1.0}, gamma=1.0, M=50.0)
    field = ControlField.uniform_slabs(0.0, 1.0, 2)
    out = cellwise_feedback_appendix([[0.2, 0.8]], [[0.0, 1.0]], [[3.0, -200.0]], [[0.0, 0.0]], 0.05, p, single(), field, True)
    np.testing.assert_allclose(out.values, [0.0, -50.0])


def test_fixed_method():
    p = ControlParams(method="fixed", B0=1.5)
    field = ControlField.uniform_slabs(0.0, 1.5, 4)
    y, vx, vy, ey = _state(2)
    out = compute_control(p, single(), field, y, y, vx, vy, ey, 0.05, (0.0, 1.5))
    np.testing.assert_array_equal(out.values, np.full(4, 1.5))


def test_field_lookup():
    f = ControlField.uniform_slabs(0.0, 1.5, 4, values=[1.0, 2.0, 3.0, 4.0])
    np.testing.assert_array_equal(f.at(np.array([0.0, 0.374, 0.375, 1.5])), [1.0, 1.0, 2.0, 4.0])
