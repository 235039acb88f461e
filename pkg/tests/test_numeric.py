import json
import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from benney_sym.errors import BlowUp, MalformedInput, UnsupportedGenerator
from benney_sym.numeric import (
    GridState, SimParams, apply_group_transform, characteristic_speed, closure_values, evolve,
    refinement_study, shift_periodic, symmetry_defect,
)
from benney_sym.numeric import _kernels
from benney_sym.numeric.config import initial_state, load_config, profile, sim_params
from benney_sym.operator_engine import PointGeneratorId as G

from conftest import TwoStream


def _shallow(M, eps=0.01):
    x = np.arange(M) / M
    return GridState(np.vstack([1 + eps * np.sin(2 * np.pi * x), np.zeros(M)]))


# -- evolve -----------------------------------------------------------------------------

@pytest.mark.parametrize("closure", ["streams", "zero"])
def test_constant_data_is_stationary(closure):
    consts = np.array([2.0, 0.3, 1.0, 0.2])
    s = GridState(np.repeat(consts[:, None], 32, axis=1))
    out = evolve(s, SimParams(3, 32, 1.0, 0.01, 0.5, closure=closure))
    assert np.array_equal(out.moments, s.moments)
    assert out.time == pytest.approx(0.5)


def test_zero_data_stays_zero():
    s = GridState(np.zeros((4, 32)))
    out = evolve(s, SimParams(3, 32, 1.0, 0.01, 0.3))
    assert not out.moments.any()


def test_input_state_is_not_modified(two_stream):
    s = two_stream.state(64)
    before = s.moments.copy()
    evolve(s, two_stream.params(64))
    assert np.array_equal(s.moments, before)
    with pytest.raises(ValueError):
        s.moments[0, 0] = 1.0


def test_self_convergence_fourth_order():
    # single-layer chain with A^2 = 0: compare against a run on a 4x finer grid
    T, v = 0.2, 1.2
    ref = evolve(_shallow(512), SimParams.auto(1, 512, 1.0, T, v, closure="zero"))
    errors = []
    for M in (32, 64, 128):
        out = evolve(_shallow(M), SimParams.auto(1, M, 1.0, T, v, closure="zero"))
        errors.append(np.abs(out.moments - ref.moments[:, :: 512 // M]).max())
    ratios = [a / b for a, b in zip(errors, errors[1:])]
    assert all(r > 12 for r in ratios), (errors, ratios)


@pytest.mark.parametrize("closure", ["streams", "zero"])
def test_means_of_first_two_moments_are_conserved(closure):
    if closure == "streams":
        case = TwoStream()
        s, p = case.state(128), case.params(128)
    else:
        x = np.arange(128) / 128
        s = GridState(np.vstack([1 + 0.05 * np.sin(2 * np.pi * x), 0.02 * np.cos(2 * np.pi * x),
                                 -0.05 + 0.01 * np.sin(2 * np.pi * x), np.zeros(128)]))
        p = SimParams.auto(3, 128, 1.0, 0.1, 1.1 * characteristic_speed(s, "zero"), closure="zero")
    out = evolve(s, p)
    for i in (0, 1):
        assert out.moments[i].mean() == pytest.approx(s.moments[i].mean(), abs=1e-13)
    assert np.abs(out.moments - s.moments).max() > 1e-4


def test_backends_agree(two_stream):
    s, p = two_stream.state(128), two_stream.params(128)
    a = evolve(s, p, backend="numba").moments
    b = evolve(s, p, backend="numpy").moments
    assert np.abs(a - b).max() < 1e-12
    A = np.asarray(s.moments)
    for code in (_kernels.CLOSURE_STREAMS, _kernels.CLOSURE_ZERO):
        np.testing.assert_allclose(_kernels.closure_numba(A, code), _kernels.closure_numpy(A, code),
                                   rtol=1e-12, atol=1e-14)


def test_blow_up_is_reported():
    x = np.arange(64) / 64
    s = GridState(np.vstack([1 + 0.5 * np.sin(2 * np.pi * x), 0 * x, 0 * x, 0 * x]))
    p = SimParams(3, 64, 1.0, 0.004, 5.0, v_max=1.5, closure="zero", bound=10)
    for backend in ("numba", "numpy"):
        with pytest.raises(BlowUp, match="after 92 of 1250"):
            evolve(s, p, backend=backend)


def test_parameter_validation():
    with pytest.raises(ValueError, match="violates"):
        SimParams(3, 64, 1.0, 0.01, 1.0, v_max=1.0)
    with pytest.raises(ValueError, match="odd N"):
        SimParams(2, 64, 1.0, 0.001, 1.0)
    with pytest.raises(ValueError):
        SimParams(3, 64, 1.0, 0.001, 1.0, scheme="euler")
    with pytest.raises(ValueError):
        GridState(np.zeros((4, 8)))
    with pytest.raises(ValueError):
        GridState(np.full((4, 32), np.nan))
    with pytest.raises(ValueError):
        evolve(GridState(np.zeros((4, 32))), SimParams(3, 64, 1.0, 0.001, 0.1))
    p = SimParams.auto(3, 64, 1.0, 0.05, 2.0)
    assert p.steps * p.dt == pytest.approx(0.05) and p.dt <= 0.4 / 64 / 2.0


# -- closure --------------------------------------------------------------------------

@settings(deadline=None, max_examples=30)
@given(st.lists(st.tuples(st.floats(0.1, 2.0), st.floats(-2.0, 2.0)), min_size=1, max_size=2),
       st.sampled_from([1, 3]))
def test_stream_closure_is_exact_on_stream_data(streams, N):
    if len(streams) == 2 and abs(streams[0][1] - streams[1][1]) < 0.05:
        return
    n_streams = (N + 1) // 2
    rho_u = streams[:n_streams]
    A = np.array([[sum(r * u ** i for r, u in rho_u)] * 16 for i in range(N + 1)])
    expected = sum(r * u ** (N + 1) for r, u in rho_u)
    got = closure_values(GridState(A), "streams")
    np.testing.assert_allclose(got, expected, rtol=1e-8, atol=1e-10)


def test_characteristic_speed_of_shallow_layer():
    s = GridState(np.vstack([np.full(32, 4.0), np.zeros(32)]))
    assert characteristic_speed(s, "zero") == pytest.approx(2.0)


# -- transformations -----------------------------------------------------------------

def test_translation_by_period_is_identity(two_stream):
    s = two_stream.state(64)
    out = apply_group_transform(s, G.X2, s.L)
    np.testing.assert_allclose(out.moments, s.moments, atol=1e-13)


def test_galilean_boost_matches_exponential_series(two_stream):
    s = GridState(two_stream.state(64).moments, 1.0, 0.3)
    a = 0.37
    out = apply_group_transform(s, G.X3, a)
    shifted = shift_periodic(s.moments, a * s.time, s.L)
    # generator on the moment block: A^i -> i A^{i-1}; exponentiate it
    gen = np.diag(np.arange(1, 4, dtype=float), k=-1)
    expected = scipy.linalg.expm(a * gen) @ shifted
    np.testing.assert_allclose(out.moments, expected, atol=1e-12)
    np.testing.assert_allclose(out.moments[0], shifted[0], atol=1e-14)
    np.testing.assert_allclose(out.moments[2], shifted[2] + 2 * a * shifted[1] + a ** 2 * shifted[0],
                               atol=1e-13)


def test_scaling_rescales_domain_and_weights(two_stream):
    s = two_stream.state(64)
    out = apply_group_transform(s, G.X5, 0.2)
    lam = math.exp(0.2)
    assert out.L == pytest.approx(lam * s.L)
    for i in range(4):
        np.testing.assert_allclose(out.moments[i], lam ** (i + 2) * s.moments[i])


@pytest.mark.parametrize("g", [G.X1, G.X4])
def test_time_transforming_generators_are_rejected(g, two_stream):
    with pytest.raises(UnsupportedGenerator):
        apply_group_transform(two_stream.state(32), g, 0.1)


@pytest.mark.parametrize("method,tol", [("fourier", 1e-13), ("cubic", 1e-5)])
def test_periodic_shift(method, tol):
    M, L = 128, 2.0
    x = np.arange(M) * L / M
    f = np.sin(2 * np.pi * x / L) + 0.3 * np.cos(6 * np.pi * x / L)
    g = shift_periodic(f, 0.123, L, method)
    xs = x - 0.123
    exact = np.sin(2 * np.pi * xs / L) + 0.3 * np.cos(6 * np.pi * xs / L)
    assert np.abs(g - exact).max() < tol


def test_symmetry_defects_converge(two_stream):
    study = refinement_study(two_stream.state, two_stream.params, G.X3, 0.1, [64, 128, 256])
    assert all(r > 12 for r in study.ratios), study.to_json()
    assert symmetry_defect(two_stream.state(64), G.X2, 0.1, two_stream.params(64)) < 1e-12
    assert symmetry_defect(two_stream.state(64), G.X5, 0.2, two_stream.params(64)) < 1e-12


def test_cubic_interpolation_path_converges(two_stream):
    study = refinement_study(two_stream.state, two_stream.params, G.X3, 0.1, [128, 256],
                             interp="cubic")
    assert study.ratios[0] > 12


def test_zero_closure_breaks_galilean_invariance():
    # hyperbolic data for the truncated chain; the boost mixes the dropped
    # moment back in, so the defect stalls at a grid-independent level
    cfg = {"N": 3, "M": 64, "L": 1.0, "T": 0.05, "closure": "zero", "profiles": [
        {"i": 0, "expr": "1 + 0.05*sin"}, {"i": 1, "expr": "0.02*cos"},
        {"i": 2, "expr": "-0.05 + 0.01*sin"}]}
    state = lambda M: initial_state(cfg, M)
    v = 1.5 * characteristic_speed(state(64), "zero")
    params = lambda M: sim_params({**cfg, "M": M}, state(M), v_max=v)
    study = refinement_study(state, params, G.X3, 0.1, [64, 128, 256])
    assert min(study.defects) > 1e-5
    assert all(r < 1.2 for r in study.ratios)
    # translations and scalings survive this closure
    assert symmetry_defect(state(64), G.X5, 0.2, params(64)) < 1e-12


def test_corrupted_scaling_weight_does_not_converge(two_stream):
    study = refinement_study(two_stream.state, two_stream.params, G.X5, 0.2, [64, 128],
                             weight_offset=1)
    assert study.defects[1] > 1e-3
    assert 0.9 < study.ratios[0] < 1.1


# -- config ---------------------------------------------------------------------------

def test_profile_expressions():
    x = np.linspace(0, 1, 16, endpoint=False)
    np.testing.assert_allclose(profile("1 + 0.01*sin", x, 1.0), 1 + 0.01 * np.sin(2 * np.pi * x))
    np.testing.assert_allclose(profile("cos(3) - const(2)", x, 1.0), np.cos(6 * np.pi * x) - 2)
    np.testing.assert_allclose(profile("gaussian(0.2)", x, 1.0), np.exp(-((x - 0.5) / 0.2) ** 2))
    np.testing.assert_allclose(profile(0.5, x, 1.0), 0.5)
    np.testing.assert_allclose(profile("2*pi", x, 1.0), 2 * np.pi)
    for bad in ("__import__('os')", "sin(x)", "exp(1)", "1 +", "sin(cos)"):
        with pytest.raises(MalformedInput):
            profile(bad, x, 1.0)


def test_config_loading(tmp_path, golden_dir):
    cfg = load_config(golden_dir / "shallow_water.json")
    s = initial_state(cfg)
    assert (s.N, s.M) == (1, 64)
    p = sim_params(cfg, s)
    assert p.closure == "streams" and p.T == pytest.approx(0.02)
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"N": 3}))
    with pytest.raises(MalformedInput):
        load_config(bad)
    bad.write_text("{oops")
    with pytest.raises(MalformedInput):
        load_config(bad)
    with pytest.raises(MalformedInput):
        initial_state({"N": 1, "M": 32, "profiles": [{"i": 4, "expr": "1"}]})
    default_T = sim_params({"N": 1, "M": 32}, GridState(np.ones((2, 32))), v_max=2.0).T
    assert default_T == pytest.approx(0.05)


@pytest.mark.parametrize("flag,expected", [("0", "numpy"), ("off", "numpy"), ("1", "numba" if _kernels._HAVE_NUMBA else "numpy")])
def test_env_flag_selects_backend(flag, expected):
    import os
    import subprocess
    import sys

    env = {**os.environ, "BENNEY_SYM_NUMBA": flag}
    proc = subprocess.run([sys.executable, "-c", "from benney_sym.numeric import BACKEND; print(BACKEND)"],
                          capture_output=True, text=True, env=env, check=True)
    assert proc.stdout.strip() == expected
