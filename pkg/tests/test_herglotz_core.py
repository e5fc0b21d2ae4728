import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from herglotz import herglotz_core as hc
from herglotz import livsic as lv
from herglotz import measures as ms
from herglotz.errors import (EvalOnRealAxis, InvalidMeasure, NonHerglotzSample, NotJUnitary,
                             OutsideValidityRectangle, SingularDenominator)
from herglotz.herglotz_core import HerglotzRep, JUnitary, N0Class
from herglotz.measures import Measure, Tail

upper = st.builds(complex, st.floats(-20, 20), st.floats(1e-3, 20))


def random_rep(rng, n=5):
    return HerglotzRep(Measure(zip(rng.uniform(-3, 3, n), rng.uniform(0.1, 2, n))),
                       constant=rng.normal(), slope=abs(rng.normal()))


# --- evaluation -----------------------------------------------------------------


def test_eval_examples():
    assert hc.eval(HerglotzRep(Measure([(0.0, 1.0)]), compensation="plain"), 1j) == pytest.approx(1j)
    assert hc.eval(HerglotzRep(Measure(tail=Tail.lebesgue())), 2 + 3j) == pytest.approx(1j, abs=1e-14)
    two = HerglotzRep(Measure([(-1.0, 1.0), (1.0, 1.0)]), compensation="plain")
    assert hc.eval(two, 1j) == pytest.approx(1j, abs=1e-15)


def test_eval_constant_and_slope():
    rep = HerglotzRep(Measure(), constant=2.0, slope=0.5)
    assert hc.eval(rep, 1 + 1j) == pytest.approx(2.5 + 0.5j)


@given(upper)
def test_reflection_is_exact(z):
    rep = HerglotzRep(Measure([(0.3, 1.0), (-2.0, 0.5)], density=([0.0, 1.0, 2.0], [0.0, 1.0, 0.0])),
                      constant=0.7, slope=0.1)
    assert hc.eval(rep, z.conjugate()) == np.conj(hc.eval(rep, z))


def test_matrix_reflection_is_conjugate_transpose(rng):
    B = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    om = ms.MatrixMeasure([(0.5, B.conj().T @ B), (-1.0, np.eye(2))])
    rep = HerglotzRep(om, constant=[[0, 1j], [-1j, 0]])
    z = 0.4 + 0.9j
    assert np.array_equal(hc.eval(rep, z.conjugate()), hc.eval(rep, z).conj().T)


def test_eval_on_real_axis_rejected():
    with pytest.raises(EvalOnRealAxis):
        hc.eval(HerglotzRep(Measure([(0.0, 1.0)])), 1.0)


def test_evaluate_real_off_support():
    rep = HerglotzRep(Measure([(0.0, 1.0)]), compensation="plain")
    assert hc.evaluate_real(rep, 2.0) == pytest.approx(-0.5)
    with pytest.raises(EvalOnRealAxis):
        hc.evaluate_real(rep, 1e-9)


def test_constructor_rejects_bad_terms():
    with pytest.raises(InvalidMeasure):
        HerglotzRep(ms.MatrixMeasure([(0.0, np.eye(2))]), constant=[[0, 1], [0, 0]])
    with pytest.raises(InvalidMeasure):
        HerglotzRep(Measure(), slope=-1.0)
    with pytest.raises(InvalidMeasure):
        HerglotzRep(Measure(tail=Tail.lebesgue()), compensation="plain")


# --- verification ---------------------------------------------------------------


def test_verify_matrix_rep_passes(rng):
    B = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    om = ms.MatrixMeasure([(x, B.conj().T @ B / (i + 1)) for i, x in enumerate([-1.0, 0.2, 4.0])])
    rpt = hc.verify_herglotz(HerglotzRep(om), [complex(x, y) for x in (-2, 0, 3) for y in (0.1, 1, 10)])
    assert rpt.passed and rpt.n_samples == 9 and rpt.min_eigenvalue > 0


def test_verify_detects_non_herglotz():
    rpt = hc.verify_herglotz(lambda z: -1j, [1j, 2 + 1j])
    assert not rpt.passed and rpt.min_eigenvalue == pytest.approx(-1.0)


def test_verify_rejects_lower_half_plane_samples():
    with pytest.raises(ValueError):
        hc.verify_herglotz(lambda z: 1j, [1 - 1j])


def test_weyl_bound_on_livsic_model(rng):
    model = lv.LivsicInterval(1.0, math.pi / 4)
    zs = 10 ** rng.uniform(-2, 2, 100) * np.exp(1j * rng.uniform(0.01, math.pi - 0.01, 100))
    rpt = hc.verify_herglotz(lambda z: lv.livsic_rotated_m(model, z), zs, check_bound=True)
    assert rpt.passed and rpt.bound_margin >= -1e-8


def test_weyl_lower_bound_values():
    assert hc.weyl_lower_bound(1j) == 1.0
    assert hc.weyl_lower_bound(3 + 4j) == pytest.approx(1 / 28)
    # the constant function i is Donoghue normalised and meets the bound with margin
    rpt = hc.verify_herglotz(lambda z: 1j, [0.01j, 5 + 0.01j], check_bound=True)
    assert rpt.bound_margin > 0


# --- J-unitary transforms -------------------------------------------------------


def test_junitary_validation_and_constructors():
    assert JUnitary.identity(2).residual() == 0.0
    assert JUnitary.rotation(0.3).residual() < 1e-15
    with pytest.raises(NotJUnitary):
        JUnitary([[2.0]], [[0.0]], [[0.0]], [[1.0]])


@given(st.floats(-5, 5), st.floats(-5, 5), st.floats(-3, 3))
def test_junitary_products_closed(t1, t2, d):
    A = JUnitary.rotation(t1) @ JUnitary.shift([[d]]) @ JUnitary.rotation(t2)
    assert A.residual() < 1e-9


def test_junitary_json_round_trip(rng):
    L = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    A = JUnitary.shift(L + L.conj().T)
    B = JUnitary.from_dict(A.to_dict())
    assert np.array_equal(B.matrix, A.matrix)
    with pytest.raises(InvalidMeasure):
        JUnitary.from_dict({**A.to_dict(), "extra": 1})


def test_lft_identity_and_composition(rng):
    rep = random_rep(rng)
    z = 0.3 + 0.8j
    assert hc.lft_apply(JUnitary.identity(1), rep(z)) == pytest.approx(rep(z), abs=1e-15)
    A1, A2 = JUnitary.rotation(0.4), JUnitary.shift([[1.5]]) @ JUnitary.rotation(-1.1)
    two = hc.lft_apply(A2, hc.lft_apply(A1, rep))
    one = hc.lft_apply(A2 @ A1, rep)
    for w in (z, -2 + 0.1j, 5 + 5j):
        assert abs(two(w) - one(w)) <= 1e-9 * max(1.0, abs(one(w)))


def test_lft_preserves_herglotz(rng):
    zs = [complex(x, y) for x in np.linspace(-4, 4, 5) for y in (0.05, 0.5, 5.0)]
    for _ in range(100):
        L = rng.normal()
        A = JUnitary.rotation(rng.uniform(0, math.pi)) @ JUnitary.shift([[L]])
        rep = random_rep(rng)
        try:
            vals = hc.lft_apply(A, rep, zs)
        except SingularDenominator:
            continue
        assert min(v.imag for v in vals) >= -1e-10


def test_lft_singular_denominator_reported():
    # A11 + A12 m = 0 for m = -1 at every z
    with pytest.raises(SingularDenominator) as info:
        hc.lft_apply(JUnitary.shift([[1.0]]), lambda z: -1.0 + 0j, [1j])
    assert info.value.z == 1j


def test_rotation_examples():
    m = lambda z: -1 / z  # noqa: E731
    z = 0.7 + 0.2j
    assert hc.extension_rotate(m, 0.0)(z) == m(z)
    assert hc.extension_rotate(m, math.pi / 2)(z) == pytest.approx(-1 / m(z))
    for t in np.linspace(0, math.pi, 7):
        assert hc.extension_rotate(lambda w: 1j, t)(z) == pytest.approx(1j, abs=1e-15)


@given(st.floats(-10, 10), upper)
def test_rotation_period_pi(theta, z):
    m = lambda w: lv.livsic_rotated_m(lv.LivsicInterval(1.0, 0.5), w)  # noqa: E731
    try:
        a = hc.extension_rotate(m, theta)(z)
        b = hc.extension_rotate(m, theta + math.pi)(z)
    except SingularDenominator:
        return
    assert abs(a - b) <= 1e-10 * max(1.0, abs(a))


# --- inversion ------------------------------------------------------------------


def test_invert_constant_i_gives_lebesgue_over_pi():
    m = hc.stieltjes_invert(lambda z: 1j + 0 * z, (-5.0, 5.0))
    assert m.locations.size == 0
    assert np.max(np.abs(m.values - 1 / math.pi)) < 1e-3


def test_invert_point_mass():
    m = hc.stieltjes_invert(lambda z: -1 / z, (-1.0, 1.0))
    assert m.locations.size == 1
    assert abs(m.locations[0]) < 1e-6 and m.masses[0] == pytest.approx(1.0, rel=1e-6)
    assert np.max(m.values) < 1e-3


def test_invert_livsic_lattice():
    model = lv.LivsicInterval(1.0, math.pi / 4)
    m = hc.stieltjes_invert(lambda z: lv.livsic_rotated_m(model, z), (-3.0, 3.0))
    assert np.allclose(m.locations, model.poles([-1, 0]), atol=1e-6)
    assert np.allclose(m.masses, model.mass, rtol=1e-5)


def test_invert_mixed_atoms_and_density():
    g = np.linspace(-2.0, 2.0, 401)
    dens = 0.2 * np.exp(-g ** 2)
    rep = HerglotzRep(Measure([(-0.5, 0.7), (1.2, 0.3)], density=(g, dens)))
    got = hc.stieltjes_invert(rep, (-1.5, 1.5))
    assert np.allclose(got.locations, [-0.5, 1.2], atol=1e-4)
    assert np.allclose(got.masses, [0.7, 0.3], rtol=1e-3)
    inner = (got.grid > -1.3) & (got.grid < 1.3) & (np.abs(got.grid + 0.5) > 0.05) & (np.abs(got.grid - 1.2) > 0.05)
    assert np.max(np.abs(got.values[inner] - 0.2 * np.exp(-got.grid[inner] ** 2))) < 2e-3


@settings(max_examples=15)
@given(st.integers(0, 2 ** 32 - 1))
def test_invert_round_trip_random_atoms(seed):
    rng = np.random.default_rng(seed)
    while True:
        x = np.sort(rng.uniform(-2, 2, 4))
        if np.all(np.diff(x) >= 0.05):
            break
    w = rng.uniform(0.1, 2.0, 4)
    got = hc.stieltjes_invert(HerglotzRep(Measure(zip(x, w))), (-2.5, 2.5))
    assert got.locations.size == 4
    assert np.allclose(got.locations, x, atol=1e-4)
    assert np.allclose(got.masses, w, rtol=1e-3)


def test_invert_close_pair_with_unequal_masses():
    # a light atom 0.056 from a heavy one: its raw eps Im M drifts by 23 percent
    x, w = [-0.36320345, -0.3066942], [0.15236232, 1.53167491]
    got = hc.stieltjes_invert(HerglotzRep(Measure(zip(x, w))), (-1.0, 1.0))
    assert np.allclose(got.locations, x, atol=1e-6)
    assert np.allclose(got.masses, w, rtol=1e-5)


def test_invert_rejects_non_herglotz():
    with pytest.raises(NonHerglotzSample):
        hc.stieltjes_invert(lambda z: -1j + 0 * z, (0.0, 1.0))
    with pytest.raises(ValueError):
        hc.stieltjes_invert(lambda z: 1j, (0.0, 1.0), eps_ladder=(1e-2, 1e-7))


# --- continuation ---------------------------------------------------------------


def test_continue_lebesgue_constant():
    rep = HerglotzRep(Measure(tail=Tail.lebesgue()))
    iv = hc.AnalyticInterval(0.0, 2.0, lambda z: 1 / math.pi, depth=2.0)
    assert hc.continue_below(rep, iv, 1 - 1j) == pytest.approx(1j, abs=1e-14)


def test_continue_without_support_is_reflection():
    rep = HerglotzRep(Measure([(0.0, 1.0)]))
    iv = hc.AnalyticInterval(1.0, 2.0, lambda z: 0.0)
    z = 1.5 - 0.1j
    assert hc.continue_below(rep, iv, z) == np.conj(hc.eval(rep, z.conjugate()))


def test_continue_flat_density_matches_branch_continued_log():
    # density c on [lo0, hi0]: M(z) = c (log(hi0 - z) - log(lo0 - z)) + const in C+;
    # across (lo0, hi0) the continuation picks up exactly 2 pi i c
    lo0, hi0, c = -1.0, 3.0, 0.4
    rep = HerglotzRep(Measure(density=([lo0, hi0], [c, c])))
    iv = hc.AnalyticInterval(0.0, 2.0, lambda z: c, depth=0.5)
    const = hc.eval(rep, 1j) - c * (np.log(hi0 - 1j) - np.log(lo0 - 1j))
    for z in (0.5 - 0.1j, 1.0 - 0.4j, 1.9 - 0.01j):
        oracle = c * (np.log(hi0 - z) - np.log(lo0 - z) + 2j * math.pi) + const
        assert hc.continue_below(rep, iv, z) == pytest.approx(oracle, abs=1e-12)


def test_continuation_is_continuous_across_interval():
    rep = HerglotzRep(Measure([(5.0, 1.0)], density=([-1.0, 3.0], [0.4, 0.4])))
    iv = hc.AnalyticInterval(0.0, 2.0, lambda z: 0.4)
    for x in (0.3, 1.0, 1.7):
        below = hc.continue_below(rep, iv, complex(x, -1e-7))
        above = hc.eval(rep, complex(x, 1e-7))
        assert abs(below - above) < 1e-6
        assert above.imag == pytest.approx(math.pi * 0.4, abs=1e-6)


def test_continue_outside_rectangle_and_bad_extension():
    rep = HerglotzRep(Measure(tail=Tail.lebesgue()))
    iv = hc.AnalyticInterval(0.0, 2.0, lambda z: 1 / math.pi, depth=0.5)
    with pytest.raises(OutsideValidityRectangle):
        hc.continue_below(rep, iv, 1 - 1j)
    with pytest.raises(OutsideValidityRectangle):
        hc.continue_below(rep, iv, 3 - 0.1j)
    wrong = hc.AnalyticInterval(0.0, 2.0, lambda z: 0.5)
    with pytest.raises(InvalidMeasure):
        hc.continue_below(rep, wrong, 1 - 0.1j)


# --- N0 classes -----------------------------------------------------------------


def test_n0_membership_examples():
    g = np.linspace(0.0, 2.0, 401)
    f = ms.donoghue_normalize(Measure(density=(g, np.sqrt(g)), tail=Tail.power(0.5)))
    assert hc.n0_membership(f) is N0Class.N0F
    assert hc.n0_membership(Measure([(0.0, 1.0)])) is N0Class.NOT_N0
    liv = lv.livsic_measure(lv.LivsicInterval(1.0, math.pi / 4), periodic=True)
    assert hc.n0_membership(liv) is N0Class.N0
    assert hc.n0_membership(ms.donoghue_normalize(Measure(tail=Tail.power(-0.5)))) is N0Class.N0K
    assert hc.n0_membership(ms.donoghue_normalize(Measure(tail=Tail.power(0.0)))) is N0Class.N0FK
    assert hc.n0_membership(Measure(tail=Tail.power(0.5))) is N0Class.NOT_N0  # not normalised


# --- CSV ------------------------------------------------------------------------


def test_eval_csv_round_trip(rng):
    zs = rng.normal(size=5) + 1j * rng.uniform(0.1, 1, 5)
    vals = rng.normal(size=5) + 1j * rng.normal(size=5)
    text = hc.to_csv_string(hc.write_eval_csv, zs, vals)
    assert text.splitlines()[0] == "re_z,im_z,re_M,im_M"
    z2, v2 = hc.read_eval_csv(io.StringIO(text))
    assert np.array_equal(z2, zs) and np.array_equal(v2, vals)


def test_inversion_csv_round_trip():
    m = Measure([(0.25, 2.0)], density=([0.0, 0.5, 1.0], [0.1, 0.3, 0.2]))
    text = hc.to_csv_string(hc.write_inversion_csv, m)
    assert text.splitlines()[0] == "lambda,density,atom_mass"
    back = hc.read_inversion_csv(io.StringIO(text))
    assert back.atoms == m.atoms
    assert back.grid.tolist() == m.grid.tolist() and back.values.tolist() == m.values.tolist()
