import math

import numpy as np
import pytest

from herglotz import herglotz_core as hc
from herglotz import schrodinger as sch
from herglotz.branches import sqrt_upper
from herglotz.errors import InvalidCombination, InvalidMeasure

Q0 = sch.Potential.zero()
Q1 = sch.Potential.table([0.0, 10.0], [1.0, 1.0])
BUMP = sch.Potential.table(np.linspace(0, 5, 11), np.exp(-np.linspace(0, 5, 11)))
ANGLES = [0.0, math.pi / 4, math.pi / 2, 3 * math.pi / 4]


def test_free_fundamental_system_at_zero():
    x = np.array([0.0, 0.5, 2.0])
    phi, dphi, th, dth = sch.fundamental_system(Q0, 0.0, 0.0, x)
    assert np.allclose(phi, x, atol=1e-10) and np.allclose(dphi, 1, atol=1e-10)
    assert np.allclose(th, 1, atol=1e-10) and np.allclose(dth, 0, atol=1e-10)


def test_free_fundamental_system_oscillates():
    k = 1.7
    x = np.linspace(0, 4, 9)
    phi, _, th, _ = sch.fundamental_system(Q0, 0.0, k * k, x)
    assert np.allclose(phi, np.sin(k * x) / k, atol=1e-9)
    assert np.allclose(th, np.cos(k * x), atol=1e-9)


def test_wronskian_is_conserved_for_table_potential(rng):
    q = sch.Potential.table(np.linspace(0, 10, 21), rng.uniform(-1, 1, 21))
    for g in (0.0, 1.1):
        w = sch.wronskian(*sch.fundamental_system(q, g, 0.4 + 0.9j, 10.0))
        assert w == pytest.approx(-1.0, rel=1e-9)


def test_potential_table_validation():
    with pytest.raises(InvalidMeasure):
        sch.Potential.table([0.5, 1.0], [0, 0])
    with pytest.raises(InvalidMeasure):
        sch.Potential.table([0.0, 1.0, 1.0], [0, 0, 0])
    with pytest.raises(InvalidMeasure):
        sch.Potential.table([0.0, 1.0], [0, math.nan])


def test_potential_from_csv(tmp_path):
    p = tmp_path / "q.csv"
    p.write_text("x,q\n0,1\n10,1\n")
    q = sch.Potential.from_csv(p)
    assert q(3.0) == 1.0 and q(50.0) == 1.0


def test_free_weyl_at_i():
    assert sch.weyl_m(Q0, 0.0, 1j).value == pytest.approx((-1 + 1j) / math.sqrt(2), abs=1e-9)


@pytest.mark.parametrize("z", [0.3 + 0.05j, -4 + 1j, 25 + 2j, 1e3j])
def test_free_weyl_closed_form(z):
    assert sch.weyl_m(Q0, 0.0, z).value == pytest.approx(1j * sqrt_upper(z), rel=1e-7)


def test_weyl_rejects_real_axis_and_bad_angle():
    with pytest.raises(InvalidMeasure):
        sch.weyl_m(Q0, 0.0, 1.0)
    with pytest.raises(InvalidMeasure):
        sch.weyl_m(Q0, math.pi, 1j)


def test_aronszajn_rotation_pi_over_three():
    z = 0.7 + 0.4j
    rot = sch.aronszajn_rotate(sch.weyl_m(Q0, 0.0, z).value, 0.0, math.pi / 3)
    assert sch.weyl_m(Q0, math.pi / 3, z).value == pytest.approx(rot, abs=1e-8)


def test_aronszajn_pairs_for_bump():
    z = -0.5 + 0.6j
    vals = {g: sch.weyl_m(BUMP, g, z).value for g in ANGLES}
    for g in ANGLES:
        for d in ANGLES:
            assert abs(vals[d] - sch.aronszajn_rotate(vals[g], g, d)) < 1e-8


def test_constant_shift_oracle():
    z = 2 + 1j
    assert sch.weyl_m(Q1, 0.0, z).value == pytest.approx(1j * sqrt_upper(z - 1), abs=1e-8)
    rep = sch.weyl_asymptotics_check(Q1, 0.0, shift=1.0)
    assert rep.passed and max(rep.residuals) < 1e-8


def test_asymptotics_free_cases():
    assert sch.weyl_asymptotics_check(Q0, 0.0).passed
    rep = sch.weyl_asymptotics_check(Q0, math.pi / 4)
    assert rep.passed and abs(rep.values[-1] - 1) < 0.03


def test_herglotz_positivity(rng):
    zs = [complex(x, y) for x, y in zip(rng.uniform(-5, 5, 30), rng.uniform(0.05, 5, 30))]
    for q in (Q0, BUMP):
        for g in ANGLES:
            assert min(sch.weyl_m(q, g, z).value.imag for z in zs[:8]) > 0


def test_norm_identity():
    z = 0.5 + 0.5j
    for g in (0.0, math.pi / 3):
        r = sch.weyl_m(BUMP, g, z)
        nrm = sch.truncated_norm(BUMP, g, z, r.truncation_radius)
        assert nrm == pytest.approx(r.value.imag / z.imag, abs=r.richardson_error + 1e-6)


def test_friedrichs_limit_free():
    vals = [sch.weyl_m(Q0, 0.0, -(10.0 ** j), real_ok=True).value.real for j in range(5)]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert vals[-1] == pytest.approx(-100.0, rel=1e-7)


def test_krein_angle_for_shifted_operator():
    q = sch.Potential.from_callable(lambda x: 1.0)
    m00 = sch.weyl_m(q, 0.0, 0.0, real_ok=True).value
    assert m00 == pytest.approx(-1.0, abs=1e-8)
    # cot(gamma_K) = -m_0(0-) = 1, so gamma_K = pi/4 puts a pole of m at 0
    assert abs(sch.weyl_m(q, math.pi / 4, -1e-4, real_ok=True).value) > 1e3


def test_gamma_of_alpha_free():
    assert sch.gamma_of_alpha(Q0, math.pi / 2) == 0.0
    # cot g = 1/sqrt(2) - tan(alpha)/sqrt(2) at alpha = 0
    assert sch.gamma_of_alpha(Q0, 0.0) == pytest.approx(math.atan(math.sqrt(2)), abs=1e-8)


def test_weyl_to_donoghue_dirichlet_closed_form():
    z = 3 + 0.2j
    got = sch.weyl_to_donoghue(Q0, math.pi / 2, z)
    assert got == pytest.approx(math.sqrt(2) * 1j * sqrt_upper(z) + 1, rel=1e-7)


@pytest.mark.parametrize("alpha", np.arange(8) * math.pi / 8)
def test_weyl_to_donoghue_normalized(alpha):
    assert sch.weyl_to_donoghue(BUMP, alpha, 1j) == pytest.approx(1j, abs=1e-8)


def test_sharp_bounds():
    sb = sch.sharp_bounds(Q0, math.pi / 6, variational=False)
    assert sb.sup_derivative == pytest.approx(2 ** -0.5, abs=1e-8)
    assert sb.sobolev_constant == pytest.approx(2 ** -0.25, abs=1e-8)
    assert sb.product == pytest.approx(0.75, abs=1e-12)
    assert sch.sharp_bounds(Q0, math.pi / 2, variational=False).sup_value == pytest.approx(0, abs=1e-16)


def test_variational_estimate_from_below():
    sb = sch.sharp_bounds(BUMP, 0.0)
    assert 0.98 * sb.sup_derivative <= sb.variational <= sb.sup_derivative * (1 + 1e-9)


@pytest.mark.parametrize("n,which", [(2, "friedrichs"), (3, "friedrichs"), (3, "krein")])
def test_point_interactions(n, which):
    assert sch.point_interaction_m(n, which, 1j) == pytest.approx(1j, abs=1e-15)
    z = 0.4 + 1.3j
    assert sch.point_interaction_m(n, which, z.conjugate()) == pytest.approx(
        np.conj(sch.point_interaction_m(n, which, z)), abs=1e-15)
    zs = [complex(x, y) for x in (-3, 0.1, 4) for y in (0.01, 1, 30)]
    assert hc.verify_herglotz(lambda w: sch.point_interaction_m(n, which, w), zs).passed


def test_point_interaction_closed_values():
    assert sch.point_interaction_m(3, "friedrichs", 2j) == pytest.approx(1j * math.sqrt(2) * (1 + 1j) + 1)
    assert sch.point_interaction_m(2, "friedrichs", complex(-1.0, 1e-300)) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("n,which", [(2, "krein"), (4, "friedrichs"), (3, "other")])
def test_point_interaction_invalid(n, which):
    with pytest.raises(InvalidCombination):
        sch.point_interaction_m(n, which, 1j)
