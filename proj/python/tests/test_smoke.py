import math

import numpy as np
import pytest

import qbath


def resonant():
    return qbath.explicit_model(1.0, [1.0], [0.5], coupling="rwa")


def test_validate_decoupled():
    m = qbath.explicit_model(1.0, [2.0], [0.0])
    assert qbath.validate_model(m) == pytest.approx(0.5, abs=1e-14)


def test_resonant_closed_form():
    t = np.linspace(0.0, 10.0, 41)
    p = qbath.propagate(resonant(), t)
    expected = np.exp(-1j * t) * np.cos(0.5 * t)
    assert np.max(np.abs(p.A - expected)) < 1e-10
    assert np.max(np.abs(p.sum_rule_defect())) < 1e-12
    assert p.B.shape == (41, 1)


def test_ohmic_sum_rule_and_plateau():
    m = qbath.ohmic_model(64, coupling="position_position")
    p = qbath.propagate(m, np.linspace(0.0, 20.0, 201), threads=2)
    assert np.max(np.abs(p.sum_rule_defect())) < 1e-10
    begin, end = p.plateau_window()
    assert 0 < begin < end <= len(p)


def test_purity_matches_rwa_oracle():
    t = np.linspace(0.0, 2 * math.pi, 9)
    p = qbath.propagate(resonant(), t)
    vacuum = qbath.CoherentState(np.zeros(1))
    cat = qbath.CatState(2.0, -2.0)
    for i in range(len(t)):
        x = min(1.0, abs(p.A[i]) ** 2)
        assert qbath.purity(p, i, vacuum, cat) == pytest.approx(qbath.purity_cat_rwa(x, 2.0, -2.0), abs=1e-7)
        sq = qbath.SqueezedDisplaced(0.3, 1.0, 0.2)
        assert qbath.purity(p, i, vacuum, sq) == pytest.approx(qbath.purity_squeezed_rwa(x, 1.0), abs=1e-7)


def test_moments_and_generator():
    m = qbath.ohmic_model(16)
    p = qbath.propagate(m, [0.0, 2.0])
    bath = qbath.Equilibrium(1.0)
    state = qbath.SqueezedDisplaced(0.5 + 0.2j, 0.3, 0.0)
    mom = qbath.moments(p, 1, bath, state)
    assert mom["var_x"] * mom["var_p"] >= 0.25 * (1 - 1e-9)
    assert 0.0 < mom["purity"] <= 1.0
    g = qbath.gaussian_generator(p, 1, bath)
    assert g["valid"] and g["sigma"] == 0
    residual, flagged = qbath.generator_residual(p, 1, bath, state)
    assert residual < 1e-8 and flagged == 0


def test_samplers_are_seeded():
    m = qbath.ohmic_model(8)
    a = qbath.sample_number_state(1.0, m, 7)
    b = qbath.sample_number_state(1.0, m, 7)
    assert a.n == b.n and len(a.n) == 8
    c = qbath.sample_coherent_state(1.0, m, 7)
    assert c.amps.shape == (8,)


def test_errors_map_to_python():
    with pytest.raises(ValueError):
        qbath.explicit_model(-1.0, [1.0], [0.0])
    with pytest.raises(ValueError):
        qbath.propagate(resonant(), [0.5, 1.0])
    with pytest.raises(qbath.NumericalError):
        qbath.propagate(qbath.explicit_model(1.0, [1e15], [1e-3], coupling="position_position"), [0.0, 1.0])
