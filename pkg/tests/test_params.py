import pytest

from shearmhd.params import ConfigError, PhysicalParams, Regime, classify_regime


def test_regime_classification():
    assert classify_regime(1e-6, 0.05) is Regime.NU_LE_MU3
    assert classify_regime(0.02, 0.1) is Regime.MU3_LE_NU_LE_MU13
    assert classify_regime(0.5, 0.05) is Regime.MU13_LE_NU


def test_regime_boundary_ties_go_to_smaller_index():
    mu = 0.2
    assert classify_regime(mu**3, mu) is Regime.NU_LE_MU3
    assert classify_regime(mu ** (1.0 / 3.0), mu) is Regime.MU3_LE_NU_LE_MU13


def test_constant_constraints_enforced():
    with pytest.raises(ConfigError, match="c2"):
        PhysicalParams(nu=0.1, mu=0.1, c2=3000.0)
    with pytest.raises(ConfigError, match="c1"):
        PhysicalParams(nu=0.1, mu=0.1, c1=3.0e6, c2=3001.0)
    with pytest.raises(ConfigError, match="c3"):
        PhysicalParams(nu=0.1, mu=0.1, beta=1.0, c3=1.0)
    with pytest.raises(ConfigError, match="delta0"):
        PhysicalParams(nu=0.1, mu=0.1, beta=1.0, delta0=0.02)
    with pytest.raises(ConfigError, match="nu"):
        PhysicalParams(nu=-1.0, mu=0.1)
    with pytest.raises(ConfigError, match="n"):
        PhysicalParams(nu=0.1, mu=0.1, n=3)


def test_default_constants_satisfy_strict_bounds():
    p = PhysicalParams(nu=0.02, mu=0.1, beta=1.0)
    assert p.c2 > 3000
    assert p.c1 > 1000 * p.c2
    assert p.c3 > p.c1 / (abs(p.beta) - 0.5)
    assert 0 < p.delta0 <= 1.0 / (100 * abs(p.beta))


def test_derived_quantities():
    p = PhysicalParams(nu=0.5, mu=0.008, beta=2.0)
    assert p.lam == 0.008
    assert p.alpha == pytest.approx(0.5 * 0.008 ** (-1.0 / 3.0))
    assert p.regime is Regime.MU13_LE_NU


def test_round_trip_dict():
    p = PhysicalParams(nu=0.02, mu=0.1, beta=1.5)
    q = PhysicalParams.from_dict(p.to_dict())
    assert q == p


def test_coercivity_guard():
    p = PhysicalParams(nu=0.1, mu=0.1, beta=0.4)
    with pytest.raises(ConfigError, match="beta"):
        p.requires_coercive_beta()
