import math

import pytest

from curieweiss.errors import ConfigError, PositivityError, TraceError
from curieweiss.model import (
    ModelParams,
    SystemState2x2,
    load_config,
    read_config_mapping,
    validate_regime,
    validate_state,
)

REF = dict(
    n_spins=100000, coupling_j=1.0, coupling_g=0.09, delta_g=0.0,
    temperature=0.34, gamma=1e-3, debye_cutoff=50.0,
)


def test_params_accept_reference_point():
    p = ModelParams(**REF)
    assert p.n_spins == 100000
    assert p.hbar == 1.0


@pytest.mark.parametrize(
    "bad",
    [
        dict(n_spins=0),
        dict(n_spins=2.5),
        dict(coupling_j=0.0),
        dict(coupling_j=-1.0),
        dict(temperature=0.0),
        dict(gamma=-1e-3),
        dict(coupling_g=-0.1),
        dict(debye_cutoff=0.0),
        dict(delta_g=0.09),            # must stay below coupling_g
        dict(delta_g=float("nan")),
    ],
)
def test_params_reject_invalid(bad):
    with pytest.raises(ConfigError):
        ModelParams(**{**REF, **bad})


def test_delta_g_unconstrained_when_g_zero():
    ModelParams(**{**REF, "coupling_g": 0.0, "delta_g": 0.5})


def test_unit_round_trip_is_identity():
    p = ModelParams(n_spins=50, coupling_j=2.7, coupling_g=0.11, delta_g=0.01,
                    temperature=0.9, gamma=2e-3, debye_cutoff=80.0)
    q = p.canonicalized().with_units(coupling_j=2.7)
    for name in ("coupling_j", "coupling_g", "delta_g", "temperature", "debye_cutoff", "gamma", "hbar"):
        a, b = getattr(p, name), getattr(q, name)
        assert a == pytest.approx(b, rel=1e-14), name


def test_validate_state_pure_eigenstate():
    validate_state(SystemState2x2(1.0, 0.0, 0j))


def test_validate_state_pure_superposition_boundary():
    validate_state(SystemState2x2(0.5, 0.5, 0.5 + 0j))


def test_validate_state_positivity_violation():
    with pytest.raises(PositivityError):
        validate_state(SystemState2x2(0.5, 0.5, 0.6 + 0j))


def test_validate_state_trace_violation():
    with pytest.raises(TraceError):
        validate_state(SystemState2x2(0.6, 0.5, 0j))


def test_regime_reference_point_passes():
    rep = validate_regime(ModelParams(**REF))
    assert rep.overall_valid
    bath = rep.check("n_vs_bath")
    # (1/gamma)(g/hbar Gamma)^2 = 1000 * (0.09/50)^2
    assert bath.rhs == pytest.approx(1000 * (0.09 / 50.0) ** 2, rel=1e-12)
    assert bath.rhs == pytest.approx(3.24e-3, rel=1e-10)
    assert bath.passed
    assert not rep.check("n_vs_dispersion").passed  # delta_g = 0 branch is off


def test_regime_small_n_fails_at_margin_10():
    rep = validate_regime(ModelParams(**{**REF, "n_spins": 10}))
    assert not rep.check("n_large").passed  # 10 > 10*1 is false: strict margin
    assert not rep.overall_valid


def test_regime_dispersion_branch():
    p = ModelParams(**{**REF, "gamma": 0.0, "delta_g": 0.01})
    rep = validate_regime(p)
    disp = rep.check("n_vs_dispersion")
    assert disp.rhs == pytest.approx((0.09 / 0.01) ** 2)  # = 81
    assert disp.passed
    assert not rep.check("n_vs_bath").passed
    assert rep.overall_valid


def test_regime_gamma_small_reported_not_counted():
    rep = validate_regime(ModelParams(**REF))
    gam = rep.check("gamma_small")
    assert not gam.counted
    assert gam.passed


def test_regime_deterministic():
    a = validate_regime(ModelParams(**REF))
    b = validate_regime(ModelParams(**REF))
    assert a == b


CONFIG_TEXT = """\
# reference point
n_spins      = 100000
coupling_j   = 1.0
coupling_g   = 0.09
delta_g      = 0.0
temperature  = 0.34
gamma        = 1e-3
debye_cutoff = 50.0
r_uu         = 0.5
re_r_ud      = 0.5
im_r_ud      = 0.0
"""


def test_config_parsing(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(CONFIG_TEXT)
    params, state = load_config(path)
    assert params.coupling_g == 0.09
    assert params.n_spins == 100000
    assert state.r_uu == 0.5
    assert state.r_dd == 0.5
    assert state.r_ud == 0.5 + 0j


def test_config_rejects_unknown_key(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(CONFIG_TEXT + "bogus = 1\n")
    with pytest.raises(ConfigError):
        load_config(path)


def test_config_rejects_missing_key(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("n_spins = 10\n")
    with pytest.raises(ConfigError):
        load_config(path)


def test_config_mapping_comments_and_duplicates():
    assert read_config_mapping("a = 1 # trailing\n\n# full line\nb=2") == {"a": "1", "b": "2"}
    with pytest.raises(ConfigError):
        read_config_mapping("a = 1\na = 2")
    with pytest.raises(ConfigError):
        read_config_mapping("just words")


def test_regime_margin_ratio_infinite_when_rhs_zero():
    p = ModelParams(**{**REF, "gamma": 0.0, "delta_g": 0.01})
    rep = validate_regime(p)
    assert math.isinf(rep.check("temperature_vs_gamma_j").margin_ratio)
