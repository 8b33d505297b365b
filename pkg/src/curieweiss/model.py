"""Model parameters, the 2x2 system state, and validity-regime checks.

Canonical unit system: hbar = 1 and J = 1, so energies are quoted in units
of the magnet coupling J and times in units of hbar/J.  All formulas keep
hbar and J symbolic, so any consistent rescaling works the same way.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import ConfigError, PositivityError, TraceError

#: keys accepted in a flat ``key = value`` parameter file, in canonical order
CONFIG_KEYS = (
    "n_spins",
    "coupling_j",
    "coupling_g",
    "delta_g",
    "temperature",
    "gamma",
    "debye_cutoff",
    "r_uu",
    "re_r_ud",
    "im_r_ud",
)


@dataclass(frozen=True)
class ModelParams:
    """All couplings, sizes and temperatures of the spin + magnet + bath model.

    Attributes
    ----------
    n_spins : int
        N, number of apparatus spins.
    coupling_j : float
        J, quartic magnet coupling (the energy unit).
    coupling_g : float
        g, mean system-apparatus coupling.
    delta_g : float
        RMS spread of the per-spin couplings g_n around g.
    temperature : float
        T, bath temperature (k_B = 1).
    gamma : float
        Dimensionless magnet-bath coupling strength.
    debye_cutoff : float
        Bath frequency cutoff (units of energy/hbar).
    hbar : float
        Kept symbolic in every formula; 1 in canonical units.
    """

    n_spins: int
    coupling_j: float = 1.0
    coupling_g: float = 0.0
    delta_g: float = 0.0
    temperature: float = 0.34
    gamma: float = 0.0
    debye_cutoff: float = 50.0
    hbar: float = 1.0

    def __post_init__(self):
        if int(self.n_spins) != self.n_spins or self.n_spins < 1:
            raise ConfigError(f"n_spins must be a positive integer, got {self.n_spins}")
        object.__setattr__(self, "n_spins", int(self.n_spins))
        for name in ("coupling_j", "temperature", "debye_cutoff", "hbar"):
            v = getattr(self, name)
            if not math.isfinite(v) or v <= 0:
                raise ConfigError(f"{name} must be positive and finite, got {v}")
        for name in ("coupling_g", "delta_g", "gamma"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ConfigError(f"{name} must be non-negative and finite, got {v}")
        # delta_g < g unless the measurement coupling is absent entirely
        if self.coupling_g > 0 and self.delta_g >= self.coupling_g:
            raise ConfigError(
                f"delta_g = {self.delta_g} must be smaller than coupling_g = {self.coupling_g}"
            )

    def canonicalized(self) -> "ModelParams":
        """Same physics expressed in hbar = 1, J = 1 units."""
        j, hb = self.coupling_j, self.hbar
        return replace(
            self,
            coupling_j=1.0,
            coupling_g=self.coupling_g / j,
            delta_g=self.delta_g / j,
            temperature=self.temperature / j,
            debye_cutoff=self.debye_cutoff * hb / j,
            hbar=1.0,
        )

    def with_units(self, coupling_j: float, hbar: float = 1.0) -> "ModelParams":
        """Inverse of :meth:`canonicalized` for the given energy unit."""
        return replace(
            self,
            coupling_j=self.coupling_j * coupling_j,
            coupling_g=self.coupling_g * coupling_j,
            delta_g=self.delta_g * coupling_j,
            temperature=self.temperature * coupling_j,
            debye_cutoff=self.debye_cutoff * coupling_j / hbar * self.hbar,
            hbar=hbar,
        )


@dataclass(frozen=True)
class SystemState2x2:
    """Initial 2x2 density matrix of the measured spin in the up/down basis.

    Construction does not validate; use :func:`validate_state` to enforce
    the density-matrix axioms.
    """

    r_uu: float
    r_dd: float
    r_ud: complex = 0j

    @classmethod
    def from_upper(cls, r_uu: float, r_ud: complex = 0j) -> "SystemState2x2":
        return cls(r_uu=r_uu, r_dd=1.0 - r_uu, r_ud=complex(r_ud))

    @property
    def purity(self) -> float:
        return self.r_uu**2 + self.r_dd**2 + 2 * abs(self.r_ud) ** 2


def validate_state(state: SystemState2x2, tol: float = 1e-12) -> SystemState2x2:
    """Return ``state`` unchanged iff it is a valid density matrix.

    Raises
    ------
    TraceError
        If r_uu + r_dd differs from 1 by more than ``tol``.
    PositivityError
        If the determinant r_uu*r_dd - |r_ud|^2 is below ``-tol`` or a
        diagonal entry is negative.
    """
    tr = state.r_uu + state.r_dd
    if abs(tr - 1.0) > tol:
        raise TraceError(f"trace is {tr!r}, expected 1")
    if state.r_uu < -tol or state.r_dd < -tol:
        raise PositivityError(f"negative diagonal entry: {state.r_uu}, {state.r_dd}")
    det = state.r_uu * state.r_dd - abs(state.r_ud) ** 2
    if det < -tol:
        raise PositivityError(f"negative eigenvalue: det = {det:.3e}")
    return state


@dataclass(frozen=True)
class RegimeCheck:
    """One inequality of the validity regime, with its evaluated sides."""

    name: str
    lhs: float
    rhs: float
    required_factor: float
    passed: bool
    #: lhs / (required_factor * rhs); > 1 means passed, inf when rhs = 0
    margin_ratio: float
    #: whether this check enters overall_valid
    counted: bool = True


@dataclass(frozen=True)
class RegimeReport:
    checks: tuple[RegimeCheck, ...]
    overall_valid: bool
    margin: float

    def check(self, name: str) -> RegimeCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def _mk_check(name, lhs, rhs, factor, counted=True) -> RegimeCheck:
    if rhs == 0.0:
        ratio = math.inf if lhs > 0 else 0.0
    else:
        ratio = lhs / (factor * rhs)
    return RegimeCheck(
        name=name,
        lhs=lhs,
        rhs=rhs,
        required_factor=factor,
        passed=lhs > factor * rhs,
        margin_ratio=ratio,
        counted=counted,
    )


def validate_regime(params: ModelParams, margin: float = 10.0) -> RegimeReport:
    """Evaluate the inequalities under which the model acts as a measurement.

    Each ``X >> Y`` is operationalized as ``X > margin * Y``; the plain
    inequality J > g uses factor 1.  The off-diagonal suppression condition
    has two alternative branches (bath or coupling dispersion); at least one
    must hold.  The smallness of gamma is reported but not counted: the
    chain hbar*Gamma >> T >> gamma*J already bounds it whenever T < J.
    """
    n = float(params.n_spins)
    g, dg = params.coupling_g, params.delta_g
    j, t = params.coupling_j, params.temperature
    hg = params.hbar * params.debye_cutoff

    bath_rhs = (g / hg) ** 2 / params.gamma if params.gamma > 0 else math.inf
    disp_rhs = (g / dg) ** 2 if dg > 0 else math.inf

    if math.isinf(bath_rhs):
        bath = RegimeCheck("n_vs_bath", n, bath_rhs, margin, False, 0.0)
    else:
        bath = _mk_check("n_vs_bath", n, bath_rhs, margin)
    if math.isinf(disp_rhs):
        disp = RegimeCheck("n_vs_dispersion", n, disp_rhs, margin, False, 0.0)
    else:
        disp = _mk_check("n_vs_dispersion", n, disp_rhs, margin)

    checks = (
        _mk_check("n_large", n, 1.0, margin),
        bath,
        disp,
        _mk_check("cutoff_vs_temperature", hg, t, margin),
        _mk_check("temperature_vs_gamma_j", t, params.gamma * j, margin),
        _mk_check("cutoff_vs_j", hg, j, margin),
        _mk_check("j_vs_g", j, g, 1.0),
        _mk_check("gamma_small", 1.0, params.gamma, margin, counted=False),
    )
    by_name = {c.name: c for c in checks}
    overall = (
        by_name["n_large"].passed
        and (by_name["n_vs_bath"].passed or by_name["n_vs_dispersion"].passed)
        and by_name["cutoff_vs_temperature"].passed
        and by_name["temperature_vs_gamma_j"].passed
        and by_name["cutoff_vs_j"].passed
        and by_name["j_vs_g"].passed
    )
    return RegimeReport(checks=checks, overall_valid=overall, margin=margin)


# --- flat key = value configuration files ---------------------------------


def read_config_mapping(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines; '#' starts a comment, blanks ignored."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


def _get_float(mapping: dict[str, str], key: str) -> float:
    try:
        return float(mapping[key])
    except KeyError:
        raise ConfigError(f"missing config key {key!r}") from None
    except ValueError:
        raise ConfigError(f"config key {key!r}: not a number: {mapping[key]!r}") from None


def params_from_mapping(mapping: dict[str, str]) -> tuple[ModelParams, SystemState2x2]:
    """Build (ModelParams, SystemState2x2) from a parsed config mapping."""
    params = ModelParams(
        n_spins=int(_get_float(mapping, "n_spins")),
        coupling_j=_get_float(mapping, "coupling_j"),
        coupling_g=_get_float(mapping, "coupling_g"),
        delta_g=_get_float(mapping, "delta_g"),
        temperature=_get_float(mapping, "temperature"),
        gamma=_get_float(mapping, "gamma"),
        debye_cutoff=_get_float(mapping, "debye_cutoff"),
    )
    r_uu = _get_float(mapping, "r_uu")
    r_ud = complex(_get_float(mapping, "re_r_ud"), _get_float(mapping, "im_r_ud"))
    state = SystemState2x2.from_upper(r_uu, r_ud)
    return params, state


def load_config(path) -> tuple[ModelParams, SystemState2x2]:
    """Read a parameter file; unknown keys are rejected."""
    with open(path, "r", encoding="utf-8") as fh:
        mapping = read_config_mapping(fh.read())
    unknown = set(mapping) - set(CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return params_from_mapping(mapping)
