"""Full measurement scenario: Born weights, final state, entropy balance.

The pipeline assembles what the sub-modules compute separately: regime
validation, magnet statics, the off-diagonal collapse with its damping
mechanisms, both diagonal-sector registrations, the post-measurement state
(branch weights = initial diagonals, pointer at the ferromagnetic value),
and the entropy budget of the whole process.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigError, MeasurementFailed
from .model import ModelParams, RegimeReport, SystemState2x2, validate_regime, validate_state
from . import offdiag, output, registration, statics

LN2 = math.log(2.0)


# --- Born rule and simple state functionals ---------------------------------


def born_probabilities(state: SystemState2x2) -> tuple[float, float]:
    """Outcome probabilities: traces against the up/down eigenprojections."""
    return state.r_uu, state.r_dd


def state_entropy(state: SystemState2x2) -> float:
    """Von Neumann entropy of the 2x2 state, in nats."""
    half_gap = math.sqrt(0.25 * (state.r_uu - state.r_dd) ** 2 + abs(state.r_ud) ** 2)
    lam = (0.5 + half_gap, 0.5 - half_gap)
    s = 0.0
    for p in lam:
        if p > 1e-300:
            s -= p * math.log(p)
    return s


def dephased_entropy(state: SystemState2x2) -> float:
    """Entropy of the state with off-diagonals removed (binary entropy)."""
    s = 0.0
    for p in (state.r_uu, state.r_dd):
        if p > 1e-300:
            s -= p * math.log(p)
    return s


# --- final state -------------------------------------------------------------


@dataclass(frozen=True)
class Branch:
    """One exclusive outcome: weight, projected system block, pointer value."""

    weight: float
    system_block: SystemState2x2
    pointer: float


@dataclass(frozen=True)
class FinalState:
    branches: tuple[Branch, Branch]
    #: log10 of the surviving off-diagonal magnitude at t_final
    log10_offdiag_residual: float
    t_final: float

    @property
    def weights(self) -> tuple[float, float]:
        return self.branches[0].weight, self.branches[1].weight


def _sector_runs(params: ModelParams, t_max: float | None = None, stop_delta: float = 1e-6):
    if t_max is None:
        t_max = 200.0 * params.hbar / (params.gamma * params.temperature)
    up = registration.integrate_registration(+1, params, t_max, stop_delta=stop_delta)
    down = registration.integrate_registration(-1, params, t_max, stop_delta=stop_delta)
    return up, down


def _offdiag_residual_log10(params: ModelParams, state: SystemState2x2,
                            t_final: float, seed: int) -> float:
    if state.r_ud == 0:
        return -math.inf
    log_amp = math.log(abs(state.r_ud))
    if params.gamma > 0:
        log_amp -= params.n_spins * offdiag.bath_exponent(t_final, params)
    if params.delta_g > 0:
        couplings = offdiag.sample_couplings(params, seed)
        logmag, _ = offdiag.envelope_dispersed_log(t_final, couplings, params.hbar)
    else:
        logmag, _ = offdiag.envelope_uniform_log(t_final, params)
    return (log_amp + logmag) / math.log(10.0)


def assemble_final_state(
    state: SystemState2x2,
    params: ModelParams,
    seed: int = 0,
    sector_up: registration.MagnetizationTrajectory | None = None,
    sector_down: registration.MagnetizationTrajectory | None = None,
) -> FinalState:
    """Post-measurement state: two exclusive branches and the dead off-diagonal.

    Registration must succeed in both sectors (g > g_c); the final time is
    max(3 tau_reg, both sector stop times), late enough that every reported
    residual is astronomically small.
    """
    validate_state(state)
    if sector_up is None or sector_down is None:
        up, down = _sector_runs(params)
    else:
        up, down = sector_up, sector_down
    for traj in (up, down):
        if traj.terminal is not registration.TerminalKind.CONVERGED_FERRO:
            raise MeasurementFailed(
                f"sector {traj.field_sign:+d} ended {traj.terminal.value} "
                f"at m = {traj.m_final:.4f}"
            )
    tau_reg = registration.registration_time_quadrature(params)
    t_final = max(3.0 * tau_reg, float(up.times[-1]), float(down.times[-1]))

    p_up, p_down = born_probabilities(state)
    branches = (
        Branch(weight=p_up, system_block=SystemState2x2(1.0, 0.0, 0j), pointer=up.m_final),
        Branch(weight=p_down, system_block=SystemState2x2(0.0, 1.0, 0j), pointer=down.m_final),
    )
    return FinalState(
        branches=branches,
        log10_offdiag_residual=_offdiag_residual_log10(params, state, t_final, seed),
        t_final=t_final,
    )


def pointer_correlation(final_state: FinalState, params: ModelParams) -> tuple[float, float]:
    """Per-branch conditional pointer variance p_i (1 - m_i^2)/N.

    The magnet's product state gives the magnetization a variance
    (1 - m^2)/N, so the pointer reads the outcome up to fluctuations that
    vanish for a macroscopic apparatus.
    """
    return tuple(
        b.weight * (1.0 - b.pointer**2) / params.n_spins for b in final_state.branches
    )


# --- entropy budget -----------------------------------------------------------


@dataclass(frozen=True)
class EntropyBudget:
    """All entropies in nats; magnet and bath terms are extensive (order N)."""

    s_system_initial: float
    s_system_final: float
    s_magnet_initial: float
    s_magnet_final: float
    bath_entropy_change: float
    delta_total: float


def entropy_budget(
    state: SystemState2x2, params: ModelParams, final_state: FinalState
) -> EntropyBudget:
    """Entropy before and after the measurement.

    The magnet starts fully mixed (N ln 2) and ends in a ferromagnetic
    product state with per-spin mixing entropy S(m_f).  The bath term is the
    quasi-static estimate  sum_i p_i (E_M(0) - E_M(m_i) + g N |m_i|)/T  for
    dumping the released magnet + coupling energy at temperature T; it is an
    estimate, labelled as such in run manifests.
    """
    n = params.n_spins
    j, g, t = params.coupling_j, params.coupling_g, params.temperature
    s_sys_0 = state_entropy(state)
    s_sys_f = dephased_entropy(state)
    s_mag_0 = n * LN2
    s_mag_f = 0.0
    bath = 0.0
    for b in final_state.branches:
        s_mag_f += b.weight * n * statics.mixing_entropy(b.pointer)
        e_released = 0.25 * j * n * b.pointer**4 + g * n * abs(b.pointer)
        bath += b.weight * e_released / t
    delta = (s_sys_f - s_sys_0) + (s_mag_f - s_mag_0) + bath
    return EntropyBudget(
        s_system_initial=s_sys_0,
        s_system_final=s_sys_f,
        s_magnet_initial=s_mag_0,
        s_magnet_final=s_mag_f,
        bath_entropy_change=bath,
        delta_total=delta,
    )


# --- run configuration and orchestration --------------------------------------


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    state: SystemState2x2
    t_max: float | None = None
    samples: int = 400
    spacing: str = "log"  # collapse phenomena span several decades in t
    bath: bool | None = None
    dispersion: bool | None = None
    seed: int = 0
    out_dir: str | None = None
    margin: float = 10.0

    def resolved(self) -> "RunConfig":
        """Fill mechanism toggles from the parameters and check consistency."""
        bath = self.params.gamma > 0 if self.bath is None else self.bath
        disp = self.params.delta_g > 0 if self.dispersion is None else self.dispersion
        if bath and self.params.gamma == 0:
            raise ConfigError("bath mechanism requested but gamma = 0")
        if disp and self.params.delta_g == 0:
            raise ConfigError("dispersion mechanism requested but delta_g = 0")
        if self.spacing not in ("linear", "log"):
            raise ConfigError(f"spacing must be 'linear' or 'log', got {self.spacing!r}")
        if self.samples < 2:
            raise ConfigError("samples must be at least 2")
        return replace(self, bath=bath, dispersion=disp)


@dataclass(frozen=True)
class Timescales:
    tau_red: float
    tau_2: float | None
    tau_2_prime: float | None
    log10_recurrence_bath: float | None
    log10_recurrence_dispersion: float | None
    tau_reg_quadrature: float | None
    tau_reg_asymptotic: float | None


@dataclass(frozen=True)
class ScenarioReport:
    status: str  # completed | measurement_failed | not_a_measurement
    reason: str | None
    regime: RegimeReport
    landscape_up: statics.Landscape
    critical_g: float | None
    timescales: Timescales | None
    offdiag: offdiag.OffDiagTrajectory | None
    sector_up: registration.MagnetizationTrajectory | None
    sector_down: registration.MagnetizationTrajectory | None
    final_state: FinalState | None
    entropy: EntropyBudget | None
    config: RunConfig


def _time_grid(cfg: RunConfig, t_hi: float) -> np.ndarray:
    if cfg.spacing == "linear":
        return np.linspace(0.0, t_hi, cfg.samples)
    t_lo = t_hi * 1e-4
    grid = np.geomspace(t_lo, t_hi, cfg.samples - 1)
    return np.concatenate([[0.0], grid])


def run_scenario(config: RunConfig) -> ScenarioReport:
    """Execute the full measurement pipeline for one configuration.

    A trapped sector reports status "measurement_failed" rather than raising;
    g = 0 (no coupling) and gamma = 0 (no bath, hence no registration) are
    reported as "not_a_measurement".  If the config names an output
    directory, all artifacts are persisted there with a manifest.
    """
    report = _run_scenario_inner(config)
    if config.out_dir is not None:
        write_run(report, config.out_dir)
    return report


def _run_scenario_inner(config: RunConfig) -> ScenarioReport:
    cfg = config.resolved()
    params, state = cfg.params, cfg.state
    validate_state(state)
    regime = validate_regime(params, margin=cfg.margin)
    scape = statics.stationary_magnetizations(+1, params)
    try:
        g_c = statics.critical_coupling(params)
    except Exception:
        g_c = None

    base = dict(regime=regime, landscape_up=scape, critical_g=g_c, config=cfg)

    if params.coupling_g == 0:
        return ScenarioReport(
            status="not_a_measurement",
            reason="no system-apparatus coupling (g = 0): nothing is measured",
            timescales=None, offdiag=None, sector_up=None, sector_down=None,
            final_state=None, entropy=None, **base,
        )

    tau_red = offdiag.reduction_time(params)
    tau_2 = offdiag.decay_time_bath(params) if cfg.bath else None
    tau_2p = offdiag.dispersion_decay_time(params) if cfg.dispersion else None
    log_rec_bath = offdiag.log_recurrence_height_bath(params) if cfg.bath else None
    log_rec_disp = (
        offdiag.log_recurrence_height_dispersed(params) if cfg.dispersion else None
    )

    if not cfg.bath:
        # dispersion alone kills the off-diagonal blocks but cannot relax the
        # magnet: the diagonal sectors never register without the bath
        timescales = Timescales(
            tau_red=tau_red, tau_2=None, tau_2_prime=tau_2p,
            log10_recurrence_bath=None,
            log10_recurrence_dispersion=(
                log_rec_disp / math.log(10.0) if log_rec_disp is not None else None
            ),
            tau_reg_quadrature=None, tau_reg_asymptotic=None,
        )
        couplings = offdiag.sample_couplings(params, cfg.seed) if cfg.dispersion else None
        t_hi = cfg.t_max if cfg.t_max is not None else 1.2 * math.pi * params.hbar / params.coupling_g
        traj = offdiag.offdiag_trajectory(
            params, state.r_ud, _time_grid(cfg, t_hi), couplings=couplings,
            include_bath=False,
        )
        return ScenarioReport(
            status="not_a_measurement",
            reason="no bath (gamma = 0): off-diagonal blocks die but the "
                   "magnet cannot relax, so nothing is registered",
            timescales=timescales, offdiag=traj,
            sector_up=None, sector_down=None, final_state=None, entropy=None,
            **base,
        )

    try:
        tau_reg_q = registration.registration_time_quadrature(params)
        tau_reg_a = registration.registration_time_asymptotic(params)
    except Exception:
        tau_reg_q = tau_reg_a = None

    up, down = _sector_runs(params, t_max=cfg.t_max)

    t_final_scale = max(
        3.0 * tau_reg_q if tau_reg_q else 0.0, float(up.times[-1]), float(down.times[-1])
    )
    couplings = offdiag.sample_couplings(params, cfg.seed) if cfg.dispersion else None
    traj = offdiag.offdiag_trajectory(
        params, state.r_ud, _time_grid(cfg, t_final_scale), couplings=couplings,
    )
    timescales = Timescales(
        tau_red=tau_red,
        tau_2=tau_2,
        tau_2_prime=tau_2p,
        log10_recurrence_bath=(
            log_rec_bath / math.log(10.0) if log_rec_bath is not None else None
        ),
        log10_recurrence_dispersion=(
            log_rec_disp / math.log(10.0) if log_rec_disp is not None else None
        ),
        tau_reg_quadrature=tau_reg_q,
        tau_reg_asymptotic=tau_reg_a,
    )

    try:
        final = assemble_final_state(
            state, params, seed=cfg.seed, sector_up=up, sector_down=down
        )
    except MeasurementFailed as exc:
        return ScenarioReport(
            status="measurement_failed", reason=str(exc),
            timescales=timescales, offdiag=traj, sector_up=up, sector_down=down,
            final_state=None, entropy=None, **base,
        )
    budget = entropy_budget(state, params, final)
    return ScenarioReport(
        status="completed", reason=None,
        timescales=timescales, offdiag=traj, sector_up=up, sector_down=down,
        final_state=final, entropy=budget, **base,
    )


# --- persistence ---------------------------------------------------------------


def _config_payload(cfg: RunConfig) -> dict:
    p, s = cfg.params, cfg.state
    return {
        "n_spins": p.n_spins,
        "coupling_j": p.coupling_j,
        "coupling_g": p.coupling_g,
        "delta_g": p.delta_g,
        "temperature": p.temperature,
        "gamma": p.gamma,
        "debye_cutoff": p.debye_cutoff,
        "r_uu": s.r_uu,
        "r_dd": s.r_dd,
        "re_r_ud": s.r_ud.real,
        "im_r_ud": s.r_ud.imag,
        "t_max": cfg.t_max,
        "samples": cfg.samples,
        "spacing": cfg.spacing,
        "bath": cfg.bath,
        "dispersion": cfg.dispersion,
        "seed": cfg.seed,
        "margin": cfg.margin,
    }


def _regime_payload(regime: RegimeReport) -> dict:
    return {
        "margin": regime.margin,
        "overall_valid": regime.overall_valid,
        "checks": [
            {
                "name": c.name,
                "lhs": c.lhs,
                "rhs": c.rhs,
                "required_factor": c.required_factor,
                "passed": c.passed,
                "margin_ratio": c.margin_ratio,
                "counted": c.counted,
            }
            for c in regime.checks
        ],
    }


def write_offdiag_csv(path, traj: offdiag.OffDiagTrajectory) -> None:
    header = ["t", "re_r", "im_r", "log10_abs_r", "osc_factor", "bath_factor",
              "dispersion_factor"]
    rows = [
        [float(t), float(a.real), float(a.imag), float(l), float(o), float(b), float(d)]
        for t, a, l, o, b, d in zip(
            traj.times, traj.amplitude, traj.log10_abs, traj.osc_factor,
            traj.bath_factor, traj.dispersion_factor,
        )
    ]
    output.write_csv(path, header, rows)


def write_registration_csv(path, traj, params: ModelParams) -> None:
    header = ["t", "m", "dm_dt", "free_energy"]
    rows = []
    for t, m in zip(traj.times, traj.m):
        rate = registration.registration_rhs(float(m), traj.field_sign, params) if abs(m) < 1 else 0.0
        rows.append([float(t), float(m), rate, float(statics.free_energy(float(m), traj.field_sign, params))])
    output.write_csv(path, header, rows)


def write_run(report: ScenarioReport, out_dir) -> dict:
    """Persist all artifacts of a scenario run; returns the manifest payload."""
    os.makedirs(out_dir, exist_ok=True)
    cfg = report.config
    params = cfg.params

    m, f_up, f_down = statics.landscape_table(params)
    output.write_csv(
        os.path.join(out_dir, "landscape.csv"),
        ["m", "F_up", "F_down"],
        zip(m.tolist(), f_up.tolist(), f_down.tolist()),
    )
    output.write_dat(os.path.join(out_dir, "landscape_up.dat"), [m.tolist(), f_up.tolist()])

    stages = {"regime": "done", "statics": "done"}
    if report.offdiag is not None:
        write_offdiag_csv(os.path.join(out_dir, "offdiag.csv"), report.offdiag)
        output.write_dat(
            os.path.join(out_dir, "offdiag_log10.dat"),
            [report.offdiag.times.tolist(), report.offdiag.log10_abs.tolist()],
        )
        stages["collapse"] = "done"
    else:
        stages["collapse"] = "skipped"
    for name, traj in (("up", report.sector_up), ("down", report.sector_down)):
        if traj is not None:
            write_registration_csv(
                os.path.join(out_dir, f"registration_{name}.csv"), traj, params
            )
            output.write_dat(
                os.path.join(out_dir, f"registration_{name}.dat"),
                [traj.times.tolist(), traj.m.tolist()],
            )
            stages[f"registration_{name}"] = traj.terminal.value
        else:
            stages[f"registration_{name}"] = "unavailable"

    payload: dict = {
        "status": report.status,
        "reason": report.reason,
        "config": _config_payload(cfg),
        "stages": stages,
        "regime": _regime_payload(report.regime),
        "statics": {
            "critical_g": report.critical_g,
            "stationary_points": [
                {"m": p.m, "free_energy": p.free_energy, "kind": p.kind.value,
                 "label": p.label.value}
                for p in report.landscape_up.points
            ],
        },
    }
    if report.timescales is not None:
        ts = report.timescales
        payload["timescales"] = {
            "tau_red": ts.tau_red,
            "tau_2": ts.tau_2,
            "tau_2_prime": ts.tau_2_prime,
            "log10_recurrence_bath": ts.log10_recurrence_bath,
            "log10_recurrence_dispersion": ts.log10_recurrence_dispersion,
            "tau_reg_quadrature": ts.tau_reg_quadrature,
            "tau_reg_asymptotic": ts.tau_reg_asymptotic,
        }
    if report.final_state is not None:
        fs = report.final_state
        payload["final_state"] = {
            "t_final": fs.t_final,
            "log10_offdiag_residual": fs.log10_offdiag_residual,
            "branches": [
                {"weight": b.weight, "pointer": b.pointer,
                 "r_uu": b.system_block.r_uu, "r_dd": b.system_block.r_dd}
                for b in fs.branches
            ],
            "pointer_variance": list(pointer_correlation(fs, params)),
        }
    if report.entropy is not None:
        e = report.entropy
        payload["entropy"] = {
            "s_system_initial": e.s_system_initial,
            "s_system_final": e.s_system_final,
            "s_magnet_initial": e.s_magnet_initial,
            "s_magnet_final": e.s_magnet_final,
            "bath_entropy_change_estimate": e.bath_entropy_change,
            "delta_total": e.delta_total,
        }
    if report.sector_up is not None:
        payload["registration_summary"] = _registration_summary(report, params)

    payload["files"] = []
    output.write_json(os.path.join(out_dir, "manifest.json"), payload)
    payload["files"] = output.file_inventory(out_dir)
    output.write_json(os.path.join(out_dir, "manifest.json"), payload)
    return payload


def _registration_summary(report: ScenarioReport, params: ModelParams) -> dict:
    up = report.sector_up
    summary: dict = {
        "terminal_up": up.terminal.value,
        "terminal_down": report.sector_down.terminal.value,
        "m_final_up": up.m_final,
        "m_final_down": report.sector_down.m_final,
    }
    threshold = registration.registration_threshold(params)
    summary["threshold"] = threshold
    try:
        summary["crossing_time"] = registration.crossing_time(up, threshold)
        # sensitivity of the operational registration time to the threshold
        summary["crossing_time_low"] = registration.crossing_time(up, 0.8 * threshold)
        summary["crossing_time_high"] = registration.crossing_time(up, 1.25 * threshold)
    except Exception:
        summary["crossing_time"] = None
    try:
        fit = registration.asymptotic_rate(up, params)
        summary["tail_rate_fitted"] = fit.fitted
        summary["tail_rate_predicted"] = fit.predicted
    except Exception:
        summary["tail_rate_fitted"] = None
    return summary
