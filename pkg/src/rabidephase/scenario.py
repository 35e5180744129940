"""Scenario configuration, presets, serialization and comparison reports.

A scenario is a flat INI file::

    [scenario]
    name = fig1

    [model]
    omega = 1.0
    Omega = 1.0
    g = 0.04
    gamma_a = 0.08
    gamma_c = 0.0

    [initial]
    kind = fock            ; fock | thermal
    n_photons = 0          ; fock only
    nbar = 0.0             ; thermal only
    atom = g               ; g | e

    [grid]
    n_max = 40
    gt_final = 300.0
    gt_step = 1.0
    snapshots = 300.0

    [engines]
    enabled = exact, effective

    [exact]                ; same keys for [effective]
    rtol = 1e-08
    atol = 1e-10
    fixed_step_gt = none   ; RK4 step in gt units, or none for adaptive

    [oracle]
    max_n_max = 12

    [report]
    ...

Times are given in units of gt; the solvers integrate in t = gt / g.
"""
from __future__ import annotations

import configparser
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field, fields, replace
from itertools import combinations
from pathlib import Path

import numpy as np

from ._integrate import Tolerances
from .effective import integrate_effective
from .errors import ConfigError, InsufficientPointsError, ShapeMismatchError
from .exact import DEFAULT_TRUNCATION_THRESHOLD, integrate_exact
from .observables import (SCALAR_FIELDS, TimeSeries, as_series, asymptotic_predictions,
                          fit_linear_slope, fit_quadratic_coeff, moment_identity_residual)
from .oracle import integrate_oracle
from .params import ModelParams, dephasing_rates
from .states import fock_atom_state, thermal_atom_state

ENGINES = ("exact", "effective", "oracle")
TIMESERIES_COLUMNS = SCALAR_FIELDS


@dataclass(frozen=True)
class InitialState:
    kind: str = "fock"
    n_photons: int = 0
    nbar: float = 0.0
    atom_excited: bool = False

    def build(self, n_max: int):
        if self.kind == "fock":
            return fock_atom_state(self.n_photons, self.atom_excited, n_max)
        return thermal_atom_state(self.nbar, self.atom_excited, n_max)


@dataclass(frozen=True)
class EngineSettings:
    rtol: float = 1e-8
    atol: float = 1e-10
    fixed_step_gt: float | None = None

    def tolerances(self, g: float) -> Tolerances:
        step = None if self.fixed_step_gt is None else self.fixed_step_gt / g
        return Tolerances(self.rtol, self.atol, step)


@dataclass(frozen=True)
class ReportSettings:
    """Thresholds used by :func:`comparison_report`.

    ``agreement_from_gt`` splits the run into a transient part and a late part
    for engine-vs-engine comparisons; the asymptotic fits use the final
    ``tail_fraction`` of the run.
    """

    agreement_from_gt: float = 50.0
    agreement_rtol: float = 0.02
    dist_rtol: float = 0.02
    transient_rtol: float = 0.02
    tail_fraction: float = 0.5
    slope_rtol: float = 0.01
    constancy_atol_per_gt: float = 1e-6
    pe_plus_nsz_rtol: float = 0.05
    n2sz_ratio_rtol: float = 0.02
    quadratic_rtol: float = 0.10
    identity_tail_rtol: float = 0.01


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    omega: float
    Omega: float
    g: float
    gamma_a: float
    gamma_c: float
    initial: InitialState
    n_max: int
    gt_final: float
    gt_step: float = 1.0
    snapshots: tuple = ()
    engines: tuple = ("exact", "effective")
    exact: EngineSettings = EngineSettings()
    effective: EngineSettings = EngineSettings()
    oracle_max_n_max: int = 12
    truncation_threshold: float = DEFAULT_TRUNCATION_THRESHOLD
    report: ReportSettings = ReportSettings()
    output_dir: str = "output"

    def __post_init__(self):
        if not self.engines:
            raise ConfigError("[engines] enabled: at least one engine is required")
        unknown = set(self.engines) - set(ENGINES)
        if unknown:
            raise ConfigError(f"[engines] enabled: unknown engine(s) {sorted(unknown)}")
        if self.gt_final <= 0:
            raise ConfigError("[grid] gt_final must be positive")
        if self.gt_step <= 0:
            raise ConfigError("[grid] gt_step must be positive")
        if self.g == 0:
            raise ConfigError("[model] g: time is measured in gt, so g must be nonzero")
        try:
            self.params
        except ValueError as exc:
            raise ConfigError(f"[model] {exc}") from None
        if self.n_max < 1:
            raise ConfigError("[grid] n_max must be at least 1")
        if "oracle" in self.engines and self.n_max > self.oracle_max_n_max:
            raise ConfigError(f"[grid] n_max={self.n_max} exceeds the oracle cap "
                              f"{self.oracle_max_n_max}")
        if self.initial.kind not in ("fock", "thermal"):
            raise ConfigError(f"[initial] kind: expected fock or thermal, got {self.initial.kind!r}")
        grid = self.gt_grid()
        for s in self.snapshots:
            if np.min(np.abs(grid - s)) > 1e-9 * max(1.0, s):
                raise ConfigError(f"[grid] snapshots: {s} is not on the output grid")

    @property
    def params(self) -> ModelParams:
        return ModelParams(self.omega, self.Omega, self.g, self.gamma_a, self.gamma_c)

    def gt_grid(self) -> np.ndarray:
        n = int(round(self.gt_final / self.gt_step))
        grid = self.gt_step * np.arange(n + 1)
        if abs(grid[-1] - self.gt_final) > 1e-9 * self.gt_final:
            raise ConfigError("[grid] gt_final must be a multiple of gt_step")
        grid[-1] = self.gt_final
        return grid

    def with_overrides(self, **changes) -> "ScenarioConfig":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})

    def to_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# presets

_G = 0.04
_FIGURE_MODEL = dict(omega=1.0, g=_G, gamma_a=2 * _G, gamma_c=0.0)


def preset(name: str) -> ScenarioConfig:
    """Built-in scenarios: ``fig1`` (resonant, vacuum), ``fig2`` (dispersive,
    Omega = omega - 20 g, vacuum) and ``fig3`` (resonant, thermal field with
    nbar = 0.3 and excited atom)."""
    common = dict(gt_final=300.0, gt_step=1.0, snapshots=(300.0,), **_FIGURE_MODEL)
    if name == "fig1":
        return ScenarioConfig(name="fig1", Omega=1.0, initial=InitialState("fock"),
                              n_max=40, **common)
    if name == "fig2":
        return ScenarioConfig(name="fig2", Omega=1.0 - 20 * _G, initial=InitialState("fock"),
                              n_max=50, **common)
    if name == "fig3":
        return ScenarioConfig(name="fig3", Omega=1.0,
                              initial=InitialState("thermal", nbar=0.3, atom_excited=True),
                              n_max=40, **common)
    raise ConfigError(f"unknown preset {name!r}; choose from fig1, fig2, fig3")


PRESETS = ("fig1", "fig2", "fig3")


# ---------------------------------------------------------------------------
# INI round trip

def _fmt(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (tuple, list)):
        return ", ".join(_fmt(v) for v in value)
    return str(value)


def config_to_ini(cfg: ScenarioConfig) -> str:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    cp["scenario"] = {"name": cfg.name}
    cp["model"] = {k: _fmt(getattr(cfg, k)) for k in ("omega", "Omega", "g", "gamma_a", "gamma_c")}
    ini = cfg.initial
    cp["initial"] = {"kind": ini.kind, "n_photons": str(ini.n_photons), "nbar": _fmt(ini.nbar),
                     "atom": "e" if ini.atom_excited else "g"}
    cp["grid"] = {"n_max": str(cfg.n_max), "gt_final": _fmt(cfg.gt_final),
                  "gt_step": _fmt(cfg.gt_step), "snapshots": _fmt(tuple(cfg.snapshots)),
                  "truncation_threshold": _fmt(cfg.truncation_threshold)}
    cp["engines"] = {"enabled": ", ".join(cfg.engines)}
    for engine in ("exact", "effective"):
        es = getattr(cfg, engine)
        cp[engine] = {"rtol": _fmt(es.rtol), "atol": _fmt(es.atol),
                      "fixed_step_gt": _fmt(es.fixed_step_gt)}
    cp["oracle"] = {"max_n_max": str(cfg.oracle_max_n_max)}
    cp["report"] = {f.name: _fmt(getattr(cfg.report, f.name)) for f in fields(ReportSettings)}
    cp["output"] = {"directory": cfg.output_dir}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


class _Reader:
    def __init__(self, cp, base: ScenarioConfig | None):
        self.cp = cp
        self.base = base

    def get(self, section, key, conv, default):
        if not self.cp.has_option(section, key):
            if default is _REQUIRED:
                raise ConfigError(f"[{section}] {key}: missing required field")
            return default
        raw = self.cp.get(section, key).strip()
        try:
            return conv(raw)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"[{section}] {key} = {raw!r}: {exc}") from None


_REQUIRED = object()


def _float(raw):
    value = float(raw)
    if not math.isfinite(value):
        raise ValueError("must be finite")
    return value


def _opt_float(raw):
    return None if raw.lower() in ("none", "") else _float(raw)


def _floats(raw):
    return tuple(_float(x) for x in raw.split(",") if x.strip())


def _names(raw):
    return tuple(x.strip() for x in raw.split(",") if x.strip())


def _atom(raw):
    if raw not in ("g", "e"):
        raise ValueError("expected g or e")
    return raw == "e"


def parse_config(text: str, base: ScenarioConfig | None = None) -> ScenarioConfig:
    """Parse INI text; missing fields fall back to ``base`` (e.g. a preset)."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax error: {exc}") from None
    if base is None and cp.has_option("scenario", "preset"):
        base = preset(cp.get("scenario", "preset").strip())
    r = _Reader(cp, base)

    def dflt(attr, sub=None):
        if base is None:
            return _REQUIRED
        obj = getattr(base, attr)
        return getattr(obj, sub) if sub else obj

    def engine(name):
        d = EngineSettings() if base is None else getattr(base, name)
        return EngineSettings(rtol=r.get(name, "rtol", _float, d.rtol),
                              atol=r.get(name, "atol", _float, d.atol),
                              fixed_step_gt=r.get(name, "fixed_step_gt", _opt_float, d.fixed_step_gt))

    rep_base = ReportSettings() if base is None else base.report
    report = ReportSettings(**{f.name: r.get("report", f.name, _float, getattr(rep_base, f.name))
                               for f in fields(ReportSettings)})
    init_base = InitialState() if base is None else base.initial
    initial = InitialState(
        kind=r.get("initial", "kind", str, init_base.kind if base else "fock"),
        n_photons=r.get("initial", "n_photons", int, init_base.n_photons),
        nbar=r.get("initial", "nbar", _float, init_base.nbar),
        atom_excited=r.get("initial", "atom", _atom, init_base.atom_excited),
    )
    try:
        return ScenarioConfig(
            name=r.get("scenario", "name", str, base.name if base else "scenario"),
            omega=r.get("model", "omega", _float, dflt("omega")),
            Omega=r.get("model", "Omega", _float, dflt("Omega")),
            g=r.get("model", "g", _float, dflt("g")),
            gamma_a=r.get("model", "gamma_a", _float, base.gamma_a if base else 0.0),
            gamma_c=r.get("model", "gamma_c", _float, base.gamma_c if base else 0.0),
            initial=initial,
            n_max=r.get("grid", "n_max", int, dflt("n_max")),
            gt_final=r.get("grid", "gt_final", _float, dflt("gt_final")),
            gt_step=r.get("grid", "gt_step", _float, base.gt_step if base else 1.0),
            snapshots=r.get("grid", "snapshots", _floats, base.snapshots if base else ()),
            truncation_threshold=r.get("grid", "truncation_threshold", _float,
                                       base.truncation_threshold if base
                                       else DEFAULT_TRUNCATION_THRESHOLD),
            engines=r.get("engines", "enabled", _names,
                          base.engines if base else ("exact", "effective")),
            exact=engine("exact"),
            effective=engine("effective"),
            oracle_max_n_max=r.get("oracle", "max_n_max", int, base.oracle_max_n_max if base else 12),
            report=report,
            output_dir=r.get("output", "directory", str, base.output_dir if base else "output"),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> ScenarioConfig:
    return parse_config(Path(path).read_text())


# ---------------------------------------------------------------------------
# serialization

def serialize_timeseries(traj, path) -> None:
    """Write one CSV row per output time, 17 significant digits."""
    s = as_series(traj)
    if len(s) == 0:
        raise ValueError("empty trajectory")
    data = np.column_stack([getattr(s, c) for c in TIMESERIES_COLUMNS])
    with open(path, "w", newline="") as fh:
        fh.write(",".join(TIMESERIES_COLUMNS) + "\n")
        for row in data:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def read_timeseries(path) -> TimeSeries:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    missing = set(TIMESERIES_COLUMNS) - set(header)
    if missing:
        raise ShapeMismatchError(f"{path}: missing columns {sorted(missing)}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return TimeSeries(**{c: data[:, header.index(c)] for c in TIMESERIES_COLUMNS})


def serialize_distribution(dist, path, floor: float = 1e-12) -> None:
    """Write ``n,p_n`` pairs for every ``p_n >= floor``."""
    with open(path, "w", newline="") as fh:
        fh.write("n,p_n\n")
        for n, p in enumerate(np.asarray(dist, dtype=float)):
            if p >= floor:
                fh.write(f"{n},{p:.17g}\n")


# ---------------------------------------------------------------------------
# comparison report

def _check(value, target, rtol=None, atol=None):
    if rtol is not None:
        err = abs(value - target) / abs(target) if target else float("inf")
        return {"value": value, "target": target, "rel_error": err, "tolerance": rtol,
                "pass": bool(err < rtol)}
    err = abs(value - target)
    return {"value": value, "target": target, "abs_error": err, "tolerance": atol,
            "pass": bool(err < atol)}


def _max_rel(x, ref, scale=None):
    denom = np.abs(ref) if scale is None else np.full_like(ref, scale)
    ok = denom > 0
    if not np.any(ok):
        return 0.0
    return float(np.max(np.abs(x[ok] - ref[ok]) / denom[ok]))


def engine_checks(series: TimeSeries, params: ModelParams,
                  settings: ReportSettings = ReportSettings()) -> dict:
    """Asymptotic-rule checks for one run over its tail window."""
    pred = asymptotic_predictions(params)
    w = settings.tail_fraction
    start = series.gt[-1] - w * (series.gt[-1] - series.gt[0])
    tail = series.gt >= start - 1e-12
    out = {"tail_window_gt": [float(series.gt[tail][0]), float(series.gt[-1])]}

    slope = fit_linear_slope(series.t, series.mean_n, w)
    out["slope_n"] = {**_check(slope.value, pred.slope_n, rtol=settings.slope_rtol),
                      "stderr": slope.stderr}
    for name in ("p_e", "n_sigma_z"):
        fit = fit_linear_slope(series.gt, getattr(series, name), w)
        out[f"{name}_slope_per_gt"] = {**_check(fit.value, 0.0, atol=settings.constancy_atol_per_gt),
                                       "stderr": fit.stderr}
    x = (series.p_e + series.n_sigma_z)[tail]
    worst = x[np.argmax(np.abs(x - pred.limit_pe_plus_nsz))]
    out["pe_plus_nsz"] = {**_check(float(worst), pred.limit_pe_plus_nsz,
                                   rtol=settings.pe_plus_nsz_rtol), "tail_mean": float(x.mean())}
    n_tail = series.mean_n[tail]
    ratio = np.divide(series.n2_sigma_z[tail], n_tail, out=np.full_like(n_tail, np.nan),
                      where=n_tail != 0)
    worst = ratio[np.nanargmax(np.abs(ratio - pred.n2sz_ratio))] if np.any(np.isfinite(ratio)) else np.nan
    out["n2sz_ratio"] = _check(float(worst), pred.n2sz_ratio, rtol=settings.n2sz_ratio_rtol)
    quad = fit_quadratic_coeff(series.t, series.mean_n2, w)
    out["n2_quadratic"] = {**_check(quad.value, pred.quadratic_coeff, rtol=settings.quadratic_rtol),
                           "stderr": quad.stderr}
    resid = moment_identity_residual(series, params)
    out["moment_identity"] = {
        "max_abs": float(np.max(np.abs(resid))),
        "tail_max_rel": float(np.max(np.abs(resid[tail]) / np.abs(series.mean_n[tail]))),
    }
    out["moment_identity"]["tail_pass"] = bool(
        out["moment_identity"]["tail_max_rel"] < settings.identity_tail_rtol)
    out["trace_drift"] = float(np.max(np.abs(series.trace - 1.0)))
    return out


ASYMPTOTIC_KEYS = ("slope_n", "p_e_slope_per_gt", "n_sigma_z_slope_per_gt",
                   "pe_plus_nsz", "n2sz_ratio", "n2_quadratic")


def comparison_report(runs: dict, params: ModelParams,
                      settings: ReportSettings = ReportSettings()) -> dict:
    """Engine-vs-engine deviations plus per-engine asymptotic checks.

    ``runs`` maps engine name to a trajectory or :class:`TimeSeries`; all must
    share the time grid.  The first engine is the reference for relative
    deviations.
    """
    if len(runs) < 2:
        raise ShapeMismatchError("comparison needs at least two engines")
    series = {name: as_series(r) for name, r in runs.items()}
    names = list(series)
    ref_t = series[names[0]].t
    for name in names[1:]:
        t = series[name].t
        if t.shape != ref_t.shape or np.max(np.abs(t - ref_t)) > 1e-9 * max(1.0, ref_t[-1]):
            raise ShapeMismatchError(f"time grid of {name!r} differs from {names[0]!r}")

    pred = asymptotic_predictions(params)
    v1, v2 = dephasing_rates(params)
    report = {
        "params": {"omega": params.omega, "Omega": params.Omega, "g": params.g,
                   "gamma_a": params.gamma_a, "gamma_c": params.gamma_c, "gamma": params.gamma,
                   "v1": v1, "v2": v2},
        "predictions": asdict(pred),
        "engines": {},
        "agreement": [],
    }
    for name, s in series.items():
        try:
            report["engines"][name] = engine_checks(s, params, settings)
        except InsufficientPointsError as exc:
            report["engines"][name] = {"error": str(exc)}

    for ref_name, other in combinations(names, 2):
        ref, s = series[ref_name], series[other]
        late = ref.gt >= settings.agreement_from_gt
        early = ~late
        entry = {"engines": [ref_name, other], "late_from_gt": settings.agreement_from_gt,
                 "late_max_rel": {}, "transient_max_rel": {}}
        for obs in ("mean_n", "mean_n2", "p_e"):
            x, y = getattr(s, obs), getattr(ref, obs)
            entry["late_max_rel"][obs] = _max_rel(x[late], y[late]) if late.any() else 0.0
            scale = float(np.max(np.abs(y))) or 1.0
            entry["transient_max_rel"][obs] = (_max_rel(x[early], y[early], scale)
                                               if early.any() else 0.0)
        entry["late_pass"] = bool(all(v < settings.agreement_rtol
                                      for v in entry["late_max_rel"].values()))
        entry["transient_flag"] = bool(any(v > settings.transient_rtol
                                           for v in entry["transient_max_rel"].values()))
        if ref.photon_dist is not None and s.photon_dist is not None:
            width = min(ref.photon_dist.shape[1], s.photon_dist.shape[1])
            pr, ps = ref.photon_dist[-1, :width], s.photon_dist[-1, :width]
            dev = float(np.max(np.abs(pr - ps)) / np.max(pr))
            entry["photon_dist_final"] = {"gt": float(ref.gt[-1]), "max_dev_over_peak": dev,
                                          "pass": bool(dev < settings.dist_rtol)}
        report["agreement"].append(entry)

    agreement_ok = all(e["late_pass"] and e.get("photon_dist_final", {}).get("pass", True)
                       for e in report["agreement"])
    asymptotic_ok = all(all(chk[k]["pass"] for k in ASYMPTOTIC_KEYS)
                        for chk in report["engines"].values() if "error" not in chk)
    report["agreement_status"] = "PASS" if agreement_ok else "FAIL"
    report["asymptotic_status"] = "PASS" if asymptotic_ok else "FAIL"
    report["transient_flagged"] = any(e["transient_flag"] for e in report["agreement"])
    return report


# ---------------------------------------------------------------------------
# runner

@dataclass
class ScenarioResult:
    config: ScenarioConfig
    runs: dict
    report: dict | None
    files: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)


def run_engine(cfg: ScenarioConfig, engine: str):
    params = cfg.params
    t_grid = cfg.gt_grid() / cfg.g
    t_final = t_grid[-1]
    state0 = cfg.initial.build(cfg.n_max)
    if engine == "exact":
        return integrate_exact(params, state0, t_final, t_grid, cfg.exact.tolerances(cfg.g),
                               cfg.truncation_threshold)
    if engine == "effective":
        return integrate_effective(params, state0, t_final, t_grid,
                                   cfg.effective.tolerances(cfg.g), cfg.truncation_threshold)
    if engine == "oracle":
        return integrate_oracle(params, state0, t_final, t_grid)
    raise ConfigError(f"unknown engine {engine!r}")


def run_scenario(cfg: ScenarioConfig, output_dir=None, write: bool = True) -> ScenarioResult:
    """Run every enabled engine and (optionally) write all output files.

    Files written to ``output_dir``: ``<name>_<engine>_timeseries.csv``,
    ``<name>_<engine>_photon_gt<T>.csv`` per snapshot, ``<name>_report.json``
    when two or more engines ran, and ``<name>_metadata.json``.
    """
    from . import __version__

    runs, timings = {}, {}
    for engine in cfg.engines:
        t0 = time.perf_counter()
        runs[engine] = run_engine(cfg, engine)
        timings[engine] = time.perf_counter() - t0
    report = comparison_report(runs, cfg.params, cfg.report) if len(runs) >= 2 else None
    result = ScenarioResult(cfg, runs, report, timings=timings)
    if not write:
        return result

    out = Path(output_dir if output_dir is not None else cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    for engine, traj in runs.items():
        path = out / f"{cfg.name}_{engine}_timeseries.csv"
        serialize_timeseries(traj, path)
        result.files.append(path)
        gt = traj.gt
        for snap in cfg.snapshots:
            k = int(np.argmin(np.abs(gt - snap)))
            path = out / f"{cfg.name}_{engine}_photon_gt{snap:g}.csv"
            serialize_distribution(traj.observables[k].photon_dist, path)
            result.files.append(path)
    if report is not None:
        path = out / f"{cfg.name}_report.json"
        path.write_text(json.dumps(report, indent=2))
        result.files.append(path)
    meta = {"package_version": __version__, "config": cfg.to_dict(),
            "config_ini": config_to_ini(cfg), "timings_s": timings,
            "files": [p.name for p in result.files]}
    path = out / f"{cfg.name}_metadata.json"
    path.write_text(json.dumps(meta, indent=2))
    result.files.append(path)
    return result
