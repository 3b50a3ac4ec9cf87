"""Parameter sweeps, closed-form validation runs and figure presets."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .adc import AdcModel
from .config import SystemConfig, db_to_linear, linear_to_db
from .design import required_source_power
from .io import write_csv
from .mc_oracle import _sampling_key, sample_functionals, terms_from_functionals
from .rate_asym import UNBOUNDED, approx_rate, half_duplex_rate, limit_rate_infinite_M
from .rate_exact import TERMS, exact_breakdown, exact_rate

__all__ = [
    "AXES",
    "OUTPUTS",
    "SweepSpec",
    "SweepResult",
    "apply_axis",
    "run_sweep",
    "ValidationRow",
    "ValidationReport",
    "run_validation",
    "Preset",
    "PRESETS",
    "run_preset",
]

AXES = ("M", "K", "p_S", "p_R", "p_p", "sigma_LI2", "relay_bits", "dest_bits")
OUTPUTS = ("exact", "approx", "mc", "limit", "half_duplex")
Z_LIMIT = 3.0


def apply_axis(base: SystemConfig, axis: str, value) -> SystemConfig:
    """``base`` with one sweep parameter set. Powers are linear."""
    if axis in ("M", "K"):
        if float(value) != int(value):
            raise ValueError(f"{axis} must be an integer, got {value}")
        return base.replace(**{axis: int(value)})
    if axis in ("p_S", "p_R", "p_p", "sigma_LI2"):
        return base.replace(**{axis: float(value)})
    if axis == "relay_bits":
        return base.replace(relay_adc=AdcModel.from_bits(value))
    if axis == "dest_bits":
        return base.replace(dest_adc=AdcModel.from_bits(value))
    raise ValueError(f"unknown axis {axis!r}; choose from {AXES}")


@dataclass(frozen=True)
class SweepSpec:
    """One-parameter sweep over ``axis`` starting from ``base``."""

    base: SystemConfig
    axis: str
    values: tuple
    outputs: tuple = ("exact",)

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"unknown axis {self.axis!r}; choose from {AXES}")
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise ValueError("sweep values must be non-empty")
        d = np.diff(vals)
        if len(vals) > 1 and not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError("sweep values must be strictly monotone")
        outs = tuple(self.outputs)
        bad = set(outs) - set(OUTPUTS)
        if bad or not outs:
            raise ValueError(f"outputs must be a non-empty subset of {OUTPUTS}, got {outs}")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "outputs", tuple(o for o in OUTPUTS if o in outs))
        # fail early on points that break the config invariants
        for v in vals:
            apply_axis(self.base, self.axis, v)


@dataclass
class SweepResult:
    """Rows of a sweep, in axis order, with a fixed column layout.

    Columns: the axis, one ``<kind>_sum`` per output, per-user
    ``<kind>_r<k>`` columns, Monte-Carlo standard errors, then ``error``
    (empty unless some cell of the row failed). Failed cells are nan.
    """

    columns: list
    rows: list

    def column(self, name) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows])

    def to_csv(self, path) -> None:
        write_csv(path, self.columns, self.rows)


def _columns(axis, outputs, K):
    cols = [axis]
    cols += [f"{o}_sum" for o in outputs]
    for o in outputs:
        cols += [f"{o}_r{k + 1}" for k in range(K)]
    if "mc" in outputs:
        cols += ["mc_sum_se"] + [f"mc_r{k + 1}_se" for k in range(K)]
    return cols + ["error"]


def run_sweep(spec: SweepSpec, mc_n: int = 10_000, seed: int = 0, out=None) -> SweepResult:
    """Evaluate every requested output at each axis point.

    A failing evaluation leaves nan in its cells and a message in the
    ``error`` column; the sweep continues. Monte-Carlo samples are shared
    between points whose channel model is identical (a power sweep reuses
    one sample), which gives the same numbers as independent runs with the
    same seed.
    """
    configs = [apply_axis(spec.base, spec.axis, v) for v in spec.values]
    K = max(c.K for c in configs)
    cols = _columns(spec.axis, spec.outputs, K)
    cache = {}
    rows = []
    for value, cfg in zip(spec.values, configs):
        sums, users, ses, errors = {}, {}, [], []
        for kind in spec.outputs:
            rate = np.full(K, np.nan)
            try:
                r, se = _evaluate(kind, cfg, mc_n, seed, cache)
                rate[: cfg.K] = r
                if se is not None:
                    ses = [se[0]] + list(se[1]) + [np.nan] * (K - cfg.K)
                sums[kind] = math.fsum(r.tolist())
            except Exception as exc:  # noqa: BLE001 - recorded per cell
                sums[kind] = np.nan
                errors.append(f"{kind}: {type(exc).__name__}: {exc}")
                if kind == "mc":
                    ses = [np.nan] * (K + 1)
            users[kind] = rate
        row = [value] + [sums[o] for o in spec.outputs]
        for o in spec.outputs:
            row += [float(x) for x in users[o]]
        row += [float(x) for x in ses]
        row.append("; ".join(errors))
        rows.append(row)
    result = SweepResult(cols, rows)
    if out is not None:
        result.to_csv(out)
    return result


def _evaluate(kind, cfg, mc_n, seed, cache):
    """Per-user rates and, for Monte Carlo, (sum se, per-user se)."""
    if kind == "exact":
        return exact_rate(cfg).rate, None
    if kind == "approx":
        return approx_rate(cfg).rate, None
    if kind == "half_duplex":
        return half_duplex_rate(cfg), None
    if kind == "limit":
        lim = limit_rate_infinite_M(cfg)
        return (np.full(cfg.K, math.inf) if lim is UNBOUNDED else lim), None
    key = _sampling_key(cfg)
    if key not in cache:
        cache[key] = sample_functionals(cfg, mc_n, seed)
    rep = terms_from_functionals(cache[key], cfg)
    return rep.rate.mean, (rep.sum_rate.std_error, rep.rate.std_error)


@dataclass(frozen=True)
class ValidationRow:
    name: str
    closed_form: float
    mc_mean: float
    mc_std_error: float
    z: float

    @property
    def passed(self) -> bool:
        return abs(self.z) <= Z_LIMIT


@dataclass(frozen=True)
class ValidationReport:
    """Closed form against Monte Carlo, one row per term (averaged over users)."""

    rows: tuple
    n: int
    seed: int

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def row(self, name) -> ValidationRow:
        return next(r for r in self.rows if r.name == name)

    def to_text(self) -> str:
        lines = [f"{'term':<9}{'closed form':>16}{'MC mean':>16}{'MC se':>13}{'z':>8}  ok"]
        for r in self.rows:
            lines.append(
                f"{r.name:<9}{r.closed_form:>16.8g}{r.mc_mean:>16.8g}"
                f"{r.mc_std_error:>13.4g}{r.z:>8.2f}  {'yes' if r.passed else 'NO'}"
            )
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'} (n={self.n}, seed={self.seed})")
        return "\n".join(lines)

    def to_csv(self, path) -> None:
        write_csv(
            path, ["term", "closed_form", "mc_mean", "mc_std_error", "z", "passed"],
            [[r.name, r.closed_form, r.mc_mean, r.mc_std_error, r.z, int(r.passed)]
             for r in self.rows],
        )


def run_validation(
    config: SystemConfig,
    mc_n: int = 10_000,
    seed: int = 0,
    closed_form: Callable = exact_breakdown,
    functionals=None,
) -> ValidationReport:
    """Compare every closed-form term, gamma and the sum rate with Monte Carlo.

    Each term is averaged over users before comparison, so the table has
    one row per term. ``closed_form`` maps a config to a RateBreakdown and
    can be swapped to check the harness itself. A precomputed sample may
    be passed as ``functionals``.
    """
    if mc_n < 1000:
        raise ValueError(f"validation needs mc_n >= 1000, got {mc_n}")
    if functionals is None:
        functionals = sample_functionals(config, mc_n, seed)
    rep = terms_from_functionals(functionals, config)
    cf = closed_form(config)
    rows = []
    for t in TERMS:
        ref = float(np.mean(getattr(cf, t)))
        est = rep.term_means[t]
        rows.append(ValidationRow(t, ref, est.mean, est.std_error, est.z_score(ref)))
    for name, ref, est in (("gamma", cf.gamma, rep.gamma), ("sum_rate", cf.sum_rate, rep.sum_rate)):
        rows.append(ValidationRow(name, float(ref), est.mean, est.std_error, est.z_score(ref)))
    return ValidationReport(tuple(rows), functionals.n, seed)


# ---------------------------------------------------------------- presets


def _db(x):
    return float(db_to_linear(x))


@dataclass(frozen=True)
class Preset:
    """A figure: shared caption parameters and one sweep per curve.

    ``kind == "required_p_S"`` sweeps M and reports the source power
    needed for ``target`` bits/s/Hz with ``p_R = K p_S``.
    """

    name: str
    description: str
    base: dict
    axis: str
    values: tuple
    outputs: tuple
    curves: tuple  # (label, dict of overrides)
    kind: str = "sweep"
    target: float | None = None
    extra: dict = field(default_factory=dict)

    def config(self, overrides: dict | None = None, curve: dict | None = None) -> SystemConfig:
        from .io import config_from_dict

        data = dict(self.base)
        data.update(curve or {})
        data.update(overrides or {})
        return config_from_dict(data)


_P0 = {"K": 5, "p_S": "0dB", "p_p": "0dB", "p_R": "0dB"}

PRESETS = {
    "fig2": Preset(
        "fig2", "sum rate vs ADC bits, low resolution at relay only or destinations only",
        dict(_P0, M=128, sigma_LI2="-10dB"), "relay_bits", tuple(range(1, 11)),
        ("exact", "approx"),
        (("relay_only", {"dest_adc": "inf"}), ("dest_only", {"relay_adc": "inf"})),
    ),
    "fig3": Preset(
        "fig3", "sum rate vs p_S, closed forms against Monte Carlo",
        {"K": 5, "relay_adc": 2, "dest_adc": 2, "p_p": "10dB", "p_R": "10dB",
         "sigma_LI2": "0dB", "p_S": "0dB", "M": 64},
        "p_S", tuple(_db(x) for x in range(-10, 45, 5)), ("exact", "approx", "mc"),
        tuple((f"M={m}", {"M": m}) for m in (64, 128, 256, 512)),
    ),
    "fig4": Preset(
        "fig4", "sum rate vs M for destination ADC bits, with the large-M limit",
        dict(_P0, relay_adc=2, sigma_LI2="-10dB", M=16), "M",
        (16, 32, 64, 128, 256, 512, 1024, 2048, 4096, 8192), ("exact", "approx", "limit"),
        tuple((f"dest_bits={b}", {"dest_adc": b}) for b in (1, 2, 3)),
    ),
    "fig5": Preset(
        "fig5", "sum rate vs M for relay ADC bits with perfect destination ADCs",
        dict(_P0, dest_adc="inf", sigma_LI2="-10dB", M=16), "M",
        tuple(range(20, 520, 20)), ("exact", "approx", "limit"),
        tuple((f"relay_bits={b}", {"relay_adc": b}) for b in (1, 2, 3, "inf")),
    ),
    "fig6": Preset(
        "fig6", "full vs half duplex against loop-interference level",
        {"K": 5, "relay_adc": 2, "dest_adc": 2, "p_p": "-10dB", "p_S": "-10dB",
         "p_R": "-10dB", "sigma_LI2": "0dB", "M": 100},
        "sigma_LI2", tuple(_db(x) for x in range(-20, 32, 2)), ("approx", "half_duplex"),
        tuple((f"M={m}", {"M": m}) for m in (100, 200)),
    ),
    "fig7": Preset(
        "fig7", "sum rate vs relay power",
        {"K": 5, "M": 64, "dest_adc": 2, "p_S": "-10dB", "p_p": "-10dB",
         "p_R": "0dB", "sigma_LI2": "-20dB"},
        "p_R", tuple(_db(x) for x in range(-10, 32, 2)), ("exact", "approx"),
        tuple(
            (f"alpha={a},sigma_LI2={s}dB", {"relay_adc": {"rho": a}, "sigma_LI2": f"{s}dB"})
            for a in (0.6366, 1.0) for s in (-20, -10)
        ),
    ),
    "fig8": Preset(
        "fig8", "required p_S vs M for a 5 bits/s/Hz sum rate with p_R = K p_S",
        {"K": 5, "p_p": "0dB", "p_S": "0dB", "p_R": "0dB", "sigma_LI2": "-20dB", "M": 50},
        "M", tuple(range(50, 525, 25)), ("approx",),
        tuple(
            (f"bits={b},sigma_LI2={s}dB", {"relay_adc": b, "dest_adc": b, "sigma_LI2": f"{s}dB"})
            for b in (1, 2, "inf") for s in (-20, 0)
        ),
        kind="required_p_S", target=5.0,
    ),
    "fig9": Preset(
        "fig9", "full vs half duplex against M at strong loop interference",
        dict(_P0, sigma_LI2="16dB", M=20), "M", tuple(range(20, 420, 20)),
        ("approx", "half_duplex"),
        (("perfect", {"relay_adc": "inf", "dest_adc": "inf"}),
         ("2-bit", {"relay_adc": 2, "dest_adc": 2})),
    ),
}


def run_preset(
    name: str, mc_n: int = 10_000, seed: int = 0, overrides: dict | None = None, out=None
) -> SweepResult:
    """Run every curve of a figure preset; the first column labels the curve.

    ``overrides`` uses the config-file schema and is applied on top of each
    curve's parameters.
    """
    if name not in PRESETS:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    p = PRESETS[name]
    columns, rows = None, []
    for label, curve in p.curves:
        cfg = p.config(overrides, curve)
        if p.kind == "required_p_S":
            res = _required_ps_sweep(cfg, p.values, p.target)
        else:
            axis = "dest_bits" if name == "fig2" and label == "dest_only" else p.axis
            res = run_sweep(SweepSpec(cfg, axis, p.values, p.outputs), mc_n, seed)
            res.columns[0] = "bits" if name == "fig2" else res.columns[0]
        columns = ["curve"] + res.columns
        rows += [[label] + r for r in res.rows]
    result = SweepResult(columns, rows)
    if out is not None:
        result.to_csv(out)
    return result


def _required_ps_sweep(cfg: SystemConfig, values, target) -> SweepResult:
    rows = []
    for M in values:
        try:
            p = required_source_power(cfg.replace(M=int(M)), target)
            rows.append([float(M), p, float(linear_to_db(p)), ""])
        except Exception as exc:  # noqa: BLE001 - recorded per cell
            rows.append([float(M), np.nan, np.nan, f"{type(exc).__name__}: {exc}"])
    return SweepResult(["M", "p_S_required", "p_S_required_dB", "error"], rows)
