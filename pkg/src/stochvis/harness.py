"""Sweeps over r, ratio verification and result files.

A sweep estimates f(r) and P_vis(r) from one set of scenes per r and
attaches the ratio statistic P_vis / ((r / delta(r))^(d-1) f). The closed
form of f is used in the ratio where one exists; interlacements use the
estimate. Everything written is a function of the configuration and seed;
wall times are written only on request.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .analytic import MODELS, ModelParams, RadiusLaw, ScalingProfile, f_analytic, ratio_statistic
from .models import TrajectoryConfig, WindowSpec
from .visibility import visibility_counts

CSV_HEADER = ("model", "d", "alpha", "rho_spec", "r", "n", "f_analytic", "f_hat", "f_se",
              "pvis_hat", "pvis_se", "undecided_frac", "delta_r", "ratio", "ratio_lo",
              "ratio_hi", "seed", "wall_ms")

EXIT_OK, EXIT_CONFIG, EXIT_FAIL, EXIT_PRECISION = 0, 1, 2, 3


class ConfigError(ValueError):
    """Invalid run configuration."""


@dataclass(frozen=True)
class RunConfig:
    """Parameters of a sweep.

    Exactly one of ``rho`` (constant radius) and ``radius_law`` (JSON dict
    or path, see :class:`RadiusLaw`) is used; ``radius_law`` wins when both
    are set. ``resolution=None`` means delta(r) / 4 at each r and
    ``margin=None`` means the largest obstacle radius.
    """

    model: str = "boolean"
    d: int = 2
    alpha: float = 0.1
    rho: Optional[float] = 1.0
    radius_law: Union[None, str, dict] = None
    r: tuple[float, ...] = (8.0, 12.0, 16.0, 20.0, 24.0)
    n: int = 10_000
    seed: int = 0
    resolution: Optional[float] = None
    margin: Optional[float] = None
    threads: int = 1
    step: float = 0.005
    band: float = 3.0
    timing: bool = False
    out: Optional[str] = None
    format: str = "csv"

    def __post_init__(self):
        object.__setattr__(self, "r", tuple(float(x) for x in np.atleast_1d(self.r)))
        self.validate()

    def validate(self):
        if self.model not in MODELS:
            raise ConfigError(f"model must be one of {MODELS}")
        if not self.r:
            raise ConfigError("r-list is empty")
        if any(b < a for a, b in zip(self.r, self.r[1:])):
            raise ConfigError("r-list must be sorted ascending")
        if any(x <= 0 for x in self.r):
            raise ConfigError("r must be positive")
        if self.model == "interlacements" and self.d == 3 and self.r[0] < 2:
            raise ConfigError("d=3 interlacement sweeps need r >= 2")
        if self.n < 1:
            raise ConfigError("n must be at least 1")
        if self.threads < 1:
            raise ConfigError("threads must be at least 1")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if self.resolution is not None and self.resolution <= 0:
            raise ConfigError("resolution must be positive")
        if self.band < 1:
            raise ConfigError("band must be at least 1")
        try:
            self.params()
            TrajectoryConfig(step=self.step)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def params(self) -> ModelParams:
        if self.radius_law is not None:
            radius = RadiusLaw.from_json(self.radius_law)
        elif self.rho is not None:
            radius = float(self.rho)
        else:
            raise ConfigError("give rho or radius_law")
        return ModelParams(self.model, int(self.d), float(self.alpha), radius)

    def window(self, r: float) -> WindowSpec:
        p = self.params()
        return WindowSpec(r, p.rho_max if self.margin is None else self.margin)

    @property
    def rho_spec(self) -> str:
        p = self.params()
        return p.law.describe() if isinstance(p.radius, RadiusLaw) else f"{float(p.radius):g}"

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path: Union[str, Path]) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["r"] = list(self.r)
        return out

    def override(self, **changes) -> "RunConfig":
        return replace(self, **{k: v for k, v in changes.items() if v is not None})


@dataclass
class SweepRow:
    model: str
    d: int
    alpha: float
    rho_spec: str
    r: float
    n: int
    f_analytic: float = math.nan
    f_hat: float = math.nan
    f_se: float = math.nan
    pvis_hat: float = math.nan
    pvis_se: float = math.nan
    undecided_frac: float = math.nan
    delta_r: float = math.nan
    ratio: float = math.nan
    ratio_lo: float = math.nan
    ratio_hi: float = math.nan
    seed: int = 0
    wall_ms: float = 0.0
    error: Optional[str] = field(default=None, compare=False)

    @property
    def failed(self) -> bool:
        return self.error is not None or not math.isfinite(self.ratio)

    @property
    def pvis_rel_se(self) -> float:
        return self.pvis_se / self.pvis_hat if self.pvis_hat > 0 else math.inf

    @property
    def f_rel_se(self) -> float:
        return self.f_se / self.f_hat if self.f_hat > 0 else math.inf


@dataclass
class SweepResult:
    config: RunConfig
    rows: list[SweepRow]

    def to_csv(self) -> str:
        return rows_to_csv(self.rows)

    def to_json(self) -> str:
        rows = [{k: _json_num(v) for k, v in asdict(row).items()} for row in self.rows]
        return json.dumps({"config": self.config.to_dict(), "rows": rows}, indent=2) + "\n"

    def write(self, path: Union[str, Path, None] = None, fmt: Optional[str] = None) -> str:
        fmt = fmt or self.config.format
        text = self.to_csv() if fmt == "csv" else self.to_json()
        if path is not None:
            Path(path).write_text(text)
        return text


def _json_num(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def _fmt(v) -> str:
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(float(v))
    return str(v)


def rows_to_csv(rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in rows:
        w.writerow([_fmt(getattr(row, k)) for k in CSV_HEADER])
    return buf.getvalue()


def read_rows(path: Union[str, Path]) -> list[SweepRow]:
    """Load sweep rows from a CSV or JSON file written by :class:`SweepResult`."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        rows = json.loads(text)["rows"]
        return [SweepRow(**{k: (math.nan if v is None else v) if k != "error" else v
                            for k, v in row.items()}) for row in rows]
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != CSV_HEADER:
        raise ConfigError("unexpected CSV header")
    out = []
    for rec in reader:
        kw = {}
        for k in CSV_HEADER:
            v = rec[k]
            if k in ("model", "rho_spec"):
                kw[k] = v
            elif k in ("d", "n", "seed"):
                kw[k] = int(v)
            else:
                kw[k] = float(v)
        out.append(SweepRow(**kw))
    return out


def _row(cfg: RunConfig, params: ModelParams, r: float, index: int) -> SweepRow:
    row = SweepRow(cfg.model, cfg.d, float(cfg.alpha), cfg.rho_spec, r, cfg.n, seed=cfg.seed)
    t0 = time.perf_counter()
    delta = float(ScalingProfile(cfg.model, cfg.d).delta(r))
    row.delta_r = delta
    fa = f_analytic(params, r)
    row.f_analytic = math.nan if fa is None else float(fa)
    resolution = cfg.resolution if cfg.resolution is not None else delta / 4.0
    vc = visibility_counts(params, cfg.window(r), r, cfg.n, cfg.seed, resolution,
                           cfg.threads, TrajectoryConfig(step=cfg.step), task=(31, index))
    row.f_hat, row.f_se = vc.f.p_hat, vc.f.se
    row.pvis_hat, row.pvis_se = vc.pvis.p_hat, vc.pvis.se
    row.undecided_frac = vc.pvis.undecided / cfg.n
    f_ref = row.f_analytic if fa is not None else row.f_hat
    if f_ref > 0:
        lo, hi = vc.pvis.bracket
        row.ratio = ratio_statistic(vc.pvis.p_hat, f_ref, r, delta, cfg.d)
        row.ratio_lo = ratio_statistic(lo, f_ref, r, delta, cfg.d)
        row.ratio_hi = ratio_statistic(hi, f_ref, r, delta, cfg.d)
    else:
        row.error = "f estimate is zero"
    if cfg.timing:
        row.wall_ms = round(1000 * (time.perf_counter() - t0), 3)
    return row


def run_sweep(cfg: RunConfig) -> SweepResult:
    """Estimate f, P_vis and the ratio statistic at every r of ``cfg``.

    A failing r-point is recorded with its error and the sweep continues.
    """
    params = cfg.params()
    rows = []
    for i, r in enumerate(cfg.r):
        try:
            rows.append(_row(cfg, params, r, i))
        except Exception as exc:  # recorded, never fatal for the sweep
            row = SweepRow(cfg.model, cfg.d, float(cfg.alpha), cfg.rho_spec, r, cfg.n,
                           seed=cfg.seed, error=f"{type(exc).__name__}: {exc}")
            rows.append(row)
    return SweepResult(cfg, rows)


@dataclass(frozen=True)
class VerifyReport:
    status: str  # "PASS", "FAIL" or "INSUFFICIENT"
    band: float
    achieved: float
    rows_used: int
    message: str

    @property
    def exit_code(self) -> int:
        return {"PASS": EXIT_OK, "FAIL": EXIT_FAIL}.get(self.status, EXIT_PRECISION)

    def __str__(self):
        return (f"{self.status}: max/min ratio {self.achieved:.4g} "
                f"(band {self.band:g}, {self.rows_used} rows) {self.message}").rstrip()


def verify_bounds(result: Union[SweepResult, list[SweepRow]], band: float,
                  max_rel_se: float = 0.2) -> VerifyReport:
    """Check that the ratio statistic stays within a factor ``band`` across r.

    Rows count when P_vis (and f, if it enters the ratio as an estimate) has
    relative SE below ``max_rel_se``; at least three are needed. The
    pessimistic ends of the undecided brackets are compared.
    """
    rows = result.rows if isinstance(result, SweepResult) else list(result)
    if band < 1:
        raise ValueError("band must be at least 1")

    def precise(row: SweepRow) -> bool:
        if row.error is not None or not row.pvis_rel_se < max_rel_se:
            return False
        return math.isfinite(row.f_analytic) or row.f_rel_se < max_rel_se

    used = [row for row in rows if precise(row)]
    if len(used) < 3:
        return VerifyReport("INSUFFICIENT", band, math.nan, len(used),
                            f"need 3 rows with relative SE < {max_rel_se:g}")
    lo = np.array([row.ratio_lo for row in used])
    hi = np.array([row.ratio_hi for row in used])
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi)) and np.all(lo > 0)):
        return VerifyReport("FAIL", band, math.inf, len(used), "non-finite or zero ratio")
    achieved = float(hi.max() / lo.min())
    status = "PASS" if achieved <= band else "FAIL"
    return VerifyReport(status, band, achieved, len(used), "")
