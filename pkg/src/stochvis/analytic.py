"""Closed forms: Boolean and cylinder visibility laws, ball capacity, scaling profiles."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np
from scipy import integrate

from .geom import batch_dist2_point_segment, unit_ball_volume
from .stats import Estimate

MODELS = ("boolean", "cylinders", "interlacements")


@dataclass(frozen=True, eq=False)
class RadiusLaw:
    """Radii distribution with bounded support.

    ``kind`` is ``"constant"``, ``"discrete"`` (``values`` with ``probs``) or
    ``"tabulated"`` (inverse CDF given at increasing levels ``u`` in [0, 1],
    linearly interpolated). ``tail_mass`` records probability discarded
    when the law was truncated from an unbounded one.
    """

    kind: str
    values: tuple[float, ...]
    probs: tuple[float, ...] = ()
    levels: tuple[float, ...] = ()
    tail_mass: float = 0.0
    _moments: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.size == 0 or np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise ValueError("radii must be finite and nonnegative")
        if self.kind == "constant":
            if vals.size != 1 or vals[0] <= 0:
                raise ValueError("constant law needs one positive radius")
        elif self.kind == "discrete":
            p = np.asarray(self.probs, dtype=float)
            if p.shape != vals.shape or np.any(p < 0) or abs(p.sum() - 1) > 1e-9:
                raise ValueError("discrete law needs probabilities summing to 1")
        elif self.kind == "tabulated":
            u = np.asarray(self.levels, dtype=float)
            if u.shape != vals.shape or u.size < 2 or u[0] != 0 or u[-1] != 1:
                raise ValueError("tabulated law needs levels from 0 to 1")
            if np.any(np.diff(u) <= 0) or np.any(np.diff(vals) < 0):
                raise ValueError("levels must increase and radii must not decrease")
        else:
            raise ValueError(f"unknown radius law kind {self.kind!r}")
        if self.rho_max <= 0:
            raise ValueError("radius law must put mass on positive radii")

    @classmethod
    def constant(cls, rho: float) -> "RadiusLaw":
        return cls("constant", (float(rho),))

    @classmethod
    def discrete(cls, values, probs) -> "RadiusLaw":
        return cls("discrete", tuple(map(float, values)), tuple(map(float, probs)))

    @classmethod
    def tabulated(cls, levels, values, tail_mass: float = 0.0) -> "RadiusLaw":
        return cls("tabulated", tuple(map(float, values)), levels=tuple(map(float, levels)),
                   tail_mass=float(tail_mass))

    @classmethod
    def from_distribution(cls, dist, quantile: float = 0.999, points: int = 2001) -> "RadiusLaw":
        """Truncate a scipy frozen distribution at ``quantile`` (conditional law)."""
        u = np.linspace(0.0, 1.0, points)
        rho = dist.ppf(u * quantile)
        rho[0] = max(rho[0], 0.0)
        return cls.tabulated(u, np.maximum.accumulate(rho), tail_mass=1.0 - quantile)

    @classmethod
    def from_json(cls, data: Union[dict, str, Path]) -> "RadiusLaw":
        if not isinstance(data, dict):
            data = json.loads(Path(data).read_text())
        kind = data["kind"]
        if kind == "constant":
            return cls.constant(data["value"])
        if kind == "discrete":
            return cls.discrete(data["values"], data["probs"])
        if kind == "tabulated":
            return cls.tabulated(data["levels"], data["values"], data.get("tail_mass", 0.0))
        raise ValueError(f"unknown radius law kind {kind!r}")

    def to_json(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant", "value": self.values[0]}
        if self.kind == "discrete":
            return {"kind": "discrete", "values": list(self.values), "probs": list(self.probs)}
        return {"kind": "tabulated", "levels": list(self.levels), "values": list(self.values),
                "tail_mass": self.tail_mass}

    def describe(self) -> str:
        if self.kind == "constant":
            return f"{self.values[0]:g}"
        if self.kind == "discrete":
            return "discrete:" + ";".join(f"{v:g}@{p:g}" for v, p in zip(self.values, self.probs))
        return f"tabulated:max={self.rho_max:g}"

    @property
    def rho_max(self) -> float:
        return float(max(self.values))

    @property
    def is_constant(self) -> bool:
        return self.kind == "constant"

    def moment(self, k: float) -> float:
        """E[rho^k]; exact for constant/discrete, Gauss-Legendre per table piece otherwise."""
        if k in self._moments:
            return self._moments[k]
        vals = np.asarray(self.values)
        if self.kind == "constant":
            m = float(vals[0] ** k)
        elif self.kind == "discrete":
            m = float(np.dot(self.probs, vals**k))
        else:
            u = np.asarray(self.levels)
            # exact for integer k: the integrand is a degree-k polynomial on each piece
            nodes, weights = np.polynomial.legendre.leggauss(int(math.ceil(k / 2)) + 2)
            lo, hi = u[:-1, None], u[1:, None]
            uu = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
            rho = np.interp(uu, u, vals)
            m = float(np.sum(0.5 * (hi - lo) * weights * rho**k))
        self._moments[k] = m
        return m

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        vals = np.asarray(self.values)
        if self.kind == "constant":
            return np.full(size, vals[0])
        if self.kind == "discrete":
            return rng.choice(vals, size=size, p=np.asarray(self.probs))
        return np.interp(rng.random(size), np.asarray(self.levels), vals)


@dataclass(frozen=True)
class ModelParams:
    """Obstacle model: ``model`` in {boolean, cylinders, interlacements}.

    ``radius`` is a positive float, or a :class:`RadiusLaw` for the Boolean
    model (floats are promoted to constant laws there).
    """

    model: str
    d: int
    alpha: float
    radius: Union[float, RadiusLaw]

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}")
        if self.d < 2:
            raise ValueError("d must be >= 2")
        if self.model == "interlacements" and self.d < 3:
            raise ValueError("interlacements need d >= 3 (transience)")
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if isinstance(self.radius, RadiusLaw):
            if self.model != "boolean" and not self.radius.is_constant:
                raise ValueError("random radii are only supported for the Boolean model")
        elif not self.radius > 0:
            raise ValueError("radius must be positive")

    @property
    def law(self) -> RadiusLaw:
        if isinstance(self.radius, RadiusLaw):
            return self.radius
        return RadiusLaw.constant(self.radius)

    @property
    def rho(self) -> float:
        """Common obstacle radius (constant laws only)."""
        if isinstance(self.radius, RadiusLaw):
            if not self.radius.is_constant:
                raise ValueError("model has random radii")
            return self.radius.values[0]
        return float(self.radius)

    @property
    def rho_max(self) -> float:
        return self.law.rho_max

    def with_alpha(self, alpha: float) -> "ModelParams":
        return ModelParams(self.model, self.d, alpha, self.radius)


class ScalingProfile:
    """Visibility window delta(r) and the capacity profiles phi(r), psi(r).

    delta is the length on the sphere of radius r over which visibility
    events decorrelate. phi is the order of the capacity of a length-r
    capsule and psi the order of the probability that Brownian motion
    started at unit distance avoids it (both d >= 3).
    """

    def __init__(self, model: str, d: int):
        if model not in MODELS:
            raise ValueError(f"model must be one of {MODELS}")
        if d < 2 or (model == "interlacements" and d < 3):
            raise ValueError("dimension not supported for this model")
        self.model = model
        self.d = d

    def _check_r(self, r):
        r = np.asarray(r, dtype=float)
        if self.model == "interlacements" and self.d == 3 and np.any(r < 2):
            raise ValueError("d=3 interlacement profile is defined for r >= 2")
        if np.any(r <= 0):
            raise ValueError("r must be positive")
        return r

    def delta(self, r):
        r = self._check_r(r)
        if self.model == "interlacements" and self.d == 3:
            return np.log(r) ** 2 / r
        if self.model == "cylinders" and self.d == 2:
            return np.ones_like(r)
        return 1.0 / r

    def phi(self, r):
        r = self._check_r(r)
        if self.d < 3:
            raise ValueError("capacity profiles need d >= 3")
        return r / np.log(r) if self.d == 3 else r

    def psi(self, r):
        r = self._check_r(r)
        if self.d < 3:
            raise ValueError("capacity profiles need d >= 3")
        return 1.0 / np.log(r) if self.d == 3 else np.ones_like(r)


# --- Boolean model -----------------------------------------------------------


def boolean_mu_segment(d: int, law: RadiusLaw, r: float) -> float:
    """Intensity measure of balls meeting the segment [0, r e1]."""
    if d < 2:
        raise ValueError("d must be >= 2")
    if r < 0:
        raise ValueError("r must be nonnegative")
    md, md1 = law.moment(d), law.moment(d - 1)
    if not (math.isfinite(md) and math.isfinite(md1)):
        raise ValueError("radius law has an infinite moment")
    return unit_ball_volume(d) * md + unit_ball_volume(d - 1) * md1 * r


def boolean_mu_ball(d: int, law: RadiusLaw, s: float) -> float:
    """Intensity measure of balls meeting a ball of radius s: kappa_d E[(s + rho)^d]."""
    vals = np.asarray(law.values)
    if law.kind == "tabulated":
        raise ValueError("use a constant or discrete law for test-ball measures")
    probs = np.asarray(law.probs) if law.kind == "discrete" else np.ones(1)
    return unit_ball_volume(d) * float(np.dot(probs, (s + vals) ** d))


def boolean_f(params: ModelParams, r: float) -> float:
    return math.exp(-params.alpha * boolean_mu_segment(params.d, params.law, r))


# --- Poisson cylinders ---------------------------------------------------------


def mean_projected_sine(d: int, rtol: float = 1e-10) -> float:
    """E[sin theta] for theta the angle between a uniform direction and a fixed axis.

    The angle has density proportional to sin^(d-2) on [0, pi].
    """
    if d < 2:
        raise ValueError("d must be >= 2")
    opts = dict(epsabs=0.0, epsrel=min(rtol, 1e-10) * 1e-2, limit=200)
    num, _ = integrate.quad(lambda t: math.sin(t) ** (d - 1), 0.0, math.pi, **opts)
    den, _ = integrate.quad(lambda t: math.sin(t) ** (d - 2), 0.0, math.pi, **opts)
    return num / den


def cylinder_mu_capsule(d: int, rho: float, r: float) -> float:
    """Rotation-averaged projected volume of the capsule around [0, r e1]."""
    if d < 2:
        raise ValueError("d must be >= 2")
    if d == 2:
        return 2.0 / math.pi * r + 2.0 * rho
    return (unit_ball_volume(d - 1) * rho ** (d - 1)
            + unit_ball_volume(d - 2) * rho ** (d - 2) * r * mean_projected_sine(d))


def cylinder_mu_ball(d: int, rho: float, s: float) -> float:
    """Measure of lines meeting a ball: the projected ball volume kappa_{d-1} (s + rho)^(d-1)."""
    return unit_ball_volume(d - 1) * (s + rho) ** (d - 1)


def cylinder_f(params: ModelParams, r: float) -> float:
    return math.exp(-params.alpha * cylinder_mu_capsule(params.d, params.rho, r))


def haar_rotations(d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` Haar-distributed orthogonal matrices, shape ``(n, d, d)``."""
    g = rng.standard_normal((n, d, d))
    q, rr = np.linalg.qr(g)
    signs = np.sign(np.diagonal(rr, axis1=1, axis2=2))
    signs[signs == 0] = 1.0
    return q * signs[:, None, :]


def cylinder_mu_union_mc(x, r: float, rho: float, d: int, n: int, seed: int,
                         points_per_rotation: int = 16) -> Estimate:
    """Monte Carlo value of mu(capsule[0, x] union capsule[0, r e1]).

    For each of ``n`` random rotations the two capsules are rotated and
    projected onto the hyperplane orthogonal to e1; the (d-1)-volume of the
    union of the projections is estimated by rejection sampling in their
    shared bounding box.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    x = np.asarray(x, dtype=float)
    if x.size != d or d < 2:
        raise ValueError("x must be a vector in R^d with d >= 2")
    if np.linalg.norm(x) > r * (1 + 1e-9):
        raise ValueError("need |x| <= r")
    rng = np.random.default_rng(seed)
    e = np.zeros(d)
    e[0] = r
    out = np.empty(n)
    m = points_per_rotation
    for start in range(0, n, 4096):
        k = min(4096, n - start)
        q = haar_rotations(d, k, rng)
        a = (q @ e)[:, 1:]
        b = (q @ x)[:, 1:]
        zero = np.zeros_like(a)
        lo = np.minimum(np.minimum(a, b), zero) - rho
        hi = np.maximum(np.maximum(a, b), zero) + rho
        box = np.prod(hi - lo, axis=1)
        pts = lo[:, None, :] + (hi - lo)[:, None, :] * rng.random((k, m, d - 1))
        ina = batch_dist2_point_segment(pts, zero[:, None, :], a[:, None, :]) <= rho**2
        inb = batch_dist2_point_segment(pts, zero[:, None, :], b[:, None, :]) <= rho**2
        out[start:start + k] = box * np.mean(ina | inb, axis=1)
    return Estimate(float(out.mean()), float(out.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf, n)


# --- Brownian capacity -----------------------------------------------------------


def sphere_measure_mass(d: int, R: float) -> float:
    """Total mass 2 pi^(d/2) R^(d-2) / Gamma(d/2 - 1) of the capacity starting measure."""
    if d < 3:
        raise ValueError("capacity needs d >= 3")
    return 2.0 * math.pi ** (d / 2) * R ** (d - 2) / math.gamma(d / 2 - 1)


def ball_capacity(d: int, s: float) -> float:
    """Newtonian capacity of a ball of radius ``s`` (sphere mass times hit probability)."""
    if d < 3:
        raise ValueError("capacity needs d >= 3")
    if s <= 0:
        raise ValueError("s must be positive")
    return sphere_measure_mass(d, s)


# --- dispatch ----------------------------------------------------------------


def f_analytic(params: ModelParams, r: float):
    """Closed-form f(r), or None where none exists (interlacements)."""
    if params.model == "boolean":
        return boolean_f(params, r)
    if params.model == "cylinders":
        return cylinder_f(params, r)
    return None


def ratio_statistic(pvis: float, f: float, r: float, delta: float, d: int) -> float:
    """P_vis / ((r / delta)^(d-1) f)."""
    if f <= 0:
        raise ValueError("f must be positive")
    return pvis / ((r / delta) ** (d - 1) * f)
