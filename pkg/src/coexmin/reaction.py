"""Species growth laws and their derived constants.

A ReactionModel bundles the potential F, growth law f = F', its derivative
f', and the constants the energy machinery needs: the carrying capacity A
(the positive root of f(t) = t) and the energy density mu = F(A) - A^2/2.
v1 ships the logistic family f(t) = lam*t - |t|^(p-1)*t; any other family
satisfying the same structural assumptions can be packaged the same way.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

ROOT_TOL = 1e-12
MAX_PROP_SAMPLES = 10_000


@dataclass(frozen=True)
class ReactionModel:
    name: str
    F: Callable[[np.ndarray], np.ndarray]
    f: Callable[[np.ndarray], np.ndarray]
    df: Callable[[np.ndarray], np.ndarray]
    A: float
    mu: float
    FA: float  # F(A), cached for the hot path
    params: dict = field(default_factory=dict)

    @property
    def df0(self) -> float:
        return float(self.df(0.0))

    @property
    def dfA(self) -> float:
        return float(self.df(self.A))


@dataclass(frozen=True)
class SpeciesFlags:
    zero_at_origin: bool   # F(0) = 0 and f(0) = 0
    capacity: bool         # f(A) = A and mu = max_t (F(t) - t^2/2)
    subcritical_slope: bool  # f'(A) < 1


@dataclass(frozen=True)
class AssumptionReport:
    species: tuple[SpeciesFlags, ...]
    nu: float
    eta: float
    kappa_threshold: float

    @property
    def all_pass(self) -> bool:
        return all(s.zero_at_origin and s.capacity and s.subcritical_slope for s in self.species)

    def to_json(self) -> dict:
        return {
            "species": [
                {
                    "zero_at_origin": s.zero_at_origin,
                    "capacity": s.capacity,
                    "subcritical_slope": s.subcritical_slope,
                }
                for s in self.species
            ],
            "nu": self.nu,
            "eta": self.eta,
            "kappa_threshold": self.kappa_threshold,
            "all_pass": self.all_pass,
        }


def make_logistic(lam: float, p: float) -> ReactionModel:
    """Logistic-type growth: f(t) = lam*t - |t|^(p-1)*t, for lam > 1, p > 1."""
    if not lam > 1:
        raise ValueError(f"logistic growth needs lam > 1, got {lam}")
    if not p > 1:
        raise ValueError(f"logistic growth needs p > 1, got {p}")

    def F(t):
        t = np.asarray(t, dtype=float)
        return lam * t * t / 2.0 - np.power(np.abs(t), p + 1.0) / (p + 1.0)

    def f(t):
        t = np.asarray(t, dtype=float)
        return lam * t - np.power(np.abs(t), p - 1.0) * t

    def df(t):
        t = np.asarray(t, dtype=float)
        return lam - p * np.power(np.abs(t), p - 1.0)

    A = _capacity_by_bisection(f, upper=10.0 * lam ** (1.0 / (p - 1.0)))
    FA = float(F(A))
    return ReactionModel(
        name=f"logistic(lam={lam:g}, p={p:g})",
        F=F, f=f, df=df, A=A, mu=FA - A * A / 2.0, FA=FA,
        params={"family": "logistic", "lam": lam, "p": p},
    )


def _capacity_by_bisection(f, upper, lower=1e-9, tol=ROOT_TOL):
    """Positive root of f(t) - t = 0; derivative-free so it works for any family.

    The lower end of the bracket shrinks automatically when the root sits
    below it (growth laws barely above threshold have tiny capacities), and
    the tolerance is relative so large roots terminate too.
    """
    g = lambda t: float(f(t)) - t
    lo, hi = lower, upper
    while g(lo) <= 0:
        lo /= 10.0
        if lo < 1e-280:
            raise ValueError(f"f(t) - t has no positive part below {upper:g}")
    if g(hi) >= 0:
        raise ValueError(f"no sign change for f(t)-t on ({lo:g}, {hi:g})")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if g(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def check_assumptions(models: list[ReactionModel]) -> AssumptionReport:
    """Direct numerical verification of the structural assumptions plus the
    derived constants nu, eta and the competition-rate threshold."""
    if not models:
        raise ValueError("need at least one species")
    flags = []
    for m in models:
        zero = abs(float(m.F(0.0))) <= 1e-12 and abs(float(m.f(0.0))) <= 1e-12
        fixed_point = abs(float(m.f(m.A)) - m.A) <= 1e-6 * max(1.0, m.A)
        ts = np.linspace(0.0, 3.0 * m.A, MAX_PROP_SAMPLES)
        sampled_max = float(np.max(m.F(ts) - ts * ts / 2.0))
        capacity = fixed_point and sampled_max <= m.mu + 1e-9 * max(1.0, abs(m.mu))
        slope = m.dfA < 1.0
        flags.append(SpeciesFlags(zero, capacity, slope))

    nu = min(min(1.0, 1.0 - m.dfA) for m in models)
    eta = min(nu / 4.0, 0.125)
    if len(models) == 1:
        pairs = [(models[0], models[0])]
    else:
        pairs = [(mi, mj) for mi in models for mj in models if mi is not mj]
    kappa_threshold = max(2.0 * mi.df0 / (mj.A * mj.A) for mi, mj in pairs)
    return AssumptionReport(tuple(flags), nu, eta, kappa_threshold)


def eval_truncated(model: ReactionModel, t):
    """Truncated potential pieces (Ftil, ftil, G, g) used by the penalized energy.

    Ftil flattens F to affine growth above A and to zero below 0; G is the
    quadratic penalty profile with linear growth beyond |t| = A.  Each pair
    (Ftil, ftil) and (G, g) is a function and its derivative, both continuous.
    """
    t = np.asarray(t, dtype=float)
    A = model.A
    FA = float(model.F(A))

    Ftil = np.where(t <= 0.0, 0.0, np.where(t <= A, model.F(t), A * t + FA - A * A))
    ftil = np.where(t <= 0.0, 0.0, np.where(t <= A, model.f(t), A))
    at = np.abs(t)
    G = np.where(at <= A, t * t, 2.0 * A * at - A * A)
    g = np.where(at <= A, 2.0 * t, 2.0 * A * np.sign(t))
    return Ftil, ftil, G, g
