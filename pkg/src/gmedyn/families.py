"""Initial-state families and their entanglement event times.

Five single-parameter families of two-qubit states are supported, each with
closed-form times for finite-time loss of cavity-cavity entanglement
(``t_esd``) and delayed appearance of reservoir-reservoir entanglement
(``t_esb``):

  pure      alpha|00> + beta|11>              (parameter alpha^2)
  werner    p |Phi><Phi| + (1-p) I/4          (Phi = (|00>+|11>)/sqrt(2))
  mixeda    (a|11><11| + 2|Psi><Psi| + (1-a)|00><00|)/3,  Psi=(|01>+|10>)/sqrt2
  mixedc    c |Phi><Phi| + (1-c) |11><11|
  noisysc   f |psi><psi| + (1-f) I/4, psi = (|00> + 5|11>)/sqrt(26)

``t_esd is None`` encodes asymptotic decay (no finite-time death) and
``t_esb == 0`` immediate birth.  Times are dimensionless (kt).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .channel import XState, cavity_reduced, reservoir_reduced


class SeparableInitialStateError(ValueError):
    """Event times requested for a family instance that starts separable."""


@dataclass(frozen=True)
class EventTimes:
    t_esd: float | None  # None: entanglement only decays asymptotically
    t_esb: float | None  # 0.0: reservoirs entangle immediately


def entanglement_margin(x: XState) -> float:
    """Largest violation of the two X-state separability inequalities.

    Positive iff the state is entangled; crosses zero transversally at a
    sudden-death or sudden-birth point, which makes it the right quantity to
    bisect on (a thresholded boolean would misfire once the margin decays
    below the threshold without ever changing sign).
    """
    return max(abs(x.rho14) ** 2 - x.rho22 * x.rho33,
               abs(x.rho23) ** 2 - x.rho11 * x.rho44)


def is_entangled_xstate(x: XState, tol: float = 1e-12) -> bool:
    """Exact two-qubit criterion: an X-state is entangled iff a coherence
    squared exceeds the opposing population product."""
    return entanglement_margin(x) > tol


def _check_unit(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return value


@dataclass(frozen=True)
class PureSuperposition:
    """alpha|00> + beta|11> with nonnegative real amplitudes."""

    alpha: float
    beta: float

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("amplitudes must be nonnegative")
        if abs(self.alpha ** 2 + self.beta ** 2 - 1.0) > 1e-12:
            raise ValueError("alpha^2 + beta^2 must equal 1")

    def build(self) -> XState:
        return XState(rho11=self.alpha ** 2, rho22=0.0, rho33=0.0,
                      rho44=self.beta ** 2, rho14=self.alpha * self.beta)

    def initially_entangled(self) -> bool:
        return self.alpha * self.beta > 0

    def event_times(self) -> EventTimes:
        _require_entangled(self)
        a, b = self.alpha, self.beta
        t_esd = math.log(b / (b - a)) if b > a else None
        t_esb = math.log(b / a) if b > a else 0.0
        return EventTimes(t_esd, t_esb)

    def text(self) -> str:
        return f"pure:alpha2={self.alpha ** 2:.10g}"


@dataclass(frozen=True)
class Werner:
    """Bell state mixed with white noise, weight p; entangled for p > 1/3."""

    p: float

    def __post_init__(self):
        _check_unit("p", self.p)

    def build(self) -> XState:
        p = self.p
        return XState(rho11=(1 + p) / 4, rho22=(1 - p) / 4,
                      rho33=(1 - p) / 4, rho44=(1 + p) / 4, rho14=p / 2)

    def initially_entangled(self) -> bool:
        return self.p > 1 / 3

    def event_times(self) -> EventTimes:
        _require_entangled(self)
        p = self.p
        t_esd = math.log((1 + p) / (2 * (1 - p))) if p < 1 else None
        t_esb = math.log((1 + p) / (3 * p - 1))
        return EventTimes(t_esd, t_esb)

    def text(self) -> str:
        return f"werner:p={self.p:.10g}"


@dataclass(frozen=True)
class MixedA:
    """(a|11><11| + 2|Psi><Psi| + (1-a)|00><00|)/3; entangled for every a."""

    a: float

    def __post_init__(self):
        _check_unit("a", self.a)

    def build(self) -> XState:
        a = self.a
        return XState(rho11=(1 - a) / 3, rho22=1 / 3, rho33=1 / 3,
                      rho44=a / 3, rho23=1 / 3)

    def initially_entangled(self) -> bool:
        return True

    def event_times(self) -> EventTimes:
        a = self.a
        root = math.sqrt(2 * a ** 2 - a ** 3 + a ** 4)
        t_esd = (math.log((a + a ** 2 + root) / (3 * a - 1))
                 if a > 1 / 3 else None)
        if a == 0.0:
            t_esb = 0.0
        else:
            t_esb = max(0.0, math.log((a + root) / (1 - a + a ** 2)))
        return EventTimes(t_esd, t_esb)

    def text(self) -> str:
        return f"mixeda:a={self.a:.10g}"


@dataclass(frozen=True)
class MixedC:
    """c |Phi><Phi| + (1-c) |11><11|; entangled for c > 0."""

    c: float

    def __post_init__(self):
        _check_unit("c", self.c)

    def build(self) -> XState:
        c = self.c
        return XState(rho11=c / 2, rho22=0.0, rho33=0.0,
                      rho44=1 - c / 2, rho14=c / 2)

    def initially_entangled(self) -> bool:
        return self.c > 0

    def event_times(self) -> EventTimes:
        _require_entangled(self)
        c = self.c
        t_esd = math.log((2 - c) / (2 * (1 - c))) if c < 1 else None
        t_esb = math.log((2 - c) / c)
        return EventTimes(t_esd, t_esb)

    def text(self) -> str:
        return f"mixedc:c={self.c:.10g}"


@dataclass(frozen=True)
class NoisySC:
    """(1/sqrt26)|00> + (5/sqrt26)|11> mixed with white noise, weight 1-f.

    Entangled for f > 13/23; both event times are finite on that range.
    """

    f: float

    def __post_init__(self):
        _check_unit("f", self.f)

    def build(self) -> XState:
        f = self.f
        w = (1 - f) / 4
        return XState(rho11=f / 26 + w, rho22=w, rho33=w,
                      rho44=25 * f / 26 + w, rho14=5 * f / 26)

    def initially_entangled(self) -> bool:
        return self.f > 13 / 23

    def event_times(self) -> EventTimes:
        _require_entangled(self)
        f = self.f
        t_esd = math.log((13 + 37 * f) / (26 + 14 * f))
        t_esb = math.log((13 + 37 * f) / (23 * f - 13))
        return EventTimes(t_esd, t_esb)

    def text(self) -> str:
        return f"noisysc:f={self.f:.10g}"


FamilySpec = PureSuperposition | Werner | MixedA | MixedC | NoisySC


def _require_entangled(spec: FamilySpec):
    if not spec.initially_entangled():
        raise SeparableInitialStateError(
            f"{spec.text()} is separable at kt=0; event times are undefined")


def parse_family(text: str) -> FamilySpec:
    """Parse the canonical textual form, e.g. 'pure:alpha2=0.1'."""
    try:
        kind, assign = text.strip().split(":", 1)
        key, raw = assign.split("=", 1)
        value = float(raw)
    except ValueError:
        raise ValueError(f"malformed family spec {text!r}; "
                         "expected kind:param=value") from None
    kind, key = kind.lower(), key.lower()
    table = {
        ("pure", "alpha2"): lambda v: PureSuperposition(
            math.sqrt(_check_unit("alpha2", v)), math.sqrt(1 - v)),
        ("werner", "p"): Werner,
        ("mixeda", "a"): MixedA,
        ("mixedc", "c"): MixedC,
        ("noisysc", "f"): NoisySC,
    }
    if (kind, key) not in table:
        raise ValueError(f"unknown family spec {text!r}")
    return table[(kind, key)](value)


def _first_flip(pred, lo: float, hi: float, n_scan: int, tol: float) -> float | None:
    """First t in (lo, hi] where boolean pred flips from pred(lo), or None.

    Assumes at most one flip on the interval; locates it by scan + bisection.
    """
    base = pred(lo)
    ts = [lo + (hi - lo) * i / n_scan for i in range(n_scan + 1)]
    t_prev = lo
    for t in ts[1:]:
        if pred(t) != base:
            a, b = t_prev, t
            while b - a > tol:
                mid = 0.5 * (a + b)
                if pred(mid) != base:
                    b = mid
                else:
                    a = mid
            return 0.5 * (a + b)
        t_prev = t
    return None


def numeric_event_times(spec: FamilySpec, kt_max: float = 60.0,
                        tol: float = 1e-8, n_scan: int = 2000) -> EventTimes:
    """Event times located by bisection on the closed-form reductions.

    Independent of the analytic formulas; used to cross-check them.
    """
    _require_entangled(spec)
    x = spec.build()
    t_esd = _first_flip(lambda t: entanglement_margin(cavity_reduced(x, t)) > 0,
                        0.0, kt_max, n_scan, tol)
    t_esb = _first_flip(lambda t: entanglement_margin(reservoir_reduced(x, t)) > 0,
                        0.0, kt_max, n_scan, tol)
    if t_esb is None:
        raise RuntimeError("reservoir entanglement never appeared; "
                           f"kt_max={kt_max} too small?")
    # Collapse a flip within tol of zero to exactly zero (immediate birth).
    if t_esb < 2 * tol:
        t_esb = 0.0
    return EventTimes(t_esd, t_esb)
