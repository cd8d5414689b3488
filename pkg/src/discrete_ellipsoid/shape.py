"""Scalar data of discrete ellipsoids: discrete squares, trigonometric
solutions, the g-recurrence, closure conditions and the deformation axes."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .halfint import HalfIndex

DEFAULT_ZERO_TOL = 1e-9
DEGENERACY_TOL = 1e-12


class DegenerateRecurrenceError(ArithmeticError):
    """The g-recurrence would divide by a (near) zero value."""


def _twice(n) -> int:
    return n.twice_n if isinstance(n, HalfIndex) else HalfIndex.of(n).twice_n


@dataclass(frozen=True)
class SampledFunction:
    """Values of a function on the contiguous half-integer interval
    ``start, start+½, …``; ``start_twice`` is ``2*start``."""

    start_twice: int
    values: np.ndarray

    @classmethod
    def from_callable(cls, func, lo, hi) -> "SampledFunction":
        lo_t, hi_t = _twice(lo), _twice(hi)
        vals = np.array([func(t / 2) for t in range(lo_t, hi_t + 1)], dtype=float)
        return cls(lo_t, vals)

    @property
    def stop_twice(self) -> int:
        return self.start_twice + len(self.values) - 1

    def contains(self, n) -> bool:
        return self.start_twice <= _twice(n) <= self.stop_twice

    def __call__(self, n) -> float:
        t = _twice(n)
        if not self.start_twice <= t <= self.stop_twice:
            raise IndexError(f"index {t / 2} outside [{self.start_twice / 2}, {self.stop_twice / 2}]")
        return float(self.values[t - self.start_twice])

    def at_twice(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t)
        if t.size and (t.min() < self.start_twice or t.max() > self.stop_twice):
            raise IndexError("index outside sampled interval")
        return self.values[t - self.start_twice]

    def indices_twice(self) -> range:
        return range(self.start_twice, self.stop_twice + 1)

    def scaled(self, factor: float) -> "SampledFunction":
        return SampledFunction(self.start_twice, self.values * factor)


def discrete_square(f: SampledFunction, n) -> float:
    """``f(n) * f(n + ½)``."""
    t = _twice(n)
    return f(HalfIndex(t)) * f(HalfIndex(t + 1))


def discrete_squares(f: SampledFunction) -> np.ndarray:
    """Discrete squares at every index whose successor is sampled."""
    return f.values[:-1] * f.values[1:]


@dataclass(frozen=True)
class ShapeParams:
    a: float
    b: float
    c: float
    delta: float
    n1_max: int
    n2_max: int

    def __post_init__(self):
        if not self.a > self.b > self.c > 0:
            raise ValueError(f"need a > b > c > 0, got {self.a}, {self.b}, {self.c}")
        if not 0 < self.delta < math.pi:
            raise ValueError(f"delta must lie in (0, pi), got {self.delta}")
        if self.n1_max < 1 or self.n2_max < 1:
            raise ValueError("n1_max, n2_max must be positive")

    @property
    def epsilon(self) -> float:
        return 1.0 / math.sqrt(math.cos(self.delta / 2))

    @property
    def q(self) -> float:
        return (self.a - 2 * self.b + self.c) / (self.a - self.c)

    @property
    def s3_sphere(self) -> float:
        """Deformation parameter of the unit-sphere member."""
        return math.atan(math.sqrt((self.a - self.b) / (self.b - self.c)))

    @property
    def natural_g0(self) -> tuple[float, float]:
        return math.sqrt(self.a - self.b), math.sqrt(self.b - self.c)

    def to_dict(self) -> dict:
        return {
            "a": self.a,
            "b": self.b,
            "c": self.c,
            "delta": self.delta,
            "epsilon": self.epsilon,
            "q": self.q,
            "n1_max": self.n1_max,
            "n2_max": self.n2_max,
        }


def closure_q(N1: int, N2: int) -> float:
    """Shape ratio ``(a-2b+c)/(a-c)`` forced by the boundary conditions."""
    d = 4 * N1 + 4 * N2 - 2
    return math.cos((4 * N2 - 1) * math.pi / d) / math.cos(math.pi / d)


def closure_delta(N1: int, N2: int) -> float:
    return math.pi / (2 * N1 + 2 * N2 - 1)


def solve_boundary_shape(N1: int, N2: int, scale: float = 1.0) -> ShapeParams:
    """Constants for which the g-functions vanish on the domain boundary.

    Only differences of a, b, c are determined; we fix ``c = scale/2`` and
    ``a = 3*scale/2`` so that ``a - c = scale``.
    """
    if N1 < 1 or N2 < 1:
        raise ValueError("N1, N2 must be positive")
    if not scale > 0:
        raise ValueError("scale must be positive")
    q = closure_q(N1, N2)
    c = scale / 2
    a = 3 * scale / 2
    b = (a + c) / 2 - q * (a - c) / 2
    return ShapeParams(a, b, c, closure_delta(N1, N2), int(N1), int(N2))


def trig_solutions(p: ShapeParams):
    """``(f1, h1, f2, h2)`` on ``[-N1, N1]`` and ``[-N2, N2]`` in half steps."""
    amp = p.epsilon * math.sqrt(p.a - p.c)
    d = p.delta
    f1 = SampledFunction.from_callable(lambda n: amp * math.sin(d * n), -p.n1_max, p.n1_max)
    h1 = SampledFunction.from_callable(lambda n: amp * math.cos(d * n), -p.n1_max, p.n1_max)
    f2 = SampledFunction.from_callable(lambda n: amp * math.cos(d * n), -p.n2_max, p.n2_max)
    h2 = SampledFunction.from_callable(lambda n: amp * math.sin(d * n), -p.n2_max, p.n2_max)
    return f1, h1, f2, h2


@dataclass(frozen=True)
class GFunctions:
    g1: SampledFunction
    g2: SampledFunction
    boundary_residual: float
    """``max |g1(±N1)|, |g2(±N2)|`` divided by ``sqrt(a - c)``."""
    interior_sign_change: bool
    zero_tol: float

    @property
    def boundary_ok(self) -> bool:
        return self.boundary_residual < self.zero_tol


def _iterate(rhs: np.ndarray, g0: float, n_max: int, floor: float) -> np.ndarray:
    """Solve ``g(n+½) g(n) = rhs(n)`` outward from n = 0 on ``[-n_max, n_max]``.

    ``rhs[j]`` belongs to twice-index ``j - 2*n_max`` (successor stays in range).
    """
    size = 4 * n_max + 1
    g = np.empty(size)
    mid = 2 * n_max
    g[mid] = g0
    for j in range(mid, size - 1):
        if abs(g[j]) < floor:
            raise DegenerateRecurrenceError(f"g({(j - mid) / 2}) ~ 0 inside the domain")
        g[j + 1] = rhs[j] / g[j]
    for j in range(mid, 0, -1):
        if abs(g[j]) < floor:
            raise DegenerateRecurrenceError(f"g({(j - mid) / 2}) ~ 0 inside the domain")
        g[j - 1] = rhs[j - 1] / g[j]
    return g


def g_recurrence(
    p: ShapeParams,
    g1_0: float | None = None,
    g2_0: float | None = None,
    zero_tol: float = DEFAULT_ZERO_TOL,
) -> GFunctions:
    """Iterate ``g1(n+½) g1(n) = a-b - f1⟨2⟩(n)`` and
    ``g2(n+½) g2(n) = f2⟨2⟩(n) - a+b`` from the initial values at 0."""
    n1, n2 = p.natural_g0
    g1_0 = n1 if g1_0 is None else g1_0
    g2_0 = n2 if g2_0 is None else g2_0
    if g1_0 == 0 or g2_0 == 0:
        raise ValueError("initial g values must be non-zero")
    f1, _, f2, _ = trig_solutions(p)
    floor = DEGENERACY_TOL * math.sqrt(p.a - p.c)
    g1 = _iterate((p.a - p.b) - discrete_squares(f1), g1_0, p.n1_max, floor)
    g2 = _iterate(discrete_squares(f2) - (p.a - p.b), g2_0, p.n2_max, floor)
    scale = math.sqrt(p.a - p.c)
    resid = max(abs(g1[0]), abs(g1[-1]), abs(g2[0]), abs(g2[-1])) / scale
    change = bool(np.any(np.sign(g1[1:-1]) != np.sign(g1_0)) or np.any(np.sign(g2[1:-1]) != np.sign(g2_0)))
    return GFunctions(
        SampledFunction(-2 * p.n1_max, g1),
        SampledFunction(-2 * p.n2_max, g2),
        resid,
        change,
        zero_tol,
    )


@dataclass(frozen=True)
class DeformationAxes:
    f3_hat: float
    h3_hat: float

    def constraint_residual(self, p: ShapeParams) -> float:
        lhs = (p.b - p.c) * self.f3_hat**2 + (p.a - p.b) * self.h3_hat**2
        return abs(lhs - (p.a - p.c)) / (p.a - p.c)


def deformation_axes(p: ShapeParams, s3: float) -> DeformationAxes:
    if not 0 <= s3 < math.pi:
        raise ValueError(f"s3 must lie in [0, pi), got {s3}")
    return DeformationAxes(
        math.sqrt((p.a - p.c) / (p.b - p.c)) * math.cos(s3),
        math.sqrt((p.a - p.c) / (p.a - p.b)) * math.sin(s3),
    )


def shape_sequence_S(N: int, n: int) -> float:
    if N < 2 or not 0 <= n <= N:
        raise ValueError("need N >= 2 and 0 <= n <= N")
    d = 4 * N - 2
    return math.cos((4 * n - 1) * math.pi / d) / math.cos(math.pi / d)


def approximate_q(q_target: float, tol: float) -> tuple[int, int]:
    """Smallest ``N1 + N2`` whose closure ratio is within ``tol`` of ``q_target``.

    Consecutive values of the shape sequence are less than ``4π/(4N-2)`` apart,
    which bounds the search.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if not -1 < q_target < 1:
        raise ValueError("q_target must lie in (-1, 1)")
    n_bound = math.ceil((4 * math.pi / tol + 2) / 4) + 1
    for N in range(2, n_bound + 1):
        best = min(range(1, N), key=lambda n: abs(shape_sequence_S(N, n) - q_target))
        if abs(shape_sequence_S(N, best) - q_target) < tol:
            return N - best, best
    raise RuntimeError("gap bound violated")  # pragma: no cover
