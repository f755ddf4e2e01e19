"""Connection-probability kernels for long-range percolation on Z^d.

Three families are supported, all equal to 1 between sup-norm neighbours:

* ``EXACT_CUBE``: ``1 - exp(-beta * J(u - v))`` where ``J`` is the integral of
  ``|x - y|^(-2d)`` over the unit cubes anchored at ``u`` and ``v``.
* ``TRUNCATED_POWER``: ``min(beta / |u - v|^(2d), 1)``.
* ``EXPONENTIAL_POWER``: ``1 - exp(-beta / |u - v|^(2d))``.

``|.|`` is the Euclidean norm throughout.
"""
from __future__ import annotations

import enum
import itertools
import math
import threading
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np


class Family(str, enum.Enum):
    EXACT_CUBE = "ExactCube"
    TRUNCATED_POWER = "TruncatedPower"
    EXPONENTIAL_POWER = "ExponentialPower"


@dataclass(frozen=True)
class KernelSpec:
    family: Family
    beta: float

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        b = float(self.beta)
        if not (b >= 0.0) or math.isinf(b):
            raise ValueError(f"beta must be a finite nonnegative real, got {self.beta!r}")
        object.__setattr__(self, "beta", b)

    @classmethod
    def exact(cls, beta: float) -> "KernelSpec":
        return cls(Family.EXACT_CUBE, beta)


class Interaction(NamedTuple):
    value: float
    displacement: tuple


class BoundViolation(AssertionError):
    pass


class BoundReport(NamedTuple):
    lower: float
    probability: float
    upper: float


class DegreeEstimate(NamedTuple):
    value: float
    tail_upper: float
    bound: float
    radius: int


def canonical(disp: Sequence[int]) -> tuple:
    """Sorted (descending) absolute components; kernels depend only on this."""
    return tuple(sorted((abs(int(c)) for c in disp), reverse=True))


def _check_disp(disp, d):
    disp = tuple(int(c) for c in disp)
    if d is not None and len(disp) != d:
        raise ValueError(f"displacement {disp} does not have dimension {d}")
    if len(disp) < 1:
        raise ValueError("dimension must be at least 1")
    return disp


# ---------------------------------------------------------------------------
# cube-pair interaction
# ---------------------------------------------------------------------------

_REL_TOL = 1e-13
_MAX_ORDER = 128


@lru_cache(maxsize=None)
def _rule(order: int, d: int):
    """Tensor Gauss-Legendre rule on [-1, 1]^d for the weight prod(1 - |z_i|).

    Each axis is split at 0, where the triangular weight has its kink, so the
    integrand is smooth on every piece.
    """
    x, w = np.polynomial.legendre.leggauss(order)
    z = np.concatenate([(x - 1.0) / 2.0, (x + 1.0) / 2.0])
    wz = np.concatenate([w, w]) / 2.0 * (1.0 - np.abs(z))
    grids = np.meshgrid(*([z] * d), indexing="ij")
    wgrids = np.meshgrid(*([wz] * d), indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    wts = np.prod(np.stack([g.ravel() for g in wgrids], axis=1), axis=1)
    return pts, wts


def _quad(classes: np.ndarray, order: int) -> np.ndarray:
    d = classes.shape[1]
    pts, wts = _rule(order, d)
    out = np.empty(len(classes))
    chunk = max(1, 2_000_000 // len(wts))
    for s in range(0, len(classes), chunk):
        c = classes[s:s + chunk].astype(float)
        r2 = ((c[:, None, :] + pts[None, :, :]) ** 2).sum(axis=2)
        out[s:s + chunk] = (r2 ** (-d) * wts[None, :]).sum(axis=1)
    return out


def _quad_adaptive(classes: np.ndarray) -> np.ndarray:
    """Order doubling until two successive rules agree to ``_REL_TOL``."""
    result = np.empty(len(classes))
    todo = np.arange(len(classes))
    order = 4
    prev = _quad(classes, order)
    while len(todo):
        order *= 2
        cur = _quad(classes[todo], order)
        ok = np.abs(cur - prev) <= _REL_TOL * np.abs(cur)
        if order >= _MAX_ORDER:
            ok[:] = True
        result[todo[ok]] = cur[ok]
        todo = todo[~ok]
        prev = cur[~ok]
    return result


class _InteractionCache:
    """Thread-safe cache of J keyed by canonical displacement class."""

    def __init__(self):
        self._values: dict[tuple, float] = {}
        self._lock = threading.Lock()

    def get_many(self, classes: np.ndarray) -> np.ndarray:
        keys = [tuple(int(v) for v in row) for row in classes]
        vals = self._values
        missing = sorted({k for k in keys if k not in vals})
        if missing:
            computed = _quad_adaptive(np.asarray(missing, dtype=np.int64))
            with self._lock:
                for k, v in zip(missing, computed):
                    vals.setdefault(k, float(v))
        return np.array([vals[k] for k in keys], dtype=float)

    def clear(self):
        with self._lock:
            self._values.clear()

    def __len__(self):
        return len(self._values)


_CACHE = _InteractionCache()


def interaction_values(classes: np.ndarray) -> np.ndarray:
    """J for an array of canonical classes with sup norm >= 2 (cached)."""
    classes = np.asarray(classes, dtype=np.int64)
    if classes.ndim != 2:
        raise ValueError("classes must be a 2-d array")
    if len(classes) == 0:
        return np.empty(0)
    if np.any(classes.max(axis=1) < 2):
        raise ValueError("interaction is infinite for sup-norm distance <= 1")
    return _CACHE.get_many(classes)


def cube_interaction(disp: Sequence[int], d: int | None = None) -> Interaction:
    """``J(disp) = int_{[0,1)^d} int_{disp+[0,1)^d} |x - y|^(-2d) dy dx``.

    Computed as the one-shot integral of ``prod(1 - |z_i|) |disp + z|^(-2d)``
    over ``[-1, 1]^d``. Returns ``inf`` when ``|disp|_inf <= 1``.
    """
    disp = _check_disp(disp, d)
    c = canonical(disp)
    if c[0] <= 1:
        return Interaction(math.inf, disp)
    return Interaction(float(interaction_values(np.array([c]))[0]), disp)


# ---------------------------------------------------------------------------
# connection probabilities
# ---------------------------------------------------------------------------

def _family_probs(kernel: KernelSpec, classes: np.ndarray) -> np.ndarray:
    """Probabilities for canonical classes, all with sup norm >= 2."""
    d = classes.shape[1]
    beta = kernel.beta
    if beta == 0.0:
        return np.zeros(len(classes))
    if kernel.family is Family.EXACT_CUBE:
        return -np.expm1(-beta * interaction_values(classes))
    r2d = (classes.astype(float) ** 2).sum(axis=1) ** d
    if kernel.family is Family.TRUNCATED_POWER:
        return np.minimum(beta / r2d, 1.0)
    return -np.expm1(-beta / r2d)


def connection_probabilities(kernel: KernelSpec, disps: np.ndarray) -> np.ndarray:
    """Vectorized :func:`connection_probability` over rows of ``disps``."""
    disps = np.atleast_2d(np.asarray(disps, dtype=np.int64))
    classes = -np.sort(-np.abs(disps), axis=1)
    sup = classes[:, 0]
    if np.any(sup == 0):
        raise ValueError("zero displacement is not a vertex pair")
    out = np.ones(len(disps))
    far = sup >= 2
    if far.any():
        uniq, inv = np.unique(classes[far], axis=0, return_inverse=True)
        out[far] = _family_probs(kernel, uniq)[np.ravel(inv)]
    return out


def connection_probability(kernel: KernelSpec, disp: Sequence[int]) -> float:
    disp = _check_disp(disp, None)
    return float(connection_probabilities(kernel, np.array([disp]))[0])


def check_probability_bounds(kernel: KernelSpec, disp: Sequence[int]) -> BoundReport:
    """Check ``(4d)^(-2d) beta/k^(2d) ^ 1/2 <= p <= 2^(2d) beta/k^(2d)``, k the sup norm.

    Raises :class:`BoundViolation` on failure.
    """
    if kernel.family is not Family.EXACT_CUBE:
        raise ValueError("bounds are stated for the ExactCube kernel")
    disp = _check_disp(disp, None)
    d = len(disp)
    k = max(abs(c) for c in disp)
    if k < 2:
        raise ValueError("bounds need sup-norm distance >= 2")
    p = connection_probability(kernel, disp)
    lower = min((4 * d) ** (-2 * d) * kernel.beta / k ** (2 * d), 0.5)
    upper = 2 ** (2 * d) * kernel.beta / k ** (2 * d)
    slack = 1e-12 * max(p, 1e-300)
    if not (lower - slack <= p <= upper + slack):
        raise BoundViolation(f"p={p!r} outside [{lower!r}, {upper!r}] for {disp}")
    return BoundReport(lower, p, upper)


def probability_bounds(kernel: KernelSpec, disps: np.ndarray):
    """Vectorized bounds: arrays ``(lower, p, upper)`` for rows of ``disps`` (sup norm >= 2)."""
    if kernel.family is not Family.EXACT_CUBE:
        raise ValueError("bounds are stated for the ExactCube kernel")
    disps = np.atleast_2d(np.asarray(disps, dtype=np.int64))
    d = disps.shape[1]
    k = np.abs(disps).max(axis=1).astype(float)
    if np.any(k < 2):
        raise ValueError("bounds need sup-norm distance >= 2")
    p = connection_probabilities(kernel, disps)
    lower = np.minimum((4.0 * d) ** (-2 * d) * kernel.beta / k ** (2 * d), 0.5)
    upper = 2.0 ** (2 * d) * kernel.beta / k ** (2 * d)
    return lower, p, upper


def block_offsets(n: int, d: int):
    """Offsets ``b - a`` for ``a, b`` in ``{0..n-1}^d`` with their multiplicities."""
    r = np.arange(-(n - 1), n)
    offs = np.array(list(itertools.product(r, repeat=d)), dtype=np.int64).reshape(-1, d)
    mult = np.prod(n - np.abs(offs), axis=1)
    return offs, mult


def block_connection_probability(kernel: KernelSpec, disp: Sequence[int], n: int) -> float:
    """Probability that blocks ``V_0^n`` and ``V_disp^n`` share at least one edge."""
    disp = _check_disp(disp, None)
    if max(abs(c) for c in disp) < 2:
        raise ValueError("blocks must be at block sup-distance >= 2")
    if n < 1:
        raise ValueError("n must be positive")
    if kernel.beta == 0.0:
        return 0.0
    offs, mult = block_offsets(n, len(disp))
    cell = n * np.asarray(disp, dtype=np.int64)[None, :] + offs
    p = connection_probabilities(kernel, cell)
    log_none = float(np.sum(mult * np.log1p(-np.minimum(p, 1.0))))
    return float(-math.expm1(log_none))


# ---------------------------------------------------------------------------
# degree and kernel comparison
# ---------------------------------------------------------------------------

def classes_with_multiplicity(d: int, kmin: int, kmax: int):
    """Canonical classes with sup norm in ``[kmin, kmax]`` and lattice multiplicities."""
    rows, mult = [], []
    for top in range(kmin, kmax + 1):
        for rest in itertools.combinations_with_replacement(range(top, -1, -1), d - 1):
            c = (top,) + rest
            counts = {}
            for v in c:
                counts[v] = counts.get(v, 0) + 1
            perms = math.factorial(d)
            for m in counts.values():
                perms //= math.factorial(m)
            rows.append(c)
            mult.append(perms * 2 ** sum(1 for v in c if v))
    return np.array(rows, dtype=np.int64).reshape(-1, d), np.array(mult, dtype=np.int64)


DEFAULT_DEGREE_RADIUS = {1: 10_000, 2: 256, 3: 48}


def degree_bound(beta: float, d: int) -> float:
    """``ceil(beta) 3^(5d)`` with ``ceil(beta)`` floored at 1 (the beta=0 graph has degree 3^d - 1)."""
    return max(math.ceil(beta), 1) * 3.0 ** (5 * d)


def expected_degree(kernel: KernelSpec, d: int, radius: int | None = None) -> DegreeEstimate:
    """Expected degree of the origin on Z^d, truncated at sup norm ``radius``.

    The neglected tail lies in ``[0, beta 50^d (radius+1)^(-d)]``.
    """
    R = DEFAULT_DEGREE_RADIUS.get(d, 16) if radius is None else int(radius)
    if R < 2:
        raise ValueError("radius must be at least 2")
    mu = 3.0**d - 1.0
    if kernel.beta > 0:
        classes, mult = classes_with_multiplicity(d, 2, R)
        p = _family_probs(kernel, classes)
        mu += float(np.sum(mult * p))
    tail = kernel.beta * 50.0**d * (R + 1.0) ** (-d)
    bound = degree_bound(kernel.beta, d)
    if mu + tail > bound:
        raise BoundViolation(f"expected degree {mu} + {tail} exceeds {bound}")
    return DegreeEstimate(mu, tail, bound, R)


def kernel_gap(disp: Sequence[int], beta: float) -> float:
    """``|p_exact - p_truncated| * |disp|^(2d+1)``."""
    disp = _check_disp(disp, None)
    d = len(disp)
    if max(abs(c) for c in disp) < 2:
        raise ValueError("gap is defined for sup-norm distance >= 2")
    pe = connection_probability(KernelSpec(Family.EXACT_CUBE, beta), disp)
    pt = connection_probability(KernelSpec(Family.TRUNCATED_POWER, beta), disp)
    r = math.sqrt(sum(c * c for c in disp))
    return abs(pe - pt) * r ** (2 * d + 1)


def kernel_table(kernels: Sequence[KernelSpec], d: int, kmax: int):
    """Rows ``(d, family, beta, displacement, probability)`` for every class up to ``kmax``."""
    classes, _ = classes_with_multiplicity(d, 1, kmax)
    rows = []
    for kern in kernels:
        p = connection_probabilities(kern, classes)
        for c, pv in zip(classes, p):
            rows.append((d, kern.family.value, kern.beta, " ".join(map(str, c)), float(pv)))
    return rows
