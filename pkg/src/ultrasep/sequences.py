"""Finite point sequences: separation, Carleson norm, Blaschke products, condition (C)."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from .disc import (
    TWO_PI,
    CarlesonWindow,
    DiscPoint,
    _check_gamma,
    annulus_indices,
    as_complex,
)
from .errors import DegenerateDenominatorError, SequenceFormatError

CANDIDATE_EPS = 1e-9
DEGENERATE_DENOMINATOR = 1e-300


def _coerce_point(p) -> complex:
    if isinstance(p, DiscPoint):
        return p.z
    if isinstance(p, (list, tuple)):
        if len(p) != 2:
            raise SequenceFormatError(f"expected a [re, im] pair, got {p!r}")
        return complex(float(p[0]), float(p[1]))
    return complex(p)


class PointSequence:
    """A finite, nonempty, duplicate-free ordered list of points of the open disc."""

    def __init__(self, points: Iterable):
        z = np.array([_coerce_point(p) for p in points], dtype=complex)
        if z.size == 0:
            raise SequenceFormatError("a point sequence must be nonempty")
        if not np.all(np.isfinite(z)):
            raise SequenceFormatError("non-finite coordinates")
        bad = np.flatnonzero(np.abs(z) >= 1.0)
        if bad.size:
            raise SequenceFormatError(f"point {bad[0]} ({z[bad[0]]}) is not inside the open unit disc")
        # exact equality, as required of the document format
        _, first, counts = np.unique(z, return_index=True, return_counts=True)
        if np.any(counts > 1):
            dup = int(np.sort(first[counts > 1])[0])
            raise SequenceFormatError(f"duplicate point {z[dup]} at index {dup}")
        z.setflags(write=False)
        self.z = z
        self._annuli: dict[float, np.ndarray] = {}

    def __len__(self) -> int:
        return self.z.size

    def __getitem__(self, i) -> complex:
        return complex(self.z[i])

    def __iter__(self):
        return (complex(v) for v in self.z)

    def __repr__(self) -> str:
        return f"PointSequence(n={len(self)})"

    def __eq__(self, other) -> bool:
        return isinstance(other, PointSequence) and np.array_equal(self.z, other.z)

    @cached_property
    def moduli(self) -> np.ndarray:
        return np.abs(self.z)

    @cached_property
    def heights(self) -> np.ndarray:
        """1 - |a|, the canonical-measure weights."""
        return 1.0 - self.moduli

    @cached_property
    def arguments(self) -> np.ndarray:
        """Arguments in [0, 2 pi), with Arg 0 = 0."""
        arg = np.mod(np.angle(self.z), TWO_PI)
        arg[self.z == 0] = 0.0
        # np.mod can return exactly 2 pi for tiny negative angles
        arg[arg >= TWO_PI] = 0.0
        return arg

    def annulus_indices(self, gamma: float) -> np.ndarray:
        if gamma not in self._annuli:
            self._annuli[gamma] = annulus_indices(self.z, gamma)
        return self._annuli[gamma]

    def points(self) -> list[DiscPoint]:
        return [DiscPoint.from_complex(v) for v in self.z]

    def with_point(self, p) -> "PointSequence":
        return PointSequence(list(self.z) + [_coerce_point(p)])

    # -- document format: a JSON array of [re, im] pairs

    def to_json(self) -> str:
        return json.dumps([[float(v.real), float(v.imag)] for v in self.z])

    @classmethod
    def from_json(cls, text: str) -> "PointSequence":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SequenceFormatError(f"not a JSON document: {exc}") from exc
        if not isinstance(data, list):
            raise SequenceFormatError("expected a JSON array of [re, im] pairs")
        for p in data:
            if not (isinstance(p, list) and len(p) == 2 and all(isinstance(c, (int, float)) for c in p)):
                raise SequenceFormatError(f"expected a [re, im] pair of numbers, got {p!r}")
        return cls(data)

    @classmethod
    def load(cls, path) -> "PointSequence":
        return cls.from_json(Path(path).read_text())

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")


@dataclass(frozen=True)
class SeparationReport:
    delta_p: float
    witness_pair: Optional[tuple[int, int]]

    @property
    def eta(self) -> float:
        """Hyperbolic separation constant atanh(delta_p)."""
        return math.inf if self.delta_p >= 1.0 else math.atanh(self.delta_p)


@dataclass(frozen=True)
class CarlesonReport:
    norm_estimate: float
    witness_window: Optional[CarlesonWindow]
    candidate_count: int


def pseudo_hyperbolic_matrix(z: np.ndarray) -> np.ndarray:
    """Symmetric matrix of pairwise pseudo-hyperbolic distances (zero diagonal)."""
    d = np.abs(z[:, None] - z[None, :]) / np.abs(1.0 - np.conj(z)[None, :] * z[:, None])
    upper = np.triu(d, 1)
    return upper + upper.T


def separation_constant(s: PointSequence) -> SeparationReport:
    if len(s) == 1:
        return SeparationReport(1.0, None)
    d = pseudo_hyperbolic_matrix(s.z)
    iu = np.triu_indices(len(s), 1)
    k = int(np.argmin(d[iu]))
    return SeparationReport(float(d[iu][k]), (int(iu[0][k]), int(iu[1][k])))


def separation_delta(s: PointSequence) -> float:
    """Largest delta for which the discs D(a, delta (1 - |a|)) are pairwise disjoint (closed)."""
    if len(s) == 1:
        return math.inf
    t = s.heights
    ratio = np.abs(s.z[:, None] - s.z[None, :]) / (t[:, None] + t[None, :])
    iu = np.triu_indices(len(s), 1)
    return float(ratio[iu].min())


def is_delta_separated(s: PointSequence, delta: float) -> bool:
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if len(s) == 1:
        return True
    t = s.heights
    gap = np.abs(s.z[:, None] - s.z[None, :]) - delta * (t[:, None] + t[None, :])
    iu = np.triu_indices(len(s), 1)
    return bool(np.all(gap[iu] > 0.0))


def candidate_directions(s: PointSequence) -> np.ndarray:
    """Point directions plus the bisecting direction of every pair, deduplicated."""
    nz = s.z[s.z != 0]
    if nz.size == 0:
        return np.empty(0)
    u = nz / np.abs(nz)
    angles = [np.angle(u)]
    if u.size > 1:
        i, j = np.triu_indices(u.size, 1)
        mid = u[i] + u[j]
        keep = np.abs(mid) > 1e-12
        angles.append(np.angle(mid[keep]))
    return np.unique(np.mod(np.concatenate(angles), TWO_PI))


def carleson_norm(s: PointSequence, eps: float = CANDIDATE_EPS) -> CarlesonReport:
    """Max of mu_S(W)/h over a finite family of candidate windows.

    Directions: each point's direction and the bisector of every pair.
    Heights: (1 + eps) |1 - conj(zeta) b| for each b in S, kept when < 1.
    Ties are broken toward the smallest height, then the smallest angle.
    """
    angles = candidate_directions(s)
    if angles.size == 0:
        return CarlesonReport(0.0, None, 0)
    t = s.heights
    zeta = np.exp(1j * angles)
    dist = np.abs(1.0 - np.conj(zeta)[:, None] * s.z[None, :])
    order = np.argsort(dist, axis=1, kind="stable")
    dsorted = np.take_along_axis(dist, order, axis=1)
    cum = np.cumsum(t[order], axis=1)
    heights = (1.0 + eps) * dsorted
    count = np.empty(dist.shape, dtype=int)
    for row in range(dist.shape[0]):
        count[row] = np.searchsorted(dsorted[row], heights[row], side="left")
    mass = np.take_along_axis(cum, np.maximum(count, 1) - 1, axis=1)
    valid = (heights < 1.0) & (count >= 1)
    if not np.any(valid):
        return CarlesonReport(0.0, None, 0)
    ratio = np.where(valid, mass / heights, -np.inf)
    rows, cols = np.nonzero(valid)
    r = ratio[rows, cols]
    h = heights[rows, cols]
    a = angles[rows]
    best = np.lexsort((a, h, -r))[0]
    w = CarlesonWindow.at(float(a[best]), float(h[best]))
    # recompute the winner's mass exactly with the strict membership test
    inside = np.abs(1.0 - np.conj(w.zeta) * s.z) < w.height
    norm = float(t[inside].sum() / w.height)
    return CarlesonReport(norm, w, int(rows.size))


def window_mass(s: PointSequence, w: CarlesonWindow, indices=None) -> float:
    """mu_S(W), optionally restricted to a subset of indices."""
    inside = np.abs(1.0 - np.conj(w.zeta) * s.z) < w.height
    if indices is not None:
        mask = np.zeros(len(s), dtype=bool)
        mask[list(indices)] = True
        inside &= mask
    return float(s.heights[inside].sum())


def points_per_annulus(s: PointSequence, gamma: float) -> tuple[dict[int, int], int]:
    _check_gamma(gamma)
    n, counts = np.unique(s.annulus_indices(gamma), return_counts=True)
    hist = {int(k): int(c) for k, c in zip(n, counts)}
    return hist, max(hist.values())


def carleson_bound_from_annuli(m: int, gamma: float) -> float:
    """The Carleson constant m / (gamma (1 - gamma)) for at most m points per annulus."""
    if m < 1 or int(m) != m:
        raise ValueError(f"m must be a positive integer, got {m}")
    _check_gamma(gamma)
    return m / (gamma * (1.0 - gamma))


def blaschke(zeros, z):
    """Finite Blaschke product with normalised factors (a - z)/(1 - conj(a) z) * |a|/a.

    A zero at the origin contributes the factor -z.
    """
    zeros = np.ravel(as_complex(zeros))
    z = as_complex(z)
    out = np.ones_like(z, dtype=complex) if np.ndim(z) else complex(1.0)
    for a in zeros:
        # exp(-i arg a) = |a| / a, and 1 at the origin where the factor is -z
        out = out * ((a - z) / (1.0 - np.conj(a) * z) * np.exp(-1j * np.angle(a)))
    return out


def blaschke_modulus(zeros, z):
    """|B(z)| as a product of pseudo-hyperbolic distances."""
    zeros = np.ravel(as_complex(zeros))
    z = as_complex(z)
    out = np.ones(np.shape(z)) if np.ndim(z) else 1.0
    for a in zeros:
        out = out * (np.abs(a - z) / np.abs(1.0 - np.conj(a) * z))
    return out


def blaschke_product(s: PointSequence, excluded: Optional[int], z):
    """B(z) over all points of s except index `excluded` (None keeps every point)."""
    if excluded is None:
        zeros = s.z
    else:
        zeros = np.delete(s.z, excluded)
    return blaschke(zeros, z)


def _products(s: PointSequence) -> np.ndarray:
    d = pseudo_hyperbolic_matrix(s.z)
    np.fill_diagonal(d, 1.0)
    return np.prod(d, axis=1)


def carleson_condition_inf(s: PointSequence) -> float:
    """inf over a of prod_{b != a} d_P(a, b); 1 for a singleton."""
    return float(_products(s).min())


def dual_bound_witness(s: PointSequence, a: int, z):
    """rho_a(z) = B_a(z) / B_a(a), which equals 1 at a and 0 at the other points."""
    denom = blaschke_product(s, a, s.z[a])
    if abs(denom) < DEGENERATE_DENOMINATOR:
        raise DegenerateDenominatorError(f"|B_a(a)| = {abs(denom):.3e} for a = {a}")
    return blaschke_product(s, a, z) / denom


def is_interpolating(s: PointSequence, threshold: float) -> bool:
    if not threshold > 0.0:
        raise ValueError(f"threshold must be positive, got {threshold}")
    return carleson_condition_inf(s) >= threshold
