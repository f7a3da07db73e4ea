"""Good, Hoffman and restricted good partitions, their verification, and E_W / F_W splits.

All three constructions return a :class:`Partition` over the indices of a
:class:`PointSequence`.  Ties between equal distances (or equal arguments)
are broken by the lexicographic key (modulus, argument, index).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .disc import CarlesonWindow, _check_gamma
from .sequences import PointSequence, pseudo_hyperbolic_matrix

NN_TOL = 1e-12
METRICS = ("pseudo_hyperbolic", "hyperbolic", "euclidean")


class PartitionKind(str, Enum):
    GOOD = "good"
    HOFFMAN = "hoffman"
    RESTRICTED = "restricted"


@dataclass
class Partition:
    part_a: tuple[int, ...]
    part_b: tuple[int, ...]
    phi: dict[int, int]
    psi: dict[int, int]
    kind: PartitionKind
    n_points: int
    gamma: Optional[float] = None
    metric: Optional[str] = None

    def pairs(self) -> list[tuple[int, int]]:
        """(a, phi(a)) for every a in A with phi defined, excluding the singleton self-map."""
        return [(a, b) for a, b in sorted(self.phi.items()) if a != b]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "n_points": self.n_points,
            "gamma": self.gamma,
            "metric": self.metric,
            "part_a": list(self.part_a),
            "part_b": list(self.part_b),
            "phi": [[a, b] for a, b in sorted(self.phi.items())],
            "psi": [[b, a] for b, a in sorted(self.psi.items())],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Partition":
        return cls(
            part_a=tuple(d["part_a"]),
            part_b=tuple(d["part_b"]),
            phi={int(a): int(b) for a, b in d["phi"]},
            psi={int(b): int(a) for b, a in d["psi"]},
            kind=PartitionKind(d["kind"]),
            n_points=int(d["n_points"]),
            gamma=d.get("gamma"),
            metric=d.get("metric"),
        )


@dataclass
class Violation:
    clause: str
    index: Optional[int]
    detail: str


@dataclass
class WindowClassification:
    e_w: tuple[int, ...]
    f_w: tuple[int, ...]


def distance_matrix(z: np.ndarray, metric: str) -> np.ndarray:
    if metric == "pseudo_hyperbolic":
        return pseudo_hyperbolic_matrix(z)
    if metric == "hyperbolic":
        return np.arctanh(pseudo_hyperbolic_matrix(z))
    if metric == "euclidean":
        d = np.abs(z[:, None] - z[None, :])
        upper = np.triu(d, 1)
        return upper + upper.T
    raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")


def tie_rank(s: PointSequence) -> np.ndarray:
    """rank[i] = position of i in the (modulus, argument, index) order."""
    order = np.lexsort((np.arange(len(s)), s.arguments, s.moduli))
    rank = np.empty(len(s), dtype=int)
    rank[order] = np.arange(len(s))
    return rank


def nearest_neighbours(dist: np.ndarray, rank: np.ndarray) -> np.ndarray:
    """Index of the nearest other point, ties broken by `rank`."""
    d = dist.copy()
    np.fill_diagonal(d, np.inf)
    closest = d == d.min(axis=1, keepdims=True)
    return np.argmin(np.where(closest, rank[None, :], np.iinfo(np.int64).max), axis=1)


def _colour_by_branches(order: Sequence[int], nn: dict[int, int]) -> dict[int, str]:
    """Two-colour the nearest-neighbour graph by walking branches.

    Points are taken in `order` (closest to the base point first).  A walk
    a1 -> b1 -> a2 -> ... follows nearest neighbours until it closes a
    mutual pair, in which case its points alternate A, B, A, ... from the
    start; or until it reaches an already coloured point, in which case the
    walk is coloured backwards so that every point gets the opposite colour
    of its nearest neighbour.
    """
    side: dict[int, str] = {}
    flip = {"A": "B", "B": "A"}
    for c in order:
        if c in side:
            continue
        path = [c]
        while True:
            nxt = nn[path[-1]]
            if nxt in side:
                colour = side[nxt]
                for p in reversed(path):
                    colour = flip[colour]
                    side[p] = colour
                break
            if len(path) >= 2 and nxt == path[-2]:
                for k, p in enumerate(path):
                    side[p] = "A" if k % 2 == 0 else "B"
                break
            if nxt in path:
                # impossible with a strict tie-break: nearest-neighbour cycles have length 2
                raise RuntimeError(f"nearest-neighbour walk revisited {nxt}")
            path.append(nxt)
    return side


def _good_on_subset(s: PointSequence, idx: Sequence[int], metric: str, rank: np.ndarray):
    idx = list(idx)
    sub = np.asarray(idx)
    dist = distance_matrix(s.z[sub], metric)
    local_nn = nearest_neighbours(dist, rank[sub])
    nn = {idx[i]: idx[int(j)] for i, j in enumerate(local_nn)}
    # distance to the origin is increasing in the modulus for all three metrics
    order = sorted(idx, key=lambda i: rank[i])
    side = _colour_by_branches(order, nn)
    phi = {p: nn[p] for p in idx if side[p] == "A"}
    psi = {p: nn[p] for p in idx if side[p] == "B"}
    return side, phi, psi


def good_partition(s: PointSequence, metric: str = "hyperbolic") -> Partition:
    """Good partition: phi and psi send every point to a nearest neighbour in the whole sequence."""
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")
    n = len(s)
    if n == 1:
        return Partition((0,), (), {0: 0}, {}, PartitionKind.GOOD, 1, metric=metric)
    side, phi, psi = _good_on_subset(s, range(n), metric, tie_rank(s))
    part_a = tuple(i for i in range(n) if side[i] == "A")
    part_b = tuple(i for i in range(n) if side[i] == "B")
    return Partition(part_a, part_b, phi, psi, PartitionKind.GOOD, n, metric=metric)


def hoffman_partition(s: PointSequence, gamma: float) -> Partition:
    """Alternate a0, b0, a1, b1, ... by increasing argument inside each annulus of each half-disc."""
    _check_gamma(gamma)
    ann = s.annulus_indices(gamma)
    arg, mod = s.arguments, s.moduli
    upper = arg < math.pi
    part_a, part_b, phi, psi = [], [], {}, {}
    for half in (upper, ~upper):
        for n in np.unique(ann[half]):
            members = np.flatnonzero(half & (ann == n))
            members = members[np.lexsort((members, mod[members], arg[members]))]
            for j in range(0, members.size, 2):
                a = int(members[j])
                part_a.append(a)
                if j + 1 < members.size:
                    b = int(members[j + 1])
                    part_b.append(b)
                    phi[a] = b
                    psi[b] = a
    return Partition(
        tuple(sorted(part_a)), tuple(sorted(part_b)), phi, psi, PartitionKind.HOFFMAN, len(s), gamma=gamma
    )


def restricted_good_partition(s: PointSequence, gamma: float) -> Partition:
    """A good partition (hyperbolic metric) inside every annulus C_n(gamma); singletons go to A."""
    _check_gamma(gamma)
    ann = s.annulus_indices(gamma)
    rank = tie_rank(s)
    side: dict[int, str] = {}
    phi: dict[int, int] = {}
    psi: dict[int, int] = {}
    for n in np.unique(ann):
        members = [int(i) for i in np.flatnonzero(ann == n)]
        if len(members) == 1:
            side[members[0]] = "A"
            continue
        sd, ph, ps = _good_on_subset(s, members, "hyperbolic", rank)
        side.update(sd)
        phi.update(ph)
        psi.update(ps)
    part_a = tuple(i for i in range(len(s)) if side[i] == "A")
    part_b = tuple(i for i in range(len(s)) if side[i] == "B")
    return Partition(part_a, part_b, phi, psi, PartitionKind.RESTRICTED, len(s), gamma=gamma, metric="hyperbolic")


def build_partition(s: PointSequence, kind, gamma: float = 0.5, metric: str = "hyperbolic") -> Partition:
    kind = PartitionKind(kind)
    if kind is PartitionKind.GOOD:
        return good_partition(s, metric)
    if kind is PartitionKind.HOFFMAN:
        return hoffman_partition(s, gamma)
    return restricted_good_partition(s, gamma)


def classify_window_points(s: PointSequence, p: Partition, w: CarlesonWindow) -> WindowClassification:
    """Split A n W into E_W (partner outside W or undefined) and F_W (partner inside W)."""
    if p.n_points != len(s):
        raise ValueError(f"partition is over {p.n_points} points but the sequence has {len(s)}")
    inside = w.contains(s.z)
    e_w, f_w = [], []
    for a in p.part_a:
        if not inside[a]:
            continue
        b = p.phi.get(a)
        if b is not None and b != a and inside[b]:
            f_w.append(a)
        else:
            e_w.append(a)
    return WindowClassification(tuple(e_w), tuple(f_w))


def _nn_violations(dist, members, mapping, label) -> list[Violation]:
    out = []
    pos = {m: k for k, m in enumerate(members)}
    for x, y in sorted(mapping.items()):
        if x not in pos or y not in pos:
            continue
        row = dist[pos[x]].copy()
        row[pos[x]] = np.inf
        best = row.min()
        if row[pos[y]] > best + NN_TOL:
            out.append(
                Violation(
                    "nearest-neighbour",
                    x,
                    f"{label}({x}) = {y} at distance {row[pos[y]]:.6g} but the nearest point is at {best:.6g}",
                )
            )
    return out


def verify_partition(s: PointSequence, p: Partition) -> list[Violation]:
    """Re-check every postcondition of the partition's construction; [] when valid."""
    v: list[Violation] = []
    n = len(s)
    if p.n_points != n:
        return [Violation("size", None, f"partition over {p.n_points} points, sequence has {n}")]
    a_set, b_set = set(p.part_a), set(p.part_b)
    for i in sorted(a_set & b_set):
        v.append(Violation("disjoint", i, "index in both parts"))
    for i in sorted(set(range(n)) - a_set - b_set):
        v.append(Violation("cover", i, "index in neither part"))
    for i in sorted((a_set | b_set) - set(range(n))):
        v.append(Violation("cover", i, "index out of range"))

    singleton_self_map = p.kind is PartitionKind.GOOD and n == 1 and p.phi == {0: 0}
    for a, b in sorted(p.phi.items()):
        if a not in a_set:
            v.append(Violation("phi-domain", a, f"phi defined on {a} which is not in A"))
        if b not in b_set and not singleton_self_map:
            v.append(Violation("phi-range", a, f"phi({a}) = {b} is not in B"))
    for b, a in sorted(p.psi.items()):
        if b not in b_set:
            v.append(Violation("psi-domain", b, f"psi defined on {b} which is not in B"))
        if a not in a_set:
            v.append(Violation("psi-range", b, f"psi({b}) = {a} is not in A"))

    if p.kind is PartitionKind.GOOD:
        if n > 1:
            metric = p.metric or "hyperbolic"
            members = list(range(n))
            dist = distance_matrix(s.z, metric)
            v += _totality(p, a_set, b_set)
            v += _nn_violations(dist, members, p.phi, "phi")
            v += _nn_violations(dist, members, p.psi, "psi")
    elif p.kind is PartitionKind.RESTRICTED:
        v += _verify_restricted(s, p, a_set, b_set)
    else:
        v += _verify_hoffman(s, p)
    return v


def _totality(p: Partition, a_set, b_set, within=None) -> list[Violation]:
    out = []
    for a in sorted(a_set):
        if (within is None or a in within) and a not in p.phi:
            out.append(Violation("phi-total", a, f"phi undefined on {a}"))
    for b in sorted(b_set):
        if (within is None or b in within) and b not in p.psi:
            out.append(Violation("psi-total", b, f"psi undefined on {b}"))
    return out


def _verify_restricted(s: PointSequence, p: Partition, a_set, b_set) -> list[Violation]:
    out = []
    gamma = p.gamma
    if gamma is None:
        return [Violation("gamma", None, "restricted partition without gamma")]
    ann = s.annulus_indices(gamma)
    t = s.heights
    for n in np.unique(ann):
        members = [int(i) for i in np.flatnonzero(ann == n)]
        if len(members) == 1:
            if members[0] not in a_set:
                out.append(Violation("singleton-annulus", members[0], "singleton annulus point not in A"))
            continue
        dist = distance_matrix(s.z[members], p.metric or "hyperbolic")
        mset = set(members)
        out += _totality(p, a_set, b_set, within=mset)
        out += _nn_violations(dist, members, {a: b for a, b in p.phi.items() if a in mset}, "phi")
        out += _nn_violations(dist, members, {b: a for b, a in p.psi.items() if b in mset}, "psi")
    for label, mapping in (("phi", p.phi), ("psi", p.psi)):
        for x, y in sorted(mapping.items()):
            if ann[x] != ann[y]:
                out.append(Violation("same-annulus", x, f"{label}({x}) = {y} lies in another annulus"))
    for a, b in sorted(p.phi.items()):
        ratio = t[a] / t[b]
        if not gamma <= ratio <= 1.0 / gamma:
            out.append(Violation("ratio-bound", a, f"(1-|a|)/(1-|phi(a)|) = {ratio:.6g} outside [gamma, 1/gamma]"))
    return out


def _verify_hoffman(s: PointSequence, p: Partition) -> list[Violation]:
    out = []
    gamma = p.gamma
    if gamma is None:
        return [Violation("gamma", None, "Hoffman partition without gamma")]
    ann = s.annulus_indices(gamma)
    arg = s.arguments
    upper = arg < math.pi
    for a, b in sorted(p.phi.items()):
        if ann[a] != ann[b]:
            out.append(Violation("same-annulus", a, f"phi({a}) = {b} lies in another annulus"))
        if upper[a] != upper[b]:
            out.append(Violation("same-half", a, f"phi({a}) = {b} lies in the other half-disc"))
        if arg[b] < arg[a]:
            out.append(Violation("argument-order", a, f"Arg phi({a}) = {arg[b]:.6g} < Arg {a} = {arg[a]:.6g}"))
        if p.psi.get(b) != a:
            out.append(Violation("psi-inverse", b, f"psi({b}) != {a}"))
    # segments (a, phi(a)) of one annulus and half must not interleave in argument
    groups: dict[tuple, list] = {}
    for a, b in p.phi.items():
        groups.setdefault((int(ann[a]), bool(upper[a])), []).append((arg[a], arg[b], a))
    for intervals in groups.values():
        intervals.sort()
        for (lo1, hi1, a1), (lo2, hi2, a2) in zip(intervals, intervals[1:]):
            if lo2 < hi1:
                out.append(Violation("non-crossing", a2, f"argument interval of {a2} overlaps that of {a1}"))
    return out
