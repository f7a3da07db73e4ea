"""Border strips, tubes around polylines, and gradient integrals of a cutoff field.

Geometry is Euclidean in the disc: a tube of width ``w`` around a polyline
is the union of the discs of radius ``w/2`` centred on the polyline.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .disc import (
    BoundaryDirection,
    CarlesonWindow,
    as_complex,
    cayley_to_halfplane,
    halfplane_to_disc,
)
from .errors import CapacityError, NonFiniteError, TubeOverlapError, TubeUnreachableError
from .sequences import PointSequence

LENGTH_SLACK = 1e-9
OBSTACLE_MARGIN = 1e-9  # relative inflation of obstacle discs
SIDES = ("left", "right", "top")

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(4)


# -- polyline distances


def point_segment_distance(p, s0, s1) -> np.ndarray:
    """Distances from points p (shape (M,)) to segments [s0, s1] (shape (K,)); result (M, K)."""
    p = np.atleast_1d(as_complex(p))[:, None]
    s0 = np.atleast_1d(s0)[None, :]
    s1 = np.atleast_1d(s1)[None, :]
    d = s1 - s0
    dd = np.abs(d) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        u = np.where(dd > 0, np.real((p - s0) * np.conj(d)) / dd, 0.0)
    u = np.clip(u, 0.0, 1.0)
    return np.abs(p - (s0 + u * d))


def polyline_distance(z, vertices: np.ndarray) -> np.ndarray:
    z = np.atleast_1d(as_complex(z))
    if vertices.size == 1:
        return np.abs(z - vertices[0])
    return point_segment_distance(z, vertices[:-1], vertices[1:]).min(axis=1)


def _cross(a, b):
    return np.real(a) * np.imag(b) - np.imag(a) * np.real(b)


def segment_segment_distance(p0, p1, q0, q1) -> np.ndarray:
    """Pairwise distances between segments [p0, p1] (K,) and [q0, q1] (L,); result (K, L)."""
    p0, p1 = p0[:, None], p1[:, None]
    q0, q1 = q0[None, :], q1[None, :]
    r, s = p1 - p0, q1 - q0
    denom = _cross(r, s)
    with np.errstate(invalid="ignore", divide="ignore"):
        t = _cross(q0 - p0, s) / denom
        u = _cross(q0 - p0, r) / denom
    crossing = (denom != 0) & (t >= 0) & (t <= 1) & (u >= 0) & (u <= 1)

    def ps(p, a, b):
        d = b - a
        dd = np.abs(d) ** 2
        with np.errstate(invalid="ignore", divide="ignore"):
            v = np.where(dd > 0, np.real((p - a) * np.conj(d)) / dd, 0.0)
        return np.abs(p - (a + np.clip(v, 0, 1) * d))

    dist = np.minimum.reduce([ps(p0, q0, q1), ps(p1, q0, q1), ps(q0, p0, p1), ps(q1, p0, p1)])
    return np.where(crossing, 0.0, dist)


def polyline_polyline_distance(v: np.ndarray, w: np.ndarray) -> float:
    if v.size == 1 and w.size == 1:
        return float(abs(v[0] - w[0]))
    if v.size == 1:
        return float(polyline_distance(v, w)[0])
    if w.size == 1:
        return float(polyline_distance(w, v)[0])
    return float(segment_segment_distance(v[:-1], v[1:], w[:-1], w[1:]).min())


# -- tubes


@dataclass
class Tube:
    """Union of the discs of radius width/2 centred on a polyline."""

    curve: np.ndarray
    width: float
    endpoints: Optional[tuple[complex, complex]] = None

    def __post_init__(self):
        self.curve = np.asarray(self.curve, dtype=complex)
        if not self.width > 0:
            raise ValueError(f"tube width must be positive, got {self.width}")
        if self.endpoints is None:
            self.endpoints = (complex(self.curve[0]), complex(self.curve[-1]))

    @property
    def length(self) -> float:
        return float(np.abs(np.diff(self.curve)).sum())

    def distance(self, z) -> np.ndarray:
        return polyline_distance(z, self.curve)

    def contains(self, z) -> np.ndarray:
        return self.distance(z) < self.width / 2.0

    def bbox(self) -> tuple[float, float, float, float]:
        r = self.width / 2.0
        x, y = self.curve.real, self.curve.imag
        return x.min() - r, x.max() + r, y.min() - r, y.max() + r

    def to_dict(self) -> dict:
        return {"width": self.width, "vertices": [[float(v.real), float(v.imag)] for v in self.curve]}


def _first_hit(path, centres, radii):
    """First (segment, obstacle, entry, exit) where the path enters an obstacle disc."""
    if centres.size == 0:
        return None
    pts = np.asarray(path, dtype=complex)
    near = point_segment_distance(centres, pts[:-1], pts[1:]) < radii[:, None] * (1.0 - 1e-9)
    for k in np.flatnonzero(near.any(axis=0)):
        p, q = path[k], path[k + 1]
        d = q - p
        dd = abs(d) ** 2
        if dd == 0:
            continue
        best = None
        for j in np.flatnonzero(near[:, k]):
            c, r = centres[j], radii[j]
            # |p + t d - c|^2 = r^2
            b = np.real(np.conj(d) * (p - c)) / dd
            cc = (abs(p - c) ** 2 - r * r) / dd
            disc = b * b - cc
            if disc <= 0:
                continue
            root = math.sqrt(disc)
            t1, t2 = -b - root, -b + root
            if best is None or t1 < best[0]:
                best = (t1, t2, j)
        if best is not None:
            return int(k), best
    return None


def geodesic_vertices(a: complex, b: complex, pieces: int = 64) -> list[complex]:
    """Inscribed polyline of the hyperbolic geodesic from a to b, evenly spaced in hyperbolic length.

    Its length is at most that of the geodesic arc, itself at most (pi/2)|a - b|.
    """
    w = (a - b) / (1.0 - np.conj(a) * b)
    if w == 0:
        return [a, b]
    u = np.tanh(np.linspace(0.0, math.atanh(abs(w)), pieces + 1)) * (w / abs(w))
    pts = (a - u) / (1.0 - np.conj(a) * u)
    pts[0], pts[-1] = a, b
    return [complex(v) for v in pts]


def arc_through(a: complex, b: complex, bend: float, pieces: int = 32) -> list[complex]:
    """Inscribed polyline of the circular arc from a to b with signed central angle ``bend``.

    bend = 0 gives the segment; |bend| < pi keeps the arc no longer than
    (pi/2) |a - b|, since arc / chord = (bend/2) / sin(bend/2).
    """
    if not abs(bend) < math.pi:
        raise ValueError(f"bend must lie in (-pi, pi), got {bend}")
    if abs(bend) < 1e-9:
        # sagitta |b - a| bend / 8 is below rounding of the length budget
        return [a, b]
    # affine image of the unit-circle arc e^{i bend s} sending 1 -> a, e^{i bend} -> b;
    # expm1 keeps tiny bends exact.  Positive bend bulges to the right of a -> b
    frac = np.arange(pieces + 1) / pieces
    pts = a + (b - a) * (np.expm1(1j * bend * frac) / np.expm1(1j * bend))
    pts[0], pts[-1] = a, b
    return [complex(v) for v in pts]


def annular_curve(a: complex, b: complex, bump: float = 0.0, pieces: int = 48) -> Optional[list[complex]]:
    """Curve from a to b straight in (argument, log(1-|z|)) coordinates, plus bump * sin(pi s) in log height.

    The argument turns the short way round.  Positive bumps move the curve
    toward the centre, negative ones toward the circle.  Returns None when
    the curve would pass through the origin.
    """
    th_a = cmath.phase(a) if a != 0 else cmath.phase(b)
    th_b = cmath.phase(b) if b != 0 else th_a
    turn = (th_b - th_a + math.pi) % (2.0 * math.pi) - math.pi
    s = np.linspace(0.0, 1.0, pieces + 1)
    u = (1.0 - s) * math.log(1.0 - abs(a)) + s * math.log(1.0 - abs(b)) + bump * np.sin(math.pi * s)
    if np.any(u[1:-1] >= 0.0):
        return None
    pts = (1.0 - np.exp(u)) * np.exp(1j * (th_a + turn * s))
    pts[0], pts[-1] = a, b
    return [complex(v) for v in pts]


def _arc_vertices(c, r, e1, e2, chords_per_semicircle):
    th1 = math.atan2((e1 - c).imag, (e1 - c).real)
    th2 = math.atan2((e2 - c).imag, (e2 - c).real)
    sweep = (th2 - th1 + math.pi) % (2 * math.pi) - math.pi
    if sweep == -math.pi:
        sweep = math.pi
    k = max(1, int(math.ceil(abs(sweep) / (math.pi / chords_per_semicircle))))
    # circumscribed radius keeps every chord outside the disc
    rr = r / math.cos(abs(sweep) / (2 * k))
    return [c + rr * complex(math.cos(th1 + sweep * j / k), math.sin(th1 + sweep * j / k)) for j in range(k + 1)]


def _truncate_at_disc(path, centre, radius):
    """Cut the path where it first enters the disc D(centre, radius)."""
    for k in range(len(path) - 1):
        p, q = path[k], path[k + 1]
        if abs(q - centre) > radius:
            continue
        d = q - p
        dd = abs(d) ** 2
        b = np.real(np.conj(d) * (p - centre)) / dd
        cc = (abs(p - centre) ** 2 - radius * radius) / dd
        t = -b - math.sqrt(max(b * b - cc, 0.0))
        return path[: k + 1] + [p + max(t, 0.0) * d]
    return path


def _locate(s: PointSequence, p) -> int:
    p = complex(as_complex(p))
    hit = np.flatnonzero(s.z == p)
    if hit.size == 0:
        raise ValueError(f"{p} is not a point of the sequence")
    return int(hit[0])


def build_tube(
    s: PointSequence,
    a,
    b,
    width_param: float,
    delta: float,
    landing_radius: float = 0.0,
    chords_per_semicircle: int = 8,
    clearance: Optional[float] = None,
    geodesic: bool = False,
    bend: float = 0.0,
    centre_line: Optional[Sequence[complex]] = None,
) -> Tube:
    """Tube of width width_param * min(1-|a|, 1-|b|) from a toward b.

    The centre line avoids every disc D(c, clearance (1-|c|)), c in S minus
    {a, b} (clearance defaults to delta/2), inflated by the tube's
    half-width, by replacing each blocked
    stretch with the shorter arc around the obstacle.  With
    ``landing_radius > 0`` the curve stops where it first enters
    D(b, landing_radius), so tubes sharing the endpoint b stay apart.

    Raises TubeUnreachableError if the detoured curve is longer than
    (pi/2) |a - b|.
    """
    ia, ib = _locate(s, a), _locate(s, b)
    if ia == ib:
        raise ValueError("tube endpoints must differ")
    if not width_param > 0:
        raise ValueError(f"width_param must be positive, got {width_param}")
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    a, b = s[ia], s[ib]
    t = s.heights
    width = width_param * min(t[ia], t[ib])
    half = width / 2.0
    keep = np.ones(len(s), dtype=bool)
    keep[[ia, ib]] = False
    centres = s.z[keep]
    if clearance is None:
        clearance = delta / 2.0
    if clearance < 0:
        raise ValueError(f"clearance must be nonnegative, got {clearance}")
    # detours run tangent to the obstacle discs; the margin keeps rounding from crossing in
    radii = (clearance * t[keep] + half) * (1.0 + OBSTACLE_MARGIN)
    if centre_line is not None:
        path = list(centre_line)
        if path[0] != a or path[-1] != b:
            raise ValueError("centre line must run from a to b")
    elif geodesic:
        path = geodesic_vertices(a, b)
    else:
        path = arc_through(a, b, bend)
    budget = (math.pi / 2.0) * abs(a - b) + LENGTH_SLACK
    for _ in range(4 * len(s) + 16):
        hit = _first_hit(path, centres, radii)
        if hit is None:
            break
        k, (t1, t2, j) = hit
        p, q = path[k], path[k + 1]
        if t1 <= 0.0 or t2 >= 1.0:
            raise TubeUnreachableError(f"tube {ia}->{ib}: detour vertex lies inside the obstacle around {j}")
        e1, e2 = p + t1 * (q - p), p + t2 * (q - p)
        arc = _arc_vertices(centres[j], radii[j], e1, e2, chords_per_semicircle)
        path = path[: k + 1] + [e1] + arc + [e2] + path[k + 1 :]
        if np.abs(np.diff(path)).sum() > budget:
            break
    else:
        raise TubeUnreachableError(f"tube {ia}->{ib}: too many detours")
    if _first_hit(path, centres, radii) is not None or np.abs(np.diff(path)).sum() > budget:
        raise TubeUnreachableError(f"tube {ia}->{ib}: no obstacle-free curve within (pi/2)|a-b|")
    if landing_radius > 0:
        if landing_radius >= abs(a - b):
            raise ValueError("landing radius must be smaller than |a - b|")
        path = _truncate_at_disc(path, b, landing_radius)
    return Tube(np.asarray(path, dtype=complex), width, endpoints=(a, b))


def _boxes_meet(bi, bj) -> bool:
    return not (bi[1] < bj[0] or bj[1] < bi[0] or bi[3] < bj[2] or bj[3] < bi[2])


def tubes_meet(t1: Tube, t2: Tube) -> bool:
    if not _boxes_meet(t1.bbox(), t2.bbox()):
        return False
    return polyline_polyline_distance(t1.curve, t2.curve) < (t1.width + t2.width) / 2.0


DEFAULT_BENDS = tuple(np.pi * k / 16.0 * sgn for k in range(0, 16) for sgn in ((1,) if k == 0 else (1, -1)))
DEFAULT_BUMPS = (0.0, -0.5, 0.5, -1.0, 1.0, -2.0, 2.0)


def route_tubes(
    s: PointSequence,
    pairs: Sequence[tuple[int, int]],
    width_param: float,
    delta: float,
    landing_radii: Optional[Sequence[float]] = None,
    clearance: Optional[float] = None,
    bends: Sequence[float] = DEFAULT_BENDS,
    bumps: Sequence[float] = DEFAULT_BUMPS,
    max_rounds: int = 200,
    seed: int = 0,
    max_nodes: int = 20_000,
) -> list[Tube]:
    """Pairwise disjoint tubes, one per pair.

    Candidate centre lines for a pair are the circular arcs from a to b with
    the given bends, then the annular curves with the given bumps; those
    that avoid the other points, stay in the disc and fit the length budget
    are kept.  A min-conflicts search picks one candidate per pair,
    preferring earlier candidates; if it stalls, a backtracking search
    with forward checking over all candidates (at most ``max_nodes``
    assignments) decides.  Raises
    TubeUnreachableError when a pair has no candidate and TubeOverlapError
    when the search does not reach a conflict-free choice.
    """
    rng = np.random.default_rng(seed)
    n = len(pairs)
    landing_radii = [0.0] * n if landing_radii is None else list(landing_radii)
    order = [{"bend": bend} for bend in sorted(bends, key=abs)] + [{"bump": bump} for bump in bumps]
    cands: list[list[Tube]] = [[] for _ in range(n)]
    complete = [False] * n

    def grow(i, upto=None):
        """Build the candidates of pair i (all of them, or until `upto` exist)."""
        a, b = pairs[i]
        while not complete[i] and (upto is None or len(cands[i]) < upto):
            k = grow.next_bend[i]
            if k == len(order):
                complete[i] = True
                break
            grow.next_bend[i] += 1
            spec = order[k]
            if "bump" in spec:
                line = annular_curve(s[a], s[b], spec["bump"])
                if line is None:
                    continue
                spec = {"centre_line": line}
            try:
                tb = build_tube(s, s[a], s[b], width_param, delta, landing_radii[i], clearance=clearance, **spec)
            except TubeUnreachableError:
                continue
            if np.all(np.abs(tb.curve) + tb.width / 2.0 < 1.0):
                cands[i].append(tb)
        if not cands[i]:
            raise TubeUnreachableError(f"no admissible curve for the pair ({a}, {b})")

    grow.next_bend = [0] * n
    for i in range(n):
        grow(i, upto=1)
    cache: dict = {}

    def meet(i, k, j, l):
        key = (i, k, j, l) if i < j else (j, l, i, k)
        if key not in cache:
            cache[key] = tubes_meet(cands[i][k], cands[j][l])
        return cache[key]

    def conflicts(choice):
        return [i for i in range(n) if any(meet(i, choice[i], j, choice[j]) for j in range(n) if j != i)]

    choice = [0] * n
    for _ in range(max_rounds):
        conflicted = conflicts(choice)
        if not conflicted:
            return [cands[i][choice[i]] for i in range(n)]
        for i in conflicted:
            grow(i)
            scores = [sum(meet(i, k, j, choice[j]) for j in range(n) if j != i) for k in range(len(cands[i]))]
            best = min(scores)
            ties = [k for k, sc in enumerate(scores) if sc == best]
            # keep the smallest bend unless it is the current one and still conflicts
            choice[i] = ties[0] if best == 0 or ties[0] != choice[i] else int(rng.choice(ties))
    conflicted = conflicts(choice)
    if not conflicted:
        return [cands[i][choice[i]] for i in range(n)]
    # local search stalled: exhaustive search over all candidates
    for i in range(n):
        grow(i)
    found = _backtrack([len(c) for c in cands], meet, max_nodes)
    if found is not None:
        return [cands[i][found[i]] for i in range(n)]
    i = conflicted[0]
    j = next(j for j in range(n) if j != i and meet(i, choice[i], j, choice[j]))
    raise TubeOverlapError((i, j), f"no disjoint choice of curves for pairs {pairs[i]} and {pairs[j]}")


def _backtrack(sizes: list[int], meet: Callable, max_nodes: int) -> Optional[list[int]]:
    """Conflict-free choice of one candidate per pair, or None.

    Depth first over the pair with the fewest candidates left, pruning the
    candidates of the other pairs that meet the one just chosen.
    """
    n = len(sizes)
    domains = [list(range(k)) for k in sizes]
    choice: list[Optional[int]] = [None] * n
    nodes = 0

    def solve() -> bool:
        nonlocal nodes
        free = [i for i in range(n) if choice[i] is None]
        if not free:
            return True
        i = min(free, key=lambda j: (len(domains[j]), j))
        for k in list(domains[i]):
            nodes += 1
            if nodes > max_nodes:
                return False
            saved = {}
            ok = True
            for j in free:
                if j == i:
                    continue
                keep = [l for l in domains[j] if not meet(i, k, j, l)]
                if len(keep) < len(domains[j]):
                    saved[j] = domains[j]
                    domains[j] = keep
                if not keep:
                    ok = False
                    break
            choice[i] = k
            if ok and solve():
                return True
            choice[i] = None
            for j, dom in saved.items():
                domains[j] = dom
        return False

    return [int(c) for c in choice] if solve() else None


def tubes_disjoint(tubes: Sequence[Tube]) -> tuple[bool, Optional[tuple[int, int]]]:
    """True if no two tubes meet; otherwise (False, first offending index pair)."""
    boxes = [tb.bbox() for tb in tubes]
    for i in range(len(tubes)):
        for j in range(i + 1, len(tubes)):
            if not _boxes_meet(boxes[i], boxes[j]):
                continue
            gap = polyline_polyline_distance(tubes[i].curve, tubes[j].curve)
            if gap < (tubes[i].width + tubes[j].width) / 2.0:
                return False, (i, j)
    return True, None


def tube_area(tube: Tube, resolution: int = 400) -> float:
    """Area of the tube by counting cells of a uniform mesh over its bounding box."""
    x0, x1, y0, y1 = tube.bbox()
    side = max(x1 - x0, y1 - y0) / resolution
    xs = x0 + side * (np.arange(int(math.ceil((x1 - x0) / side))) + 0.5)
    ys = y0 + side * (np.arange(int(math.ceil((y1 - y0) / side))) + 0.5)
    grid = (xs[None, :] + 1j * ys[:, None]).ravel()
    inside = np.zeros(grid.size, dtype=bool)
    for chunk in range(0, grid.size, 20000):
        inside[chunk : chunk + 20000] = tube.contains(grid[chunk : chunk + 20000])
    return float(inside.sum() * side * side)


def tube_in_window(tube: Tube, w: CarlesonWindow) -> bool:
    """Whether the whole tube (centre line thickened by width/2) lies inside the window."""
    d = np.abs(1.0 - np.conj(w.zeta) * tube.curve)
    return bool(np.all(d + tube.width / 2.0 < w.height))


# -- border strips


@dataclass
class BorderStrip:
    anchor: complex
    segment: tuple[complex, complex]
    width: float
    side: str

    def contains(self, z) -> np.ndarray:
        s0, s1 = self.segment
        return point_segment_distance(z, np.array([s0]), np.array([s1]))[:, 0] < self.width / 2.0


def border_strip(a, w: CarlesonWindow, side: str, r: float) -> BorderStrip:
    """Strip of width r (1-|a|) around [a, c], c the projection of a on a side of W.

    Sides are those of the rectangle bounding W in half-plane coordinates;
    the projection is orthogonal there and c is mapped back to the disc.
    """
    a = complex(as_complex(a))
    if side not in SIDES:
        raise ValueError(f"side must be one of {SIDES}, got {side!r}")
    if not r > 0:
        raise ValueError(f"r must be positive, got {r}")
    if not w.contains(a):
        raise ValueError(f"{a} is not inside the window")
    x, y = cayley_to_halfplane(a, w.direction)
    half, top = w.halfplane_box()
    cx, cy = {"left": (-half, y), "right": (half, y), "top": (x, top)}[side]
    c = complex(halfplane_to_disc(cx, cy, w.direction))
    return BorderStrip(a, (a, c), r * (1.0 - abs(a)), side)


def side_toward(a, b, w: CarlesonWindow) -> str:
    """Side of W's half-plane box crossed by the ray from a toward b."""
    xa, ya = cayley_to_halfplane(a, w.direction)
    xb, yb = cayley_to_halfplane(b, w.direction)
    half, top = w.halfplane_box()
    dx, dy = xb - xa, yb - ya
    exits = {}
    if dx < 0:
        exits["left"] = (-half - xa) / dx
    if dx > 0:
        exits["right"] = (half - xa) / dx
    if dy > 0:
        exits["top"] = (top - ya) / dy
    if not exits:
        return "top"
    return min(exits, key=lambda k: (exits[k], SIDES.index(k)))


def count_points_in_strip(s: PointSequence, part, strip: BorderStrip) -> int:
    idx = np.asarray(sorted(part), dtype=int)
    if idx.size == 0:
        return 0
    return int(np.count_nonzero(strip.contains(s.z[idx])))


# -- scalar fields and gradient integrals


@dataclass
class ScalarFieldSamples:
    """A [0, 1]-valued field on the disc with scale-aware central-difference gradients.

    The finite-difference step at z is ``gradient_step * (1 - |z|)``.
    """

    evaluator: Callable[[np.ndarray], np.ndarray]
    gradient_step: float = 1e-4

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(as_complex(z), dtype=complex)
        v = np.asarray(self.evaluator(z), dtype=float)
        if not np.all(np.isfinite(v)):
            raise NonFiniteError("scalar field returned a non-finite value")
        if np.any(v < -1e-12) or np.any(v > 1 + 1e-12):
            raise NonFiniteError(f"scalar field left [0, 1]: range [{v.min():.3g}, {v.max():.3g}]")
        return np.clip(v, 0.0, 1.0)

    def gradient(self, z) -> tuple[np.ndarray, np.ndarray]:
        z = np.asarray(as_complex(z), dtype=complex)
        h = self.gradient_step * (1.0 - np.abs(z))
        gx = (self(z + h) - self(z - h)) / (2 * h)
        gy = (self(z + 1j * h) - self(z - 1j * h)) / (2 * h)
        if not (np.all(np.isfinite(gx)) and np.all(np.isfinite(gy))):
            raise NonFiniteError("gradient estimate is not finite")
        return gx, gy

    def gradient_norm(self, z) -> np.ndarray:
        gx, gy = self.gradient(z)
        return np.hypot(gx, gy)


def surrogate_psi(f_abs: Callable, low: float, high: float, gradient_step: float = 1e-4) -> ScalarFieldSamples:
    """psi = clamp((|f| - low) / (high - low), 0, 1): 0 where |f| <= low, 1 where |f| >= high."""
    if not 0.0 <= low < high:
        raise ValueError(f"need 0 <= low < high, got {low}, {high}")

    def evaluate(z):
        return np.clip((f_abs(z) - low) / (high - low), 0.0, 1.0)

    return ScalarFieldSamples(evaluate, gradient_step)


def offset_polyline(vertices: np.ndarray, offset: float) -> np.ndarray:
    """Parallel polyline at signed distance `offset` (mitred joints)."""
    if offset == 0.0 or vertices.size < 2:
        return vertices.copy()
    d = np.diff(vertices)
    n_seg = 1j * d / np.abs(d)
    normals = np.empty(vertices.size, dtype=complex)
    normals[0], normals[-1] = n_seg[0], n_seg[-1]
    mid = n_seg[:-1] + n_seg[1:]
    cos_half = np.abs(mid) / 2.0
    normals[1:-1] = np.where(cos_half > 1e-3, mid / np.abs(mid) / np.maximum(cos_half, 1e-3), n_seg[1:])
    return vertices + offset * normals


def line_integral(psi: ScalarFieldSamples, vertices: np.ndarray, refine: int = 1, rel_step: float = 1.0 / 256.0) -> float:
    """Integral of |grad psi| along a polyline.

    Each edge is cut into pieces no longer than ``rel_step`` times the local
    distance to the circle, times ``refine`` more; 4-point Gauss-Legendre on
    every piece.
    """
    total = 0.0
    k = max(1, int(refine))
    for p, q in zip(vertices[:-1], vertices[1:]):
        length = abs(q - p)
        if length == 0.0:
            continue
        scale = max(min(1.0 - abs(p), 1.0 - abs(q)), 1e-15)
        n = k * max(1, int(math.ceil(length / (rel_step * scale))))
        frac = (np.arange(n)[:, None] + (_GL_NODES[None, :] + 1.0) / 2.0) / n
        g = psi.gradient_norm((p + (q - p) * frac).ravel())
        total += float(length * np.sum(np.tile(_GL_WEIGHTS / 2.0 / n, n) * g))
    return total


def gradient_crossing_integral(
    psi: ScalarFieldSamples, tube: Tube, transverse_samples: int, refine: int = 1
) -> float:
    """Average over transverse offsets of the integral of |grad psi| along the tube.

    Offsets are the midpoints of `transverse_samples` equal slices of the
    width; ``refine`` subdivides every edge of the curve.
    """
    if transverse_samples < 1:
        raise ValueError("transverse_samples must be at least 1")
    n = int(transverse_samples)
    offsets = ((np.arange(n) + 0.5) / n - 0.5) * tube.width
    vals = [line_integral(psi, offset_polyline(tube.curve, u), refine) for u in offsets]
    total = float(np.mean(vals))
    if not math.isfinite(total):
        raise NonFiniteError("crossing integral is not finite")
    return total


@dataclass
class StabilityRadius:
    r_small: float
    r_large: float

    @property
    def r(self) -> float:
        return min(self.r_small, self.r_large)


def stability_radius(
    f_abs: Callable,
    small_points,
    small_level: float,
    large_points,
    large_level: float,
    zeros=(),
    r_max: float = 0.9,
    samples: int = 64,
    iterations: int = 40,
) -> StabilityRadius:
    """Largest r with |f| < small_level on D(a, r(1-|a|)) and |f| > large_level on D(b, r(1-|b|)).

    Found by bisection on sampled circles; the maximum principle (and, for
    the lower bound, the absence of zeros in the disc) makes the circle
    values decide the whole disc.
    """
    circle = np.exp(2j * math.pi * np.arange(samples) / samples)
    zeros = np.asarray(as_complex(list(zeros)), dtype=complex).ravel()
    small = np.asarray(as_complex(list(small_points)), dtype=complex).ravel()
    large = np.asarray(as_complex(list(large_points)), dtype=complex).ravel()

    def small_ok(r):
        if small.size == 0:
            return True
        pts = small[:, None] + r * (1 - np.abs(small))[:, None] * circle[None, :]
        return bool(np.all(f_abs(pts.ravel()) < small_level)) and bool(np.all(f_abs(small) < small_level))

    def large_ok(r):
        if large.size == 0:
            return True
        rad = r * (1 - np.abs(large))
        if zeros.size and np.any(np.abs(large[:, None] - zeros[None, :]) <= rad[:, None]):
            return False
        pts = large[:, None] + rad[:, None] * circle[None, :]
        return bool(np.all(f_abs(pts.ravel()) > large_level)) and bool(np.all(f_abs(large) > large_level))

    def bisect(ok):
        if ok(r_max):
            return r_max
        lo, hi = 0.0, r_max
        for _ in range(iterations):
            mid = (lo + hi) / 2.0
            if ok(mid):
                lo = mid
            else:
                hi = mid
        return lo

    return StabilityRadius(bisect(small_ok), bisect(large_ok))


# -- gradient mass of a window


def _cell_distance(centres, half, target: complex) -> np.ndarray:
    """Distance from each square cell to a target point."""
    nx = np.clip(target.real - centres.real, -half, half)
    ny = np.clip(target.imag - centres.imag, -half, half)
    return np.abs(centres + nx + 1j * ny - target)


def window_gradient_mass(
    psi: ScalarFieldSamples,
    w: CarlesonWindow | tuple[float, float],
    zeros=(),
    rel_size: float = 1.0 / 16.0,
    min_cell: Optional[float] = None,
    max_depth: int = 40,
    max_cells: int = 4_000_000,
) -> float:
    """Integral of |grad psi| dm over {|1 - conj(zeta) z| < H} inside the disc.

    Adaptive quadtree in coordinates rotated so that zeta = 1.  A cell is
    split while psi varies on it (or it holds a zero of the underlying
    function) and it is larger than both ``rel_size * (1 - |centre|)`` and
    ``min_cell``.  Leaves use a 2x2 Gauss rule masked to the region.
    ``w`` may be a CarlesonWindow or an (angle, height) pair, so heights
    beyond 1 are allowed for enlarged windows.
    """
    if isinstance(w, CarlesonWindow):
        angle, height = w.direction.angle, w.height
    else:
        angle, height = w
    zeta = complex(math.cos(angle), math.sin(angle))
    zw = np.conj(zeta) * np.asarray(as_complex(list(zeros)), dtype=complex).ravel()
    if min_cell is None:
        min_cell = height * 1e-3
    g = 0.5 / math.sqrt(3.0)

    def in_region(wp):
        return (np.abs(1.0 - wp) < height) & (np.abs(wp) < 1.0)

    if height <= 1.0:
        size0 = height
        cells = np.array([1.0 - height / 2.0 - 1j * height / 2.0, 1.0 - height / 2.0 + 1j * height / 2.0])
    else:
        size0 = 0.5
        ticks = -0.75 + 0.5 * np.arange(4)
        cells = (ticks[None, :] + 1j * ticks[:, None]).ravel()
    sizes = np.full(cells.size, size0)
    offs3 = np.array([-0.5, 0.0, 0.5])
    sample_offsets = (offs3[None, :] + 1j * offs3[:, None]).ravel()
    gauss_offsets = np.array([-g - 1j * g, g - 1j * g, -g + 1j * g, g + 1j * g])
    total = 0.0
    depth = 0
    while cells.size:
        # drop cells that miss the region entirely
        half = sizes / 2.0
        d1 = _cell_distance(cells, half, 1.0)
        d0 = _cell_distance(cells, half, 0.0)
        alive = (d1 < height) & (d0 < 1.0)
        cells, sizes = cells[alive], sizes[alive]
        if not cells.size:
            break
        pts = cells[:, None] + sizes[:, None] * sample_offsets[None, :]
        ok = np.abs(pts) < 1.0
        vals = np.full(pts.shape, np.nan)
        vals[ok] = psi(zeta * pts[ok])
        vmax = np.nanmax(np.where(ok, vals, -np.inf), axis=1)
        vmin = np.nanmin(np.where(ok, vals, np.inf), axis=1)
        varies = vmax - vmin > 1e-12
        if zw.size:
            # zeros within one cell width of the cell
            holds = np.any(
                (np.abs(zw[None, :].real - cells[:, None].real) <= sizes[:, None])
                & (np.abs(zw[None, :].imag - cells[:, None].imag) <= sizes[:, None]),
                axis=1,
            )
            varies |= holds
        scale = np.maximum(rel_size * (1.0 - np.abs(cells)), min_cell)
        split = varies & (sizes > scale) & (depth < max_depth)
        leaf = varies & ~split
        if np.any(leaf):
            gp = (cells[leaf][:, None] + sizes[leaf][:, None] * gauss_offsets[None, :]).ravel()
            mask = in_region(gp)
            grad = np.zeros(gp.size)
            if np.any(mask):
                grad[mask] = psi.gradient_norm(zeta * gp[mask])
            area = np.repeat(sizes[leaf] ** 2 / 4.0, 4)
            total += float(np.sum(grad * area))
        if 4 * int(np.count_nonzero(split)) > max_cells:
            raise CapacityError(f"quadtree would exceed {max_cells} cells at depth {depth + 1}")
        c, sz = cells[split], sizes[split] / 2.0
        quarter = sz / 2.0
        cells = np.concatenate(
            [c - quarter - 1j * quarter, c + quarter - 1j * quarter, c - quarter + 1j * quarter, c + quarter + 1j * quarter]
        )
        sizes = np.concatenate([sz, sz, sz, sz])
        depth += 1
    return total


# -- mass bounds


def e_w_mass(s: PointSequence, e_w) -> float:
    idx = np.asarray(sorted(e_w), dtype=int)
    return float(s.heights[idx].sum()) if idx.size else 0.0


def f_w_mass_bound(
    s: PointSequence,
    f_w,
    tubes: Sequence[Tube],
    psi: ScalarFieldSamples,
    w_prime: CarlesonWindow | tuple[float, float],
    zeros=(),
    **mesh,
) -> tuple[float, float]:
    """(sum over F_W of 1-|a|,  pi/(4 s) * integral of |grad psi| over W').

    ``s`` is the smallest ratio width / (2 (1-|a|)) over the tubes, so that
    each tube's width is at least 2 s (1-|a|).  The tubes must be pairwise
    disjoint (TubeOverlapError otherwise) and lie inside W'.
    """
    f_w = sorted(f_w)
    if not f_w:
        return 0.0, 0.0
    if len(tubes) != len(f_w):
        raise ValueError(f"{len(tubes)} tubes for {len(f_w)} points of F_W")
    ok, pair = tubes_disjoint(tubes)
    if not ok:
        raise TubeOverlapError(pair)
    if isinstance(w_prime, CarlesonWindow):
        angle, height = w_prime.direction.angle, w_prime.height
    else:
        angle, height = w_prime
    zeta = complex(math.cos(angle), math.sin(angle))
    for k, tb in enumerate(tubes):
        if np.any(np.abs(1.0 - np.conj(zeta) * tb.curve) + tb.width / 2.0 >= height):
            raise ValueError(f"tube {k} is not contained in the enlarged window")
    t = s.heights
    lhs = float(t[f_w].sum())
    s_param = min(tb.width / (2.0 * (1.0 - abs(tb.curve[0]))) for tb in tubes)
    integral = window_gradient_mass(psi, (angle, height), zeros=zeros, **mesh)
    return lhs, math.pi / (4.0 * s_param) * integral
