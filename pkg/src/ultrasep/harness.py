"""Sequence generators and the end-to-end experiment pipeline.

Pipeline: separation, Carleson norm and condition (C); a partition; the
Blaschke product B_A of the A part as the separating function; a window
sweep that checks the E_W bound and the F_W tube/gradient bound; and a
clause-by-clause verdict.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .disc import CarlesonWindow
from .errors import CapacityError, PipelineError, TubeOverlapError, TubeUnreachableError
from .partitions import (
    Partition,
    PartitionKind,
    build_partition,
    classify_window_points,
    verify_partition,
)
from .sequences import (
    PointSequence,
    blaschke_modulus,
    carleson_bound_from_annuli,
    carleson_condition_inf,
    carleson_norm,
    is_delta_separated,
    is_interpolating,
    points_per_annulus,
    separation_constant,
    separation_delta,
)
from .tubes import (
    Tube,
    route_tubes,
    e_w_mass,
    f_w_mass_bound,
    gradient_crossing_integral,
    side_toward,
    stability_radius,
    surrogate_psi,
    tube_in_window,
    tubes_disjoint,
)

log = logging.getLogger(__name__)

DEFAULT_TOLERANCES = {
    "carleson_max": 16.0,  # Carleson clause: norm_estimate <= this
    "interpolation_threshold": 1e-3,  # condition (C) value counted as interpolating
    "e_w_slack": 0.05,
    "f_w_slack": 0.05,
    "eta_floor": 1e-12,  # below this the F_W cutoff cannot be resolved numerically
    "ultra_eta_min": 1e-3,  # smallest eta accepted as ultra-separation evidence
}
GAMMA_SENSITIVITY = (0.3, 0.5, 0.7)


# -- generators


def gen_radial(ratio: float, count: int) -> PointSequence:
    """Points 1 - ratio**k, k = 1..count, on the positive axis."""
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"ratio must lie in (0, 1), got {ratio}")
    if count < 1:
        raise ValueError(f"count must be at least 1, got {count}")
    return PointSequence([1.0 - ratio**k for k in range(1, count + 1)])


def gen_random_separated(
    count: int, delta: float, seed: int, max_modulus: float = 0.99, max_tries: int = 200_000
) -> PointSequence:
    """Rejection sampler, uniform in hyperbolic area on {|z| <= max_modulus}, keeping delta-separation."""
    if not 0.0 < delta < 1.0:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if count < 1:
        raise ValueError(f"count must be at least 1, got {count}")
    rng = np.random.default_rng(seed)
    # hyperbolic polar radius rho has density sinh(rho) on [0, R]; |z| = tanh(rho / 2)
    big_r = 2.0 * math.atanh(max_modulus)
    pts = np.empty(count, dtype=complex)
    heights = np.empty(count)
    n = 0
    tries = 0
    while n < count:
        if tries >= max_tries:
            raise CapacityError(f"placed {n} of {count} points with delta={delta} after {tries} draws")
        tries += 1
        u, theta = rng.random(), 2.0 * math.pi * rng.random()
        rho = math.acosh(1.0 + u * (math.cosh(big_r) - 1.0))
        z = math.tanh(rho / 2.0) * complex(math.cos(theta), math.sin(theta))
        t = 1.0 - abs(z)
        if n and np.any(np.abs(pts[:n] - z) <= delta * (heights[:n] + t)):
            continue
        pts[n], heights[n] = z, t
        n += 1
    return PointSequence(pts)


def gen_non_carleson(count: int) -> PointSequence:
    """count points on the positive radius at 1 - 1/k, k = 2..count+1."""
    if count < 2:
        raise ValueError(f"count must be at least 2, got {count}")
    return PointSequence([1.0 - 1.0 / k for k in range(2, count + 2)])


# -- configuration and report


@dataclass
class ExperimentConfig:
    gamma: float = 0.5
    delta_hint: Optional[float] = None  # None: derived from the sequence
    kappa: float = 2.0
    eta: Optional[float] = None  # None: inf over B of |f|
    tau: Optional[float] = None  # None: sup over A of |f|
    partition_kind: str = "restricted"
    sweep_levels: int = 12  # heights 2**-j, j = 1..sweep_levels
    check_f_w: bool = True
    transverse_samples: int = 3
    seed: int = 0
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        if not self.kappa > 1.0:
            raise ValueError(f"kappa must exceed 1, got {self.kappa}")
        PartitionKind(self.partition_kind)
        if self.delta_hint is not None and not 0.0 < self.delta_hint < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta_hint}")
        if self.eta is not None and not 0.0 < self.eta < 0.5:
            raise ValueError(f"eta must lie in (0, 1/2), got {self.eta}")
        if self.eta is not None and self.tau is not None and not self.tau < self.eta**self.kappa:
            raise ValueError("need tau < eta**kappa")
        self.tolerances = {**DEFAULT_TOLERANCES, **self.tolerances}


@dataclass
class Clause:
    name: str
    passed: Optional[bool]  # None: skipped
    lhs: Optional[float] = None
    rhs: Optional[float] = None
    tolerance: Optional[float] = None
    detail: str = ""


@dataclass
class WindowResult:
    angle: float
    height: float
    e_w: list
    f_w: list
    e_w_mass: float
    e_w_bound: float
    e_w_top_mass: float
    e_w_pass: bool
    f_w_lhs: Optional[float] = None
    f_w_rhs: Optional[float] = None
    f_w_pass: Optional[bool] = None
    f_w_detail: str = ""


@dataclass
class ExperimentReport:
    n_points: int
    config: dict
    separation: dict
    carleson: dict
    condition_c: float
    interpolating: bool
    points_per_annulus: dict
    partition: dict
    partition_violations: list
    function: dict
    windows: list
    tubes: list
    clauses: list
    verdict: bool

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True, default=_jsonable)

    def failed_clauses(self) -> list[str]:
        return [c.name for c in self.clauses if c.passed is False]

    def windows_csv(self) -> str:
        return windows_csv(self.windows)


def _jsonable(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, PartitionKind):
        return o.value
    raise TypeError(f"cannot serialise {type(o).__name__}")


# -- pipeline pieces


@dataclass
class SeparatingFunction:
    """|f| = |B_A|**power with its levels and stability radius."""

    zeros: np.ndarray
    power: int
    tau: float
    eta_hat: float
    eta: float  # eta_hat ** power
    psi_high: float
    psi_low: float
    tau_prime: float
    r_small: float
    r_large: float

    def modulus(self, z):
        return blaschke_modulus(self.zeros, z) ** self.power

    @property
    def r(self) -> float:
        return min(self.r_small, self.r_large)


def check_corollary(s: PointSequence, cfg: ExperimentConfig, partition: Optional[Partition] = None):
    """(inf over B of |B_A(b)|, condition-(C) verdict), with inf over empty B = 1."""
    p = partition or build_partition(s, cfg.partition_kind, cfg.gamma)
    zeros = s.z[list(p.part_a)]
    if p.part_b:
        eta_hat = float(np.min(blaschke_modulus(zeros, s.z[list(p.part_b)])))
    else:
        eta_hat = 1.0
    return eta_hat, is_interpolating(s, cfg.tolerances["interpolation_threshold"])


def separating_function(s: PointSequence, p: Partition, cfg: ExperimentConfig, delta: float) -> SeparatingFunction:
    zeros = s.z[list(p.part_a)]
    a_pts, b_pts = s.z[list(p.part_a)], s.z[list(p.part_b)]
    eta_hat = float(np.min(blaschke_modulus(zeros, b_pts))) if b_pts.size else 1.0
    power = 1
    if b_pts.size and eta_hat >= 0.5:
        # a power of f brings the lower level below 1/2
        power = max(1, int(math.floor(math.log(0.5) / math.log(eta_hat))) + 1) if eta_hat < 1.0 else 1
        while eta_hat**power >= 0.5:
            power += 1
    eta = cfg.eta if cfg.eta is not None else eta_hat**power
    tau = cfg.tau if cfg.tau is not None else (float(np.max(blaschke_modulus(zeros, a_pts))) ** power if a_pts.size else 0.0)
    kappa = cfg.kappa
    # the cutoff is 1 above eta' and 0 below eta'**kappa, so the stability discs of B
    # (|f| > eta') and of A (|f| < tau') sit inside its flat regions
    psi_high = (eta + eta**kappa) / 2.0
    psi_low = psi_high**kappa
    tau_prime = (tau + psi_low) / 2.0
    fmod = lambda z: blaschke_modulus(zeros, z) ** power  # noqa: E731
    if b_pts.size and eta > 0 and psi_low > tau:
        rad = stability_radius(fmod, a_pts, tau_prime, b_pts, psi_high, zeros=zeros, r_max=min(delta, 0.9))
        r_small, r_large = rad.r_small, rad.r_large
    else:
        r_small = r_large = min(delta, 0.9)
    return SeparatingFunction(zeros, power, tau, eta_hat, eta, psi_high, psi_low, tau_prime, r_small, r_large)


def working_delta(s: PointSequence, cfg: ExperimentConfig) -> float:
    """The configured delta, or just under the sequence's own separation (capped at 1/2)."""
    if cfg.delta_hint is not None:
        return cfg.delta_hint
    return min(0.99 * separation_delta(s), 0.5)


def sweep_windows(s: PointSequence, levels: int = 12) -> list[CarlesonWindow]:
    """Heights 2**-j (j = 1..levels) at the direction of every nonzero point."""
    angles = np.unique(s.arguments[s.z != 0])
    return [CarlesonWindow.at(float(a), 2.0**-j) for a in angles for j in range(1, levels + 1)]


def e_w_bound_constant(m: int, gamma: float, r: float) -> float:
    """C_E = m / (gamma (1 - gamma)) + 1 / (r gamma)."""
    return carleson_bound_from_annuli(m, gamma) + 1.0 / (r * gamma)


def e_w_sweep(s: PointSequence, p: Partition, windows, m: int, gamma: float, r: float, slack: float):
    """Per-window (e_w_mass, bound, top-side mass, pass) for the E_W estimate."""
    c_e = e_w_bound_constant(m, gamma, r)
    out = []
    for w in windows:
        cls = classify_window_points(s, p, w)
        mass = e_w_mass(s, cls.e_w)
        top = sum(
            s.heights[a]
            for a in cls.e_w
            if a in p.phi and p.phi[a] != a and side_toward(s[a], s[p.phi[a]], w) == "top"
        )
        bound = c_e * w.height
        out.append((w, cls, mass, bound, float(top), mass <= bound * (1.0 + slack)))
    return out


def build_pair_tubes(
    s: PointSequence, p: Partition, delta: float, r: float, r_large: Optional[float] = None
) -> dict[int, Tube]:
    """Disjoint tubes for the pairs (a, phi(a)), width min(delta, r)/2 * min(1-|a|, 1-|b|).

    Centre lines are circular arcs from a to b (length at most (pi/2)|a-b|)
    chosen jointly so the tubes miss each other.  Restricted and good pairs
    only have to miss the other points; Hoffman pairs keep off the discs
    D(c, delta/2 (1-|c|)).  Each tube stops on the circle of radius
    (2/3) r_large (1-|b|) around b, inside the disc where the cutoff is 1.
    """
    pairs = p.pairs()
    landing = (2.0 / 3.0) * (r if r_large is None else max(r, r_large))
    clearance = delta / 2.0 if p.kind is PartitionKind.HOFFMAN else 0.0
    tubes = route_tubes(
        s,
        pairs,
        min(delta, r) / 2.0,
        delta,
        landing_radii=[landing * s.heights[b] for _, b in pairs],
        clearance=clearance,
    )
    return {a: tb for (a, _), tb in zip(pairs, tubes)}


# -- the pipeline


def run_experiment(s: PointSequence, cfg: Optional[ExperimentConfig] = None) -> ExperimentReport:
    cfg = cfg or ExperimentConfig()
    tol = cfg.tolerances
    clauses: list[Clause] = []

    stage = "metrics"
    try:
        sep = separation_constant(s)
        carl = carleson_norm(s)
        cond_c = carleson_condition_inf(s)
        interpolating = cond_c >= tol["interpolation_threshold"]
        delta = working_delta(s, cfg)
        ppa = {str(g): points_per_annulus(s, g)[1] for g in GAMMA_SENSITIVITY}
        hist, m = points_per_annulus(s, cfg.gamma)

        stage = "partition"
        p = build_partition(s, cfg.partition_kind, cfg.gamma)
        violations = verify_partition(s, p)

        stage = "function"
        f = separating_function(s, p, cfg, delta)
    except Exception as exc:  # noqa: BLE001
        raise PipelineError(stage, exc) from exc

    separated = sep.delta_p > 0 and (len(s) == 1 or is_delta_separated(s, delta))
    clauses.append(Clause("separation", separated, sep.delta_p, 0.0, 0.0, f"delta_P > 0 and delta-separated, delta = {delta:.6g}"))
    carleson_ok = carl.norm_estimate <= tol["carleson_max"]
    witness = carl.witness_window
    clauses.append(
        Clause(
            "carleson",
            carleson_ok,
            carl.norm_estimate,
            tol["carleson_max"],
            0.0,
            "no admissible window" if witness is None else f"witness angle={witness.direction.angle!r} h={witness.height!r}",
        )
    )
    clauses.append(Clause("partition", not violations, float(len(violations)), 0.0, 0.0, f"{p.kind.value} partition violations"))
    # every finite sequence is ultra-separated by B_A with some eta > 0; only an
    # eta above the floor counts as evidence
    eta_ok = len(p.part_b) == 0 or f.eta >= tol["ultra_eta_min"]
    ultra = eta_ok and (f.tau == 0 or cfg.kappa * math.log(f.eta) > math.log(f.tau))
    clauses.append(
        Clause(
            "ultra_separation",
            ultra,
            f.tau,
            f.eta**cfg.kappa,
            0.0,
            f"tau < eta^kappa with power {f.power}; eta = {f.eta:.6g}, floor {tol['ultra_eta_min']:g}",
        )
    )
    clauses.append(
        Clause(
            "condition_c",
            interpolating,
            cond_c,
            tol["interpolation_threshold"],
            0.0,
            "interpolating" if interpolating else "not interpolating",
        )
    )
    premise = ultra and separated
    conclusion = carleson_ok and cond_c > 0
    clauses.append(
        Clause(
            "implication",
            not premise or conclusion,
            float(premise),
            float(conclusion),
            0.0,
            "premise (ultra-separated and separated) <= conclusion (Carleson and condition (C) > 0)",
        )
    )

    results, window_clauses, tube_diag = _window_stage(s, p, f, cfg, delta, m)
    clauses.extend(window_clauses)

    verdict = all(c.passed is not False for c in clauses)
    return ExperimentReport(
        n_points=len(s),
        config=asdict(cfg),
        separation={"delta_p": sep.delta_p, "eta": sep.eta, "witness_pair": sep.witness_pair, "delta": delta},
        carleson={
            "norm_estimate": carl.norm_estimate,
            "candidate_count": carl.candidate_count,
            "witness_angle": None if witness is None else witness.direction.angle,
            "witness_height": None if witness is None else witness.height,
            "annulus_bound": carleson_bound_from_annuli(m, cfg.gamma),
        },
        condition_c=cond_c,
        interpolating=interpolating,
        points_per_annulus={"gamma": cfg.gamma, "histogram": {str(k): v for k, v in hist.items()}, "m": m, "sensitivity": ppa},
        partition=p.to_dict(),
        partition_violations=[asdict(v) for v in violations],
        function={
            "power": f.power,
            "eta_hat": f.eta_hat,
            "eta": f.eta,
            "tau": f.tau,
            "psi_low": f.psi_low,
            "psi_high": f.psi_high,
            "tau_prime": f.tau_prime,
            "r_small": f.r_small,
            "r_large": f.r_large,
        },
        windows=results,
        tubes=tube_diag,
        clauses=clauses,
        verdict=verdict,
    )


def _window_stage(s, p, f: SeparatingFunction, cfg, delta, m):
    """Window sweep with the E_W and F_W checks: (rows, [e_w clause, f_w clause], tube diagnostics)."""
    tol = cfg.tolerances
    windows = sweep_windows(s, cfg.sweep_levels)
    r = f.r if f.r > 0 else min(delta, 0.9)
    try:
        e_rows = e_w_sweep(s, p, windows, m, cfg.gamma, r, tol["e_w_slack"])
    except Exception as exc:  # noqa: BLE001
        raise PipelineError("windows", exc) from exc
    results = [
        WindowResult(w.direction.angle, w.height, list(cls.e_w), list(cls.f_w), mass, bound, top, ok)
        for (w, cls, mass, bound, top, ok) in e_rows
    ]
    e_fail = [k for k, row in enumerate(results) if not row.e_w_pass]
    e_clause = Clause(
        "e_w_bound",
        not e_fail,
        max((row.e_w_mass / row.height for row in results), default=0.0),
        e_w_bound_constant(m, cfg.gamma, r),
        tol["e_w_slack"],
        f"{len(e_fail)} of {len(results)} windows fail",
    )
    tube_diag: list[dict] = []
    try:
        f_clause = _f_w_checks(s, p, f, cfg, delta, results, windows, tube_diag)
    except PipelineError:
        raise
    except Exception as exc:  # noqa: BLE001
        raise PipelineError("tubes", exc) from exc
    return results, [e_clause, f_clause], tube_diag


def window_sweep(s: PointSequence, cfg: Optional[ExperimentConfig] = None) -> tuple[list[WindowResult], list[Clause]]:
    """Only the window stage of the pipeline: per-window rows and the E_W / F_W clauses."""
    cfg = cfg or ExperimentConfig()
    try:
        delta = working_delta(s, cfg)
        _, m = points_per_annulus(s, cfg.gamma)
        p = build_partition(s, cfg.partition_kind, cfg.gamma)
        f = separating_function(s, p, cfg, delta)
    except Exception as exc:  # noqa: BLE001
        raise PipelineError("partition", exc) from exc
    rows, clauses, _ = _window_stage(s, p, f, cfg, delta, m)
    return rows, clauses


def windows_csv(rows: list[WindowResult]) -> str:
    """CSV with one line per window: angle, h, E_W mass and bound, F_W mass and bound, passes."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["angle", "h", "e_w_mass", "e_w_bound", "e_w_pass", "f_w_mass", "f_w_bound", "f_w_pass"])
    for w in rows:
        writer.writerow(
            [
                repr(w.angle),
                repr(w.height),
                repr(w.e_w_mass),
                repr(w.e_w_bound),
                int(w.e_w_pass),
                "" if w.f_w_lhs is None else repr(w.f_w_lhs),
                "" if w.f_w_rhs is None else repr(w.f_w_rhs),
                "" if w.f_w_pass is None else int(w.f_w_pass),
            ]
        )
    return buf.getvalue()


def _f_w_checks(s, p, f: SeparatingFunction, cfg, delta, results, windows, tube_diag) -> Clause:
    tol = cfg.tolerances
    if not cfg.check_f_w:
        return Clause("f_w_bound", None, detail="skipped: disabled in the configuration")
    if not p.pairs():
        return Clause("f_w_bound", True, 0.0, 1.0, tol["f_w_slack"], "no pairs (a, phi(a))")
    if f.eta < tol["eta_floor"]:
        return Clause("f_w_bound", None, detail=f"skipped: eta = {f.eta:.3e} below the numerical floor")
    try:
        tubes = build_pair_tubes(s, p, delta, f.r, f.r_large)
    except (TubeUnreachableError, TubeOverlapError) as exc:
        return Clause("f_w_bound", False, math.inf, 1.0, tol["f_w_slack"], f"tube construction failed: {exc}")
    psi = surrogate_psi(f.modulus, f.psi_low, f.psi_high)
    crossings = {}
    for a, tb in sorted(tubes.items()):
        crossings[a] = gradient_crossing_integral(psi, tb, cfg.transverse_samples, refine=2)
        tube_diag.append({"a": a, "b": p.phi[a], "length": tb.length, "crossing": crossings[a], **tb.to_dict()})
    all_ok, pair = tubes_disjoint(list(tubes.values()))
    failures, checked = 0, 0
    for row, w in zip(results, windows):
        if not row.f_w:
            continue
        big = math.pi * w.height / 2.0
        if big >= 1.0:
            row.f_w_detail = "skipped: enlarged window height >= 1"
            continue
        w_prime = CarlesonWindow(w.direction, big)
        tbs = [tubes[a] for a in row.f_w]
        if not all(tube_in_window(tb, w_prime) for tb in tbs):
            row.f_w_detail = "skipped: a tube leaves the enlarged window"
            continue
        checked += 1
        try:
            lhs, rhs = f_w_mass_bound(s, row.f_w, tbs, psi, w_prime, zeros=f.zeros)
        except TubeOverlapError as exc:
            row.f_w_pass, row.f_w_detail = False, str(exc)
            failures += 1
            continue
        row.f_w_lhs, row.f_w_rhs = lhs, rhs
        row.f_w_pass = lhs <= rhs * (1.0 + tol["f_w_slack"])
        failures += not row.f_w_pass
    min_cross = min(crossings.values()) if crossings else None
    ratios = [row.f_w_lhs / row.f_w_rhs for row in results if row.f_w_lhs is not None and row.f_w_rhs > 0]
    detail = f"{checked} windows checked, {failures} fail; tubes disjoint: {all_ok}; min crossing: {min_cross}"
    return Clause(
        "f_w_bound", failures == 0 and all_ok, max(ratios, default=0.0), 1.0, tol["f_w_slack"], detail
    )
