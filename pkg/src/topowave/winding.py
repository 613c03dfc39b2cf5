"""Contours C_eps near the bottom of the upper band and windings of S along them.

C_eps is the circle of centre (0, 1/(2 eps) + eps) and radius 1/(2 eps) in the
(kx, kappa) plane. We parametrize it by theta in [0, 2 pi):

    kx = R sin(theta),  kappa = R + eps - R cos(theta),  lambda_x = eps cot(theta / 2),

so increasing theta is the reverse-lambda_x orientation, starting at (0+, eps).
The arc |lambda_x| <= lambda0 (theta in [theta0, 2 pi - theta0]) runs over
large |k| and is called ``outer``; the finite-kx remainder through the bottom
of the circle is ``inner``.

Open-arc windings converge slowly as eps -> 0. The inner limit is obtained by
threshold closure: the arc endpoints are joined by straight segments inside
kappa > 0 to (+-1/lambda0, 0), where S = -1 exactly. In the gauge zeta = inf,
S is regular and unimodular throughout kappa > 0, so the closed path is
homotopic to the eps -> 0 limit path and its winding is the limit itself.
The same closure fails for the outer arc, whose region contains infinity where
psi^inf is singular; its limit is the full winding minus the inner limit.

Sampling is refined until arg S moves by less than pi/4 per step and the
numerator and denominator of S change by less than half their size. The second
rule matters near merge points, where S turns by 2 pi over a kx width of order
eps / slope and a coarse grid can skip the whole turn.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .boundary import BoundaryCondition, family_a_bc
from .bulk import FluidParams
from .errors import SingularGaugeError, UnresolvedWindingError
from .scattering import GAUGE_INF, SectionGauge, _check_pole, kernel_amplitude, scattering_parts

ARCS = ("full", "inner", "outer")
SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ContourArc:
    epsilon: float
    lambda0: float = 0.05
    arc: str = "full"
    n_samples: int = 2048

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.lambda0 < 0:
            raise ValueError("lambda0 must be non-negative")
        if self.arc not in ARCS:
            raise ValueError(f"arc must be one of {ARCS}")
        if self.n_samples < 256:
            raise ValueError("n_samples must be at least 256")

    @property
    def radius(self):
        return 0.5 / self.epsilon

    @property
    def theta_cut(self):
        """theta at lambda_x = lambda0."""
        return 2 * np.arctan2(self.epsilon, self.lambda0)

    def theta_range(self):
        t0 = self.theta_cut
        if self.arc == "full":
            return 0.0, 2 * np.pi
        if self.arc == "outer":
            return t0, 2 * np.pi - t0
        return -t0, t0


def circle_point(epsilon, theta):
    R = 0.5 / epsilon
    theta = np.asarray(theta, float)
    return R * np.sin(theta), R + epsilon - R * np.cos(theta)


def lambda_of_theta(epsilon, theta):
    with np.errstate(divide="ignore"):
        return epsilon / np.tan(0.5 * np.asarray(theta, float))


@dataclass
class ContourSamples:
    theta: np.ndarray
    lambda_x: np.ndarray
    kx: np.ndarray
    kappa: np.ndarray


def contour(epsilon: float, lambda0: float, arc: str = "full", n_samples: int = 2048) -> ContourSamples:
    """Graded samples of an arc of C_eps in the reverse-lambda_x orientation.

    Half the nodes are uniform in theta (which is already graded near
    lambda_x = 0, the top of the circle); the other half are uniform in kx
    along the bottom of the circle, where the band-edge features live. The
    arc endpoints and the cut points are always included.
    """
    arc_spec = ContourArc(epsilon, lambda0, arc, n_samples)
    lo, hi = arc_spec.theta_range()
    R = arc_spec.radius
    t_uniform = np.linspace(lo, hi, n_samples // 2)
    # bottom half of the circle: theta = arcsin(kx / R) for |theta| < pi/2
    kx_b = np.linspace(-R, R, n_samples // 2)
    t_bottom = np.arcsin(np.clip(kx_b / R, -1, 1))
    t_bottom = np.concatenate([t_bottom, t_bottom + 2 * np.pi])
    t_bottom = t_bottom[(t_bottom > lo) & (t_bottom < hi)]
    cuts = np.array([arc_spec.theta_cut, 2 * np.pi - arc_spec.theta_cut, -arc_spec.theta_cut, np.pi])
    cuts = cuts[(cuts > lo) & (cuts < hi)]
    theta = np.unique(np.concatenate([t_uniform, t_bottom, cuts, [lo, hi]]))
    kx, kappa = circle_point(epsilon, theta)
    return ContourSamples(theta, lambda_of_theta(epsilon, theta), kx, kappa)


# --------------------------------------------------------------- unwrapping


def _amplitude_fn(params, bc, gauge, method):
    """Return S_of(kx, kappa) -> (S, guards).

    The guards are the smooth numerator and denominator of the determinant
    formula; refinement watches their relative change so a fast 2 pi turn of S
    cannot fall between two samples.
    """
    parts = lambda kx, kap: scattering_parts(params, bc, gauge, kx, kap)
    if method == "determinant":

        def S_of(kx, kap):
            N, D = parts(kx, kap)
            _check_pole(D)
            return N / D, np.stack([N, D])

        return S_of
    if method == "kernel":
        bc_k = bc if isinstance(bc, BoundaryCondition) else family_a_bc(float(bc))
        g = None if gauge is GAUGE_INF else gauge
        return lambda kx, kap: (kernel_amplitude(params, bc_k, kx, kap, g), np.stack(parts(kx, kap)))
    raise ValueError(f"unknown method {method!r}")


def _bad_intervals(S, G, jump):
    steps = np.abs(np.angle(S[1:] / S[:-1])) > jump
    dG = np.abs(G[:, 1:] - G[:, :-1])
    small = np.minimum(np.abs(G[:, 1:]), np.abs(G[:, :-1]))
    return np.nonzero(steps | np.any(dG > 0.5 * small, axis=0))[0]


def _refined_phase(path, S_of, t, max_rounds=60, jump=np.pi / 4, max_nodes=2_000_000):
    """Bisect parameter intervals until phase steps are below ``jump`` and the guards vary slowly.

    ``path(t)`` maps the parameter to (kx, kappa). Returns (t, S, steps).
    """
    t = np.asarray(t, float)
    S, G = S_of(*path(t))
    for _ in range(max_rounds):
        bad = _bad_intervals(S, G, jump)
        if bad.size == 0 or t.size + bad.size > max_nodes:
            break
        tm = 0.5 * (t[bad] + t[bad + 1])
        Sm, Gm = S_of(*path(tm))
        t = np.insert(t, bad + 1, tm)
        S = np.insert(S, bad + 1, Sm)
        G = np.insert(G, bad + 1, Gm, axis=1)
    steps = np.angle(S[1:] / S[:-1])
    if np.any(np.abs(steps) > np.pi * (1 - 1e-9)):
        raise UnresolvedWindingError(f"phase step {np.max(np.abs(steps)):.3f} rad survived refinement")
    return t, S, steps


def _converged_phase(path, S_of, nodes, n0, tol=0.005, max_doublings=5):
    """Refine, then double the base sampling until two successive doublings agree.

    ``nodes(n)`` returns the base parameter grid of size about n. Requiring
    two agreements guards against a full 2 pi turn hiding between samples.
    Returns (t, S, steps, history).
    """
    history = []
    n = n0
    for _ in range(max_doublings + 1):
        t, S, steps = _refined_phase(path, S_of, nodes(n))
        history.append([int(t.size), float(np.sum(steps) / (2 * np.pi))])
        if len(history) >= 3 and all(
            abs(history[-1][1] - h[1]) < tol for h in history[-3:-1]
        ):
            return t, S, steps, history
        n *= 2
    raise UnresolvedWindingError(f"winding did not settle: {history}")


def _segment(p, q):
    return lambda s: (p[0] + (q[0] - p[0]) * s, p[1] + (q[1] - p[1]) * s)


def _segment_phase(S_of, p, q, n=512):
    _, _, steps, _ = _converged_phase(_segment(p, q), S_of, lambda m: np.linspace(0, 1, m), n)
    return float(np.sum(steps))


@dataclass
class WindingReport:
    arc: dict
    gauge: str
    bc: str
    method: str
    winding: float
    residual: float
    n_samples: int
    history: list = field(default_factory=list)
    limit: float | None = None
    limit_method: str | None = None
    connector_phase: float | None = None
    samples: dict | None = None
    a: float | None = None

    def to_json(self, include_samples=False) -> str:
        doc = asdict(self)
        doc["schema_version"] = SCHEMA_VERSION
        doc["epsilon"] = self.arc["epsilon"]
        doc["lambda"] = self.arc["lambda0"]
        if not include_samples:
            doc.pop("samples")
        return json.dumps(doc, indent=2, sort_keys=True)

    def csv_rows(self):
        s = self.samples or {}
        keys = ("lambda_x", "kx", "kappa", "re_S", "im_S", "arg")
        return [dict(zip(keys, vals)) for vals in zip(*(s.get(k, []) for k in keys))]


def _check_gauge(gauge: SectionGauge, arc: ContourArc):
    """Arcs through finite kx need zeta inside the circle (or zeta = inf on the inner arc)."""
    if arc.arc == "outer" or (gauge.zeta is None and arc.arc == "inner"):
        return
    centre = 1j * (arc.radius + arc.epsilon)
    if gauge.zeta is None or not abs(complex(gauge.zeta) - centre) < arc.radius:
        raise SingularGaugeError(
            f"gauge {gauge.label} is not inside C_eps; the {arc.arc} arc would not count C_+"
        )


def _label(bc):
    return bc.label if isinstance(bc, BoundaryCondition) else f"family-a(a={float(bc):g})"


def winding(
    params: FluidParams,
    bc,
    gauge: SectionGauge,
    arc: ContourArc,
    method: str = "determinant",
    tol: float = 0.005,
    max_doublings: int = 5,
    keep_samples: bool = False,
) -> WindingReport:
    """Winding number (1/2 pi) Delta arg S along an arc of C_eps.

    The base sampling is doubled until successive values agree within ``tol``;
    each pass refines adaptively so adjacent phase steps stay below pi/4. For
    open arcs the eps -> 0 value is added as ``limit``: by threshold closure
    for the inner arc, and as full minus inner limit for the outer arc.
    """
    _check_gauge(gauge, arc)
    S_of = _amplitude_fn(params, bc, gauge, method)
    eps = arc.epsilon
    path = lambda th: circle_point(eps, th)
    nodes = lambda n: contour(eps, arc.lambda0, arc.arc, n).theta
    t, S, steps, history = _converged_phase(path, S_of, nodes, arc.n_samples, tol, max_doublings)
    w = history[-1][1]

    report = WindingReport(
        arc=asdict(arc),
        gauge=gauge.label,
        bc=_label(bc),
        method=method,
        winding=w,
        residual=abs(w - round(w)),
        n_samples=int(t.size),
        history=history,
        a=bc.a if isinstance(bc, BoundaryCondition) else float(bc),
    )
    if arc.arc == "inner":
        report.limit, report.connector_phase = inner_limit(params, bc, arc.epsilon, arc.lambda0, arc.n_samples)
        report.limit_method = "threshold-closure"
    elif arc.arc == "outer":
        # Transitions tend to 1 at infinity, so the outer limit does not depend on
        # the gauge; use one whose singular point is the centre of the circle.
        centre = SectionGauge(1j * (arc.radius + eps))
        full = winding(params, bc, centre, ContourArc(eps, arc.lambda0, "full", arc.n_samples), method, tol, max_doublings)
        inner, _ = inner_limit(params, bc, arc.epsilon, arc.lambda0, arc.n_samples)
        report.limit = full.winding - inner
        report.limit_method = "full-minus-inner"
    if keep_samples:
        kx, kap = path(t)
        arg = np.concatenate([[np.angle(S[0])], np.angle(S[0]) + np.cumsum(steps)])
        report.samples = {
            "lambda_x": lambda_of_theta(eps, t).tolist(),
            "kx": kx.tolist(),
            "kappa": kap.tolist(),
            "re_S": S.real.tolist(),
            "im_S": S.imag.tolist(),
            "arg": arg.tolist(),
        }
    return report


def inner_limit(params: FluidParams, bc, epsilon: float, lambda0: float, n_samples: int = 2048):
    """eps -> 0 limit of the inner-arc winding by threshold closure in gauge inf.

    The inner arc is extended by straight connectors from (-1/lambda0, 0) and
    to (1/lambda0, 0), where S = -1. S_inf is continuous and unimodular on all
    of kappa > 0, so the closed path is homotopic to the segment kappa = 0+,
    |kx| < 1/lambda0, whose winding is the limit. Outer limits cannot be
    closed the same way: psi^inf is singular at infinity.

    Returns (limit, connector phase / 2 pi).
    """
    if lambda0 <= 0:
        raise ValueError("threshold closure needs lambda0 > 0")
    S_of = _amplitude_fn(params, bc, GAUGE_INF, "determinant")
    t0 = 2 * np.arctan2(epsilon, lambda0)
    nodes = lambda n: contour(epsilon, lambda0, "inner", n).theta
    _, _, steps, _ = _converged_phase(lambda th: circle_point(epsilon, th), S_of, nodes, n_samples)
    conn = _segment_phase(S_of, (-1.0 / lambda0, 0.0), circle_point(epsilon, -t0))
    conn += _segment_phase(S_of, circle_point(epsilon, t0), (1.0 / lambda0, 0.0))
    return (float(np.sum(steps)) + conn) / (2 * np.pi), conn / (2 * np.pi)


def phase_change_along(params: FluidParams, bc, gauge: SectionGauge, p, q, method="determinant", n=2048) -> float:
    """Total change of arg S along the straight segment p -> q, divided by 2 pi."""
    return _segment_phase(_amplitude_fn(params, bc, gauge, method), p, q, n) / (2 * np.pi)


DEFAULT_LAMBDA = 0.05
DEFAULT_EPSILONS = (0.1, 0.05, 0.025)
LAMBDA_SWEEP = (0.025, 0.05, 0.08)


def default_gauge(epsilon: float) -> SectionGauge:
    """zeta = i, inside C_eps for every eps < 1."""
    if not epsilon < 1:
        raise ValueError("default gauge zeta = i needs eps < 1")
    return SectionGauge(1j)


@dataclass
class ArcTriple:
    """Full, inner and outer windings at one eps, with the eps -> 0 limits of the open arcs."""

    epsilon: float
    lambda0: float
    full: WindingReport
    inner: WindingReport
    outer: WindingReport

    @property
    def additivity(self) -> float:
        return abs(self.inner.winding + self.outer.winding - self.full.winding)

    def summary(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "lambda": self.lambda0,
            "full": self.full.winding,
            "inner": self.inner.winding,
            "outer": self.outer.winding,
            "inner_limit": self.inner.limit,
            "outer_limit": self.outer.limit,
            "additivity": self.additivity,
        }


def arc_triple(params: FluidParams, bc, epsilon: float, lambda0: float = DEFAULT_LAMBDA, method="determinant", gauge=None) -> ArcTriple:
    gauge = gauge or default_gauge(epsilon)
    reports = [winding(params, bc, gauge, ContourArc(epsilon, lambda0, arc), method) for arc in ARCS]
    return ArcTriple(epsilon, lambda0, *reports)


def epsilon_sweep(params: FluidParams, bc, epsilons=DEFAULT_EPSILONS, lambda0: float = DEFAULT_LAMBDA, method="determinant"):
    """Arc triples over decreasing eps plus a stabilization verdict.

    The verdict asks that the limits agree across eps and are integers, and
    that the raw open-arc windings end closer to those limits than they started.
    """
    triples = [arc_triple(params, bc, e, lambda0, method) for e in sorted(epsilons, reverse=True)]
    inner = [t.inner.limit for t in triples]
    outer = [t.outer.limit for t in triples]
    stable = (
        max(inner) - min(inner) < 0.02
        and max(outer) - min(outer) < 0.02
        and abs(inner[0] - round(inner[0])) < 0.02
        and abs(outer[0] - round(outer[0])) < 0.02
    )
    approach = abs(triples[-1].inner.winding - inner[-1]) <= abs(triples[0].inner.winding - inner[0]) + 0.02
    return triples, {"stable": bool(stable), "approaching": bool(approach)}


def lambda_sensitivity(params: FluidParams, bc, epsilon: float = 0.025, lambdas=LAMBDA_SWEEP) -> dict:
    """Inner and outer limits for several arc cuts; they agree while 1/lambda0 exceeds every finite merge |kx|."""
    out = {}
    for lam in lambdas:
        t = arc_triple(params, bc, epsilon, lam)
        out[lam] = (t.inner.limit, t.outer.limit)
    return out


def admissible_lambda(params: FluidParams, bc, lambda0: float = DEFAULT_LAMBDA, window: float = 40.0, margin: float = 0.5) -> float:
    """Largest arc cut <= lambda0 that keeps every finite merge inside the inner arc.

    The inner arc reaches |kx| = 1/lambda0, so the cut is lowered to
    margin / max |kx*| when a merge point lies further out.
    """
    from .edge import merge_events  # edge imports nothing from here; keep the modules decoupled

    bc_obj = bc if isinstance(bc, BoundaryCondition) else family_a_bc(float(bc))
    events = merge_events(params, bc_obj, (-window, window))
    if not events:
        return lambda0
    return min(lambda0, margin / max(abs(e.kx) for e in events))
