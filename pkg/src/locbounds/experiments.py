"""Random-topology generation and seeded Monte Carlo studies.

Reproduces, at desk scale, the standard numerical studies of cooperative
localization bounds:

- ``run_fig6``: mean bound versus number of agents for fixed anchor layouts,
  cooperative and not;
- ``run_fig7``: mean ratio of the closed-form lower/upper bound
  approximations versus number of agents;
- ``run_fig8``: mean bound versus the anchor-placement scale D;
- ``run_scaling``: log-log scaling fits in dense networks (bound ~ 1/N) and
  bounded-ratio checks in extended networks (bound ~ 1/log N for amplitude
  loss exponent 1, constant for exponents above 1);
- ``lemma1_check`` / ``lemma2_check``: empirical probabilities behind the
  scaling proofs (pairwise angle spread and ranging-intensity order
  statistics).

Reproducibility: every random draw comes from a Philox counter-based
generator keyed as key = (seed, trial * 2^32 + role * 2^28 + index), one
substream per (trial, node). Nodes draw in index order within their
substream, so topologies are bit-identical across runs and nested across
sweep sizes (agent i keeps its position as more agents are added), which
makes sweep comparisons common-random-number smooth. Trials are independent
and may run in parallel; aggregation indexes results by trial and sums with
``math.fsum``, so the output is order-independent.

Outputs are CSV rows plus a JSON summary named ``<kind>_<seed>.csv/json``,
written atomically (temp file + rename). Mean bounds skip unlocalizable
draws and report them as an outage fraction. The intensity scale constant
``k_const`` is arbitrary (absolute bound values are not comparable across
conventions; shapes and slopes are what these studies assert).
"""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.stats import linregress

from .bounds import effective_rii, efim_bounds_all
from .infogeo import EllipseForm
from .network import Node, Topology, build_efim
from .ranging import RangingLink, rii_pathloss

__all__ = [
    "ExperimentSpec",
    "ExperimentResult",
    "ScalingResult",
    "Lemma2Result",
    "default_spec",
    "substream",
    "gen_dense",
    "gen_extended",
    "run_fig6",
    "run_fig7",
    "run_fig8",
    "run_scaling",
    "lemma1_check",
    "lemma2_check",
    "angle_pair_spread",
    "run_experiment",
    "EXPERIMENT_KINDS",
]

EXPERIMENT_KINDS = (
    "fig4",
    "fig6",
    "fig7",
    "fig8",
    "dense_scaling",
    "extended_scaling",
    "lemma1",
    "lemma2",
)

_ANCHOR_LAYOUTS = ("setI", "setII", "both", "random")

# substream roles
_ROLE_AGENT = 1
_ROLE_ANCHOR = 2
_ROLE_FADING = 3
_ROLE_COUNT = 4
_ROLE_DRAW = 5


def substream(seed: int, trial: int, role: int, index: int = 0) -> np.random.Generator:
    """Philox substream keyed by (seed, trial, role, index).

    key[0] = seed, key[1] = trial * 2^32 + role * 2^28 + index, so distinct
    (trial, role, index) triples never collide for trial < 2^32, role < 16,
    index < 2^28.
    """
    if role <= 0 or role >= 16 or index < 0 or index >= 1 << 28:
        raise ValueError("role in [1, 15] and index below 2^28 required")
    key = np.array(
        [seed % (1 << 64), ((trial % (1 << 32)) << 32) + (role << 28) + index],
        dtype=np.uint64,
    )
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class ExperimentSpec:
    """Parameters of one Monte Carlo study; defaults follow the 20 m square
    geometry with anchors at scale D and free-space intensity k_const/d^2."""

    kind: str
    trials: int = 100
    seed: int = 0
    # dense geometry
    side: float = 20.0
    d_anchor: float = 10.0
    k_const: float = 1.0
    na: int = 15
    nb: int = 4
    na_sweep: tuple[int, ...] = ()
    d_sweep: tuple[float, ...] = ()
    layouts: tuple[str, ...] = ("setI", "setII", "both")
    cooperative: bool = True
    # extended geometry
    rho_b: float = 1.0
    rho_a: float = 0.0
    r0: float = 0.5
    rmax: Optional[float] = None
    path_exponent: float = 1.0
    n_sweep: tuple[int, ...] = ()
    poisson_counts: bool = False
    fading_sigma_db: float = 0.0
    # lemma checks
    n_angles: int = 64
    n_order: int = 32
    lambda0: float = 0.25

    def __post_init__(self) -> None:
        if self.kind not in EXPERIMENT_KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        for name in ("side", "d_anchor", "k_const", "rho_b", "r0"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive")
        for name in ("rho_a", "fading_sigma_db"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be nonnegative")
        for layout in self.layouts:
            if layout not in _ANCHOR_LAYOUTS:
                raise ValueError(f"unknown anchor layout {layout!r}")


_SPEC_DEFAULTS: dict[str, dict] = {
    "fig4": dict(trials=1),
    "fig6": dict(trials=200, na_sweep=(1, 2, 3, 5, 8, 11, 15), d_anchor=10.0),
    "fig7": dict(trials=200, na_sweep=(2, 3, 5, 8, 15), d_anchor=10.0),
    "fig8": dict(
        trials=100,
        na=15,
        d_sweep=(1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0, 13.0, 14.0),
    ),
    "dense_scaling": dict(trials=200, nb=4, na_sweep=(4, 8, 16, 32, 64), layouts=("setI",)),
    "extended_scaling": dict(trials=200, n_sweep=(64, 256, 1024, 4096), cooperative=False),
    "lemma1": dict(trials=10_000, n_angles=64),
    "lemma2": dict(trials=10_000, n_order=32, lambda0=0.25),
}


def default_spec(kind: str, seed: int = 0, trials: Optional[int] = None, **overrides) -> ExperimentSpec:
    """Spec with per-kind defaults; keyword overrides win."""
    params = dict(_SPEC_DEFAULTS.get(kind, {}))
    params.update(overrides)
    if trials is not None:
        params["trials"] = trials
    return ExperimentSpec(kind=kind, seed=seed, **params)


def _anchor_positions(layout: str, d: float) -> list[tuple[float, float]]:
    set_i = [(d, d), (d, -d), (-d, d), (-d, -d)]
    set_ii = [(d, 0.0), (-d, 0.0), (0.0, d), (0.0, -d)]
    if layout == "setI":
        return set_i
    if layout == "setII":
        return set_ii
    if layout == "both":
        return set_i + set_ii
    raise ValueError(f"layout {layout!r} has no fixed positions")


def _fading_draws(spec_sigma_db: float, rng: np.random.Generator, count: int) -> np.ndarray:
    if spec_sigma_db <= 0.0:
        return np.ones(count)
    return 10.0 ** (spec_sigma_db * rng.standard_normal(count) / 10.0)


def gen_dense(
    seed: int,
    na: int,
    *,
    nb: Optional[int] = None,
    side: float = 20.0,
    anchor_layout: str = "both",
    d: float = 10.0,
    k_const: float = 1.0,
    fading_sigma_db: float = 0.0,
    trial: int = 0,
) -> Topology:
    """Dense-network draw: ``na`` agents uniform in a ``side`` x ``side``
    square, anchors on the fixed layout at scale ``d`` (corners for set I,
    edge midpoints for set II, or ``nb`` uniform draws for ``random``), and
    every pairwise link populated with free-space intensity k_const/d^2.

    Identical (seed, trial) reproduce the topology exactly, and agent i's
    position does not depend on ``na``.
    """
    if na < 0 or (nb is not None and nb < 0):
        raise ValueError("node counts must be nonnegative")
    half = side / 2.0
    anchors: list[Node] = []
    if anchor_layout == "random":
        if nb is None:
            raise ValueError("random anchor layout requires nb")
        for i in range(nb):
            rng = substream(seed, trial, _ROLE_ANCHOR, i)
            x, y = rng.uniform(-half, half, size=2)
            anchors.append(Node(f"b{i}", "anchor", np.array([x, y])))
    else:
        for i, (x, y) in enumerate(_anchor_positions(anchor_layout, d)):
            anchors.append(Node(f"b{i}", "anchor", np.array([x, y])))

    agents: list[Node] = []
    for i in range(na):
        rng = substream(seed, trial, _ROLE_AGENT, i)
        x, y = rng.uniform(-half, half, size=2)
        agents.append(Node(f"a{i}", "agent", np.array([x, y])))

    nodes = tuple(agents + anchors)
    others = [n for n in nodes]
    links: list[RangingLink] = []
    n_links = na * (len(anchors) + na - 1)
    fading = _fading_draws(fading_sigma_db, substream(seed, trial, _ROLE_FADING), n_links)
    li = 0
    for a in agents:
        for other in others:
            if other.node_id == a.node_id:
                continue
            dist = float(np.hypot(*(a.position - other.position)))
            lam = k_const * fading[li] / dist**2
            links.append(RangingLink(from_id=a.node_id, to_id=other.node_id, rii=lam))
            li += 1
    return Topology(nodes=nodes, links=tuple(links))


def gen_extended(
    seed: int,
    *,
    rho_b: float,
    rho_a: float = 0.0,
    radius: float,
    r0: float,
    rmax: Optional[float] = None,
    b: float = 1.0,
    k_const: float = 1.0,
    poisson_counts: bool = False,
    fading_sigma_db: float = 0.0,
    trial: int = 0,
) -> Topology:
    """Extended-network draw around a reference agent at the origin.

    Anchors (and optional extra agents) are uniform in the disk of ``radius``
    with densities rho_b / rho_a per unit area; counts are fixed at
    round(rho * pi * R^2) or Poisson with that mean. Link intensities follow
    the truncated path-loss model z / r^(2b) for r >= r0.
    """
    if radius <= r0:
        raise ValueError("radius must exceed the minimum node separation r0")
    area = math.pi * radius**2
    if poisson_counts:
        counts_rng = substream(seed, trial, _ROLE_COUNT)
        nb = int(counts_rng.poisson(rho_b * area))
        na_extra = int(counts_rng.poisson(rho_a * area)) if rho_a > 0.0 else 0
    else:
        nb = int(round(rho_b * area))
        na_extra = int(round(rho_a * area)) if rho_a > 0.0 else 0

    def _disk_point(rng: np.random.Generator) -> np.ndarray:
        u, v = rng.random(2)
        r = radius * math.sqrt(u)
        ang = 2.0 * math.pi * v
        return np.array([r * math.cos(ang), r * math.sin(ang)])

    anchors = [
        Node(f"b{i}", "anchor", _disk_point(substream(seed, trial, _ROLE_ANCHOR, i)))
        for i in range(nb)
    ]
    agents = [Node("a0", "agent", np.array([0.0, 0.0]))]
    agents += [
        Node(f"a{i + 1}", "agent", _disk_point(substream(seed, trial, _ROLE_AGENT, i)))
        for i in range(na_extra)
    ]

    nodes = tuple(agents + anchors)
    links: list[RangingLink] = []
    n_links = len(agents) * (len(nodes) - 1)
    fading = _fading_draws(fading_sigma_db, substream(seed, trial, _ROLE_FADING), n_links)
    li = 0
    for a in agents:
        for other in nodes:
            if other.node_id == a.node_id:
                continue
            dist = float(np.hypot(*(a.position - other.position)))
            lam = (
                rii_pathloss(dist, b, z=k_const * fading[li], r0=r0, rmax=rmax)
                if dist > 0.0
                else 0.0
            )
            links.append(RangingLink(from_id=a.node_id, to_id=other.node_id, rii=lam))
            li += 1
    return Topology(nodes=nodes, links=tuple(links))


def _per_agent_spebs(net) -> np.ndarray:
    """SPEB per agent from one factorization of the total information.

    The (k, k) 2x2 block of the inverse is the inverse of agent k's reduced
    information, so its trace is the bound. Singular totals mark every agent
    of the draw unlocalizable (inf).
    """
    total = net.total.array
    n = net.n_agents
    try:
        factor = cho_factor(total, lower=True)
    except np.linalg.LinAlgError:
        return np.full(n, np.inf)
    inv = cho_solve(factor, np.eye(total.shape[0]))
    return np.array([inv[2 * k, 2 * k] + inv[2 * k + 1, 2 * k + 1] for k in range(n)])


def _noncoop_spebs(net) -> np.ndarray:
    """Anchor-only (plus prior) SPEB per agent."""
    base = net.j_a + net.xi_p
    out = np.empty(net.n_agents)
    for k in range(net.n_agents):
        blk = base[2 * k : 2 * k + 2, 2 * k : 2 * k + 2]
        tr = blk[0, 0] + blk[1, 1]
        det = blk[0, 0] * blk[1, 1] - blk[0, 1] * blk[1, 0]
        eig_min = 0.5 * tr - math.hypot(0.5 * (blk[0, 0] - blk[1, 1]), blk[0, 1])
        out[k] = tr / det if eig_min > 1e-9 * max(tr, 0.0) else np.inf
    return out


class _Aggregate(NamedTuple):
    mean: float
    q10: float
    q50: float
    q90: float
    outage: float
    count: int


def _aggregate(values: Sequence[float]) -> _Aggregate:
    arr = np.asarray(values, dtype=float)
    finite = arr[np.isfinite(arr)]
    outage = 1.0 - finite.size / arr.size if arr.size else 0.0
    if finite.size == 0:
        return _Aggregate(math.inf, math.inf, math.inf, math.inf, outage, 0)
    mean = math.fsum(finite.tolist()) / finite.size
    q10, q50, q90 = np.quantile(finite, [0.1, 0.5, 0.9])
    return _Aggregate(mean, float(q10), float(q50), float(q90), outage, int(finite.size))


@dataclass(frozen=True)
class ExperimentResult:
    """Rows plus summary of one study; knows how to write itself to disk."""

    kind: str
    seed: int
    columns: tuple[str, ...]
    rows: tuple[dict, ...]
    summary: dict

    def write(self, out_dir: str) -> tuple[str, str]:
        os.makedirs(out_dir, exist_ok=True)
        csv_path = os.path.join(out_dir, f"{self.kind}_{self.seed}.csv")
        json_path = os.path.join(out_dir, f"{self.kind}_{self.seed}.json")
        _atomic_write(csv_path, self._csv_text())
        _atomic_write(json_path, json.dumps(self.summary, indent=2, sort_keys=True) + "\n")
        return csv_path, json_path

    def _csv_text(self) -> str:
        import io

        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(self.columns)
        for row in self.rows:
            writer.writerow([_csv_cell(row[c]) for c in self.columns])
        return buf.getvalue()


def _csv_cell(value) -> str:
    if isinstance(value, float):
        return repr(float(value))  # plain shortest round-trip, no numpy repr
    return str(value)


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp_", suffix=".part")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _spec_echo(spec: ExperimentSpec) -> dict:
    return {
        "kind": spec.kind,
        "seed": spec.seed,
        "trials": spec.trials,
        "k_const_m2": spec.k_const,
    }


def run_fig6(spec: ExperimentSpec) -> ExperimentResult:
    """Mean bound versus number of agents, per anchor layout, cooperative
    and anchors-only."""
    sweep = spec.na_sweep or _SPEC_DEFAULTS["fig6"]["na_sweep"]
    columns = (
        "layout",
        "cooperative",
        "na",
        "trials",
        "mean_speb_m2",
        "q10_m2",
        "q50_m2",
        "q90_m2",
        "outage",
    )
    rows: list[dict] = []
    for layout in spec.layouts:
        for na in sweep:
            coop_vals: list[float] = []
            nonc_vals: list[float] = []
            for trial in range(spec.trials):
                topo = gen_dense(
                    spec.seed,
                    na,
                    side=spec.side,
                    anchor_layout=layout,
                    d=spec.d_anchor,
                    k_const=spec.k_const,
                    fading_sigma_db=spec.fading_sigma_db,
                    trial=trial,
                )
                net = build_efim(topo)
                coop_vals.extend(_per_agent_spebs(net).tolist())
                nonc_vals.extend(_noncoop_spebs(net).tolist())
            for coop, vals in ((True, coop_vals), (False, nonc_vals)):
                agg = _aggregate(vals)
                rows.append(
                    dict(
                        layout=layout,
                        cooperative=coop,
                        na=na,
                        trials=spec.trials,
                        mean_speb_m2=agg.mean,
                        q10_m2=agg.q10,
                        q50_m2=agg.q50,
                        q90_m2=agg.q90,
                        outage=agg.outage,
                    )
                )
    summary = _spec_echo(spec) | {
        "layouts": list(spec.layouts),
        "na_sweep": list(sweep),
        "mean_speb_m2": {
            f"{r['layout']}/{'coop' if r['cooperative'] else 'noncoop'}/na={r['na']}": r[
                "mean_speb_m2"
            ]
            for r in rows
        },
    }
    return ExperimentResult(spec.kind, spec.seed, columns, tuple(rows), summary)


def run_fig7(spec: ExperimentSpec) -> ExperimentResult:
    """Mean ratio of the lower to the upper bound approximation versus the
    number of agents: exactly 1 for two agents, in (0, 1] always."""
    sweep = spec.na_sweep or _SPEC_DEFAULTS["fig7"]["na_sweep"]
    columns = ("layout", "na", "trials", "mean_ratio", "q10", "q50", "q90", "outage")
    rows: list[dict] = []
    for layout in spec.layouts:
        for na in sweep:
            ratios: list[float] = []
            for trial in range(spec.trials):
                topo = gen_dense(
                    spec.seed,
                    na,
                    side=spec.side,
                    anchor_layout=layout,
                    d=spec.d_anchor,
                    k_const=spec.k_const,
                    fading_sigma_db=spec.fading_sigma_db,
                    trial=trial,
                )
                for low, high, _ in efim_bounds_all(build_efim(topo)).values():
                    speb_u = _info_speb(low)  # loose bound: trace(J_L^-1)
                    speb_l = _info_speb(high)  # tight bound: trace(J_U^-1)
                    if math.isinf(speb_u) or math.isinf(speb_l):
                        ratios.append(math.inf)
                    else:
                        ratios.append(speb_l / speb_u)
            agg = _aggregate(ratios)
            rows.append(
                dict(
                    layout=layout,
                    na=na,
                    trials=spec.trials,
                    mean_ratio=agg.mean,
                    q10=agg.q10,
                    q50=agg.q50,
                    q90=agg.q90,
                    outage=agg.outage,
                )
            )
    summary = _spec_echo(spec) | {
        "layouts": list(spec.layouts),
        "na_sweep": list(sweep),
        "mean_ratio": {f"{r['layout']}/na={r['na']}": r["mean_ratio"] for r in rows},
    }
    return ExperimentResult(spec.kind, spec.seed, columns, tuple(rows), summary)


def _info_speb(j) -> float:
    tr = j.trace
    det = j.det
    eig_min = 0.5 * tr - math.hypot(0.5 * (j.a11 - j.a22), j.a12)
    return tr / det if eig_min > 1e-9 * max(tr, 0.0) else math.inf


def run_fig8(spec: ExperimentSpec) -> ExperimentResult:
    """Mean bound versus the anchor-placement scale D: large when anchors
    cluster at the center (rank-starved geometry), rising again once
    path loss dominates; the interior minimum and the set I / set II
    crossing are reported."""
    sweep = spec.d_sweep or _SPEC_DEFAULTS["fig8"]["d_sweep"]
    columns = (
        "layout",
        "d_m",
        "na",
        "trials",
        "mean_speb_m2",
        "q10_m2",
        "q50_m2",
        "q90_m2",
        "outage",
    )
    rows: list[dict] = []
    for layout in spec.layouts:
        for d in sweep:
            vals: list[float] = []
            for trial in range(spec.trials):
                topo = gen_dense(
                    spec.seed,
                    spec.na,
                    nb=spec.nb if layout == "random" else None,
                    side=spec.side,
                    anchor_layout=layout,
                    d=d,
                    k_const=spec.k_const,
                    fading_sigma_db=spec.fading_sigma_db,
                    trial=trial,
                )
                net = build_efim(topo)
                vals.extend(
                    (_per_agent_spebs(net) if spec.cooperative else _noncoop_spebs(net)).tolist()
                )
            agg = _aggregate(vals)
            rows.append(
                dict(
                    layout=layout,
                    d_m=float(d),
                    na=spec.na,
                    trials=spec.trials,
                    mean_speb_m2=agg.mean,
                    q10_m2=agg.q10,
                    q50_m2=agg.q50,
                    q90_m2=agg.q90,
                    outage=agg.outage,
                )
            )

    summary = _spec_echo(spec) | {"d_sweep": list(map(float, sweep)), "layouts": list(spec.layouts)}
    by_layout: dict[str, list[tuple[float, float]]] = {}
    for r in rows:
        by_layout.setdefault(r["layout"], []).append((r["d_m"], r["mean_speb_m2"]))
    minima = {}
    for layout, pts in by_layout.items():
        pts.sort()
        means = [m for _, m in pts]
        k = int(np.argmin(means))
        minima[layout] = {
            "d_m": pts[k][0],
            "mean_speb_m2": means[k],
            "interior": 0 < k < len(pts) - 1,
        }
    summary["minima"] = minima
    if "setI" in by_layout and "setII" in by_layout:
        summary["setI_minus_setII_sign_change_d_m"] = _sign_change(
            by_layout["setI"], by_layout["setII"]
        )
    return ExperimentResult(spec.kind, spec.seed, columns, tuple(rows), summary)


def _sign_change(
    pts_a: list[tuple[float, float]], pts_b: list[tuple[float, float]]
) -> Optional[float]:
    """First sweep value where the sign of (setI - setII) flips, if any."""
    diffs = [(d, ma - mb) for (d, ma), (_, mb) in zip(sorted(pts_a), sorted(pts_b))]
    for (d0, v0), (d1, v1) in zip(diffs, diffs[1:]):
        if v0 == 0.0 or (v0 < 0.0) != (v1 < 0.0):
            return d1 if v0 != 0.0 else d0
    return None


@dataclass(frozen=True)
class ScalingResult:
    """Per-sweep-point statistics plus the fitted log-log behavior."""

    kind: str
    seed: int
    sweep: tuple[int, ...]
    rows: tuple[dict, ...]
    fits: dict

    def to_experiment_result(self, columns: tuple[str, ...]) -> ExperimentResult:
        summary = {"kind": self.kind, "seed": self.seed, "sweep": list(self.sweep)} | self.fits
        return ExperimentResult(self.kind, self.seed, columns, self.rows, summary)


def _fit_loglog(x: Sequence[float], y: Sequence[float]) -> dict:
    """Slope of log y against log x with a 95% confidence half-width."""
    if len(x) < 4:
        raise ValueError("scaling sweep needs at least 4 points")
    res = linregress(np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float)))
    return {
        "slope": float(res.slope),
        "ci95": float(1.96 * res.stderr),
        "intercept": float(res.intercept),
        "r_value": float(res.rvalue),
    }


def run_scaling(spec: ExperimentSpec) -> ScalingResult:
    """Scaling-law study; ``spec.kind`` picks the regime.

    dense_scaling: geometric Na sweep at fixed anchors; fits the slope of
    log(mean bound) against log(Nb + Na) (cooperative) and against log(Na)
    (anchors only, which should be flat).

    extended_scaling: node-count sweep at fixed densities; for amplitude
    loss exponent 1 reports the spread of mean bound x log N across the
    sweep (bounded when the bound scales as 1/log N), for exponents above 1
    the terminal ratio (the bound converges to a constant).
    """
    if spec.kind == "dense_scaling":
        return _run_dense_scaling(spec)
    if spec.kind == "extended_scaling":
        return _run_extended_scaling(spec)
    raise ValueError(f"not a scaling kind: {spec.kind!r}")


def _run_dense_scaling(spec: ExperimentSpec) -> ScalingResult:
    sweep = tuple(spec.na_sweep or _SPEC_DEFAULTS["dense_scaling"]["na_sweep"])
    layout = spec.layouts[0] if spec.layouts else "setI"
    rows: list[dict] = []
    coop_means: list[float] = []
    nonc_means: list[float] = []
    upper_means: list[float] = []
    lower_means: list[float] = []
    for na in sweep:
        coop_vals: list[float] = []
        nonc_vals: list[float] = []
        upper_vals: list[float] = []
        lower_vals: list[float] = []
        for trial in range(spec.trials):
            topo = gen_dense(
                spec.seed,
                na,
                nb=spec.nb if layout == "random" else None,
                side=spec.side,
                anchor_layout=layout,
                d=spec.d_anchor,
                k_const=spec.k_const,
                fading_sigma_db=spec.fading_sigma_db,
                trial=trial,
            )
            net = build_efim(topo)
            coop_vals.extend(_per_agent_spebs(net).tolist())
            nonc_vals.extend(_noncoop_spebs(net).tolist())
            for low, high, _ in efim_bounds_all(net).values():
                upper_vals.append(_info_speb(low))
                lower_vals.append(_info_speb(high))
        nb_eff = len(_anchor_positions(layout, spec.d_anchor)) if layout != "random" else spec.nb
        upper_means.append(_aggregate(upper_vals).mean)
        lower_means.append(_aggregate(lower_vals).mean)
        for coop, vals, store in ((True, coop_vals, coop_means), (False, nonc_vals, nonc_means)):
            agg = _aggregate(vals)
            store.append(agg.mean)
            rows.append(
                dict(
                    cooperative=coop,
                    na=na,
                    nb=nb_eff,
                    n_total=na + nb_eff,
                    trials=spec.trials,
                    mean_speb_m2=agg.mean,
                    q10_m2=agg.q10,
                    q50_m2=agg.q50,
                    q90_m2=agg.q90,
                    outage=agg.outage,
                )
            )
    nb_eff = rows[0]["nb"]
    n_total = [na + nb_eff for na in sweep]
    # The closed-form approximations are the objects the asymptotic argument
    # manipulates; their fits are reported next to the exact one so the
    # transition regime is visible.
    fits = {
        "cooperative_fit_vs_log_n_total": _fit_loglog(n_total, coop_means),
        "upper_approx_fit_vs_log_n_total": _fit_loglog(n_total, upper_means),
        "lower_approx_fit_vs_log_n_total": _fit_loglog(n_total, lower_means),
        "noncooperative_fit_vs_log_na": _fit_loglog(list(sweep), nonc_means),
        "layout": layout,
    }
    return ScalingResult(spec.kind, spec.seed, sweep, tuple(rows), fits)


def _run_extended_scaling(spec: ExperimentSpec) -> ScalingResult:
    sweep = tuple(spec.n_sweep or _SPEC_DEFAULTS["extended_scaling"]["n_sweep"])
    rows: list[dict] = []
    means: list[float] = []
    for n_nodes in sweep:
        radius = math.sqrt(n_nodes / (math.pi * spec.rho_b))
        vals: list[float] = []
        for trial in range(spec.trials):
            topo = gen_extended(
                spec.seed,
                rho_b=spec.rho_b,
                rho_a=spec.rho_a if spec.cooperative else 0.0,
                radius=radius,
                r0=spec.r0,
                rmax=spec.rmax,
                b=spec.path_exponent,
                k_const=spec.k_const,
                poisson_counts=spec.poisson_counts,
                fading_sigma_db=spec.fading_sigma_db,
                trial=trial,
            )
            net = build_efim(topo)
            spebs = _per_agent_spebs(net) if spec.cooperative else _noncoop_spebs(net)
            vals.append(float(spebs[net.index("a0")]))  # reference agent at the center
        agg = _aggregate(vals)
        means.append(agg.mean)
        rows.append(
            dict(
                n_anchors=n_nodes,
                radius_m=radius,
                trials=spec.trials,
                mean_speb_m2=agg.mean,
                q10_m2=agg.q10,
                q50_m2=agg.q50,
                q90_m2=agg.q90,
                outage=agg.outage,
            )
        )
    products = [m * math.log(n) for m, n in zip(means, sweep)]
    fits: dict = {
        "path_exponent": spec.path_exponent,
        "mean_times_log_n": products,
        "mean_times_log_n_spread": max(products) / min(products),
        "terminal_ratio": means[-1] / means[-2],
    }
    return ScalingResult(spec.kind, spec.seed, sweep, tuple(rows), fits)


def angle_pair_spread(phis: np.ndarray) -> float:
    """Double angular spread sum_{k,j} sin^2(phi_k - phi_j).

    Identity: equals (N^2 - |sum_k exp(2i phi_k)|^2) / 2.
    """
    phis = np.asarray(phis, dtype=float)
    n = phis.size
    z = np.exp(2j * phis).sum()
    return 0.5 * (n * n - float(abs(z)) ** 2)


def lemma1_check(n: int, trials: int, seed: int) -> float:
    """Fraction of angle draws whose pairwise spread falls below N^2 / 32.

    Uniform bearings almost never violate the floor; the fraction decreases
    (exponentially) with N.
    """
    if n < 2 or trials < 1:
        raise ValueError("need n >= 2 and trials >= 1")
    rng = substream(seed, 0, _ROLE_DRAW)
    phis = rng.random((trials, n)) * 2.0 * math.pi
    z = np.exp(2j * phis).sum(axis=1)
    stats = 0.5 * (n * n - np.abs(z) ** 2)
    return float(np.mean(stats < n * n / 32.0))


class Lemma2Result(NamedTuple):
    empirical: float
    bound: float
    eps: float


def lemma2_check(
    n: int,
    lambda0: float,
    trials: int,
    seed: int,
    sampler: Optional[Callable[[np.random.Generator, tuple[int, int]], np.ndarray]] = None,
    eps: Optional[float] = None,
) -> Lemma2Result:
    """Empirical tail of the (N/2+1)-th intensity order statistic vs the
    closed bound (4 eps (1 - eps))^(N/2), eps = P{lambda <= lambda0}.

    The default draw is uniform on [0, 1] (so eps = lambda0); custom
    samplers must supply eps. Requires eps < 1/2 and even n.
    """
    if n < 2 or n % 2 != 0:
        raise ValueError("n must be even and >= 2")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if sampler is None:
        sampler = lambda rng, size: rng.random(size)
        if eps is None:
            eps = float(lambda0)
    if eps is None:
        raise ValueError("custom samplers must supply eps = P{lambda <= lambda0}")
    if not 0.0 < eps < 0.5:
        raise ValueError("the bound requires 0 < eps < 1/2")
    rng = substream(seed, 0, _ROLE_DRAW)
    draws = sampler(rng, (trials, n))
    order_stat = np.sort(draws, axis=1)[:, n // 2]  # the (N/2 + 1)-th smallest
    empirical = float(np.mean(order_stat <= lambda0))
    bound = (4.0 * eps * (1.0 - eps)) ** (n / 2.0)
    return Lemma2Result(empirical=empirical, bound=bound, eps=eps)


def _run_fig4(spec: ExperimentSpec) -> ExperimentResult:
    """Effective cooperation intensity versus raw intensity for a fixed peer;
    deterministic (no Monte Carlo), included for completeness of the kinds."""
    peer = EllipseForm(2.0, 1.0, 0.0)
    nus = [10.0 ** (k / 4.0) for k in range(-8, 25)]
    angles = {"0": 0.0, "pi/4": math.pi / 4.0, "pi/2": math.pi / 2.0}
    columns = ("phi", "nu", "xi", "effective_rii")
    rows = []
    for label, phi in angles.items():
        for nu in nus:
            res = effective_rii(peer, nu, phi)
            rows.append(dict(phi=label, nu=nu, xi=res.xi, effective_rii=res.eff))
    limits = {
        label: 1.0 / (math.cos(phi) ** 2 / 2.0 + math.sin(phi) ** 2 / 1.0)
        for label, phi in angles.items()
    }
    summary = _spec_echo(spec) | {"asymptotic_limits": limits}
    return ExperimentResult(spec.kind, spec.seed, columns, tuple(rows), summary)


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """Dispatch a spec to its runner and return uniform result rows."""
    if spec.kind == "fig4":
        return _run_fig4(spec)
    if spec.kind == "fig6":
        return run_fig6(spec)
    if spec.kind == "fig7":
        return run_fig7(spec)
    if spec.kind == "fig8":
        return run_fig8(spec)
    if spec.kind in ("dense_scaling", "extended_scaling"):
        result = run_scaling(spec)
        if spec.kind == "dense_scaling":
            columns = (
                "cooperative",
                "na",
                "nb",
                "n_total",
                "trials",
                "mean_speb_m2",
                "q10_m2",
                "q50_m2",
                "q90_m2",
                "outage",
            )
        else:
            columns = (
                "n_anchors",
                "radius_m",
                "trials",
                "mean_speb_m2",
                "q10_m2",
                "q50_m2",
                "q90_m2",
                "outage",
            )
        return result.to_experiment_result(columns)
    if spec.kind == "lemma1":
        fraction = lemma1_check(spec.n_angles, spec.trials, spec.seed)
        columns = ("n", "trials", "violation_fraction")
        rows = (dict(n=spec.n_angles, trials=spec.trials, violation_fraction=fraction),)
        summary = _spec_echo(spec) | {"n": spec.n_angles, "violation_fraction": fraction}
        return ExperimentResult(spec.kind, spec.seed, columns, rows, summary)
    if spec.kind == "lemma2":
        res = lemma2_check(spec.n_order, spec.lambda0, spec.trials, spec.seed)
        columns = ("n", "trials", "lambda0", "eps", "empirical", "bound")
        rows = (
            dict(
                n=spec.n_order,
                trials=spec.trials,
                lambda0=spec.lambda0,
                eps=res.eps,
                empirical=res.empirical,
                bound=res.bound,
            ),
        )
        summary = _spec_echo(spec) | dict(res._asdict())
        return ExperimentResult(spec.kind, spec.seed, columns, rows, summary)
    raise ValueError(f"unknown experiment kind {spec.kind!r}")
