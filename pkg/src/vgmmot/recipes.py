"""Named experiment recipes: fixed fixtures, a run, and channel-occupancy checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .gaussian import Gaussian
from .graph import ChannelGraph
from .models import MixtureModel, VectorMixtureModel
from .pipeline import Interpolation, RunConfig, compute_distance, interpolate, render_run
from .render import GridSpec

MASS_TOL = 1e-9


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""

    def to_json(self):
        return {"name": self.name, "passed": bool(self.passed), "detail": self.detail}


@dataclass
class Recipe:
    name: str
    description: str
    rho0: object
    rho1: object
    config: dict
    grid: str
    checks: Callable[[object, object, Interpolation], list] = field(repr=False)


def _g(mean, var):
    mean = np.atleast_1d(np.asarray(mean, dtype=float))
    return Gaussian(mean, np.eye(mean.size) * var)


def _vgmm(graph, comps):
    return VectorMixtureModel(graph, [w for w, _, _ in comps], [g for _, g, _ in comps], [q for _, _, q in comps])


def _interior(run):
    return [s for t, s in zip(run.times, run.states) if 0.0 < t < 1.0]


def _support(run):
    return [(int(i), int(j)) for i, j in zip(*np.nonzero(run.result.plan.entries > 0))]


def _endpoint_checks(run):
    """Frames 0 and last are the rasterised inputs; total mass is conserved at every step."""
    checks = []
    masses = [float(s.mass) for s in run.states if not isinstance(s, tuple)]
    if masses:
        drift = max(abs(m - masses[0]) for m in masses)
        checks.append(Check("mass conserved", drift <= MASS_TOL, f"max drift {drift:.3g}"))
    checks.append(Check("frame count", len(run.frames) == len(run.times), f"{len(run.frames)} frames"))
    return checks


def _same_channel_only(rho0, rho1, run):
    bad = [(i, j) for i, j in _support(run) if rho0.channels[i] != rho1.channels[j]]
    return Check("plan supported on same-channel pairs only", not bad, f"cross-channel pairs: {bad}")


def _cross_channel_only(rho0, rho1, run):
    bad = [(i, j) for i, j in _support(run) if rho0.channels[i] == rho1.channels[j]]
    return Check("plan supported on cross-channel pairs only", not bad, f"same-channel pairs: {bad}")


def _channel_mass_over_time(run, c):
    return [float(s.channel_masses()[c]) for s in _interior(run)]


# 1-D, two channels joined by one edge


def _two_channel_pair():
    G = ChannelGraph.chain(2)
    rho0 = _vgmm(G, [(0.6, _g(-3.0, 1.0), 0), (0.4, _g(3.0, 0.5), 1)])
    rho1 = _vgmm(G, [(0.3, _g(2.0, 0.8), 0), (0.7, _g(-2.0, 1.2), 1)])
    return rho0, rho1


def _checks_two_channel(other_approach):
    def checks(rho0, rho1, run):
        out = _endpoint_checks(run)
        other = compute_distance(rho0, rho1, RunConfig(approach=other_approach))
        mine = sorted(_support(run))
        theirs = sorted((int(i), int(j)) for i, j in zip(*np.nonzero(other.plan.entries > 0)))
        out.append(Check(f"plan support matches approach {other_approach}", mine == theirs, f"{mine} vs {theirs}"))
        return out

    return checks


# 1-D, three channels: all mass moves from channel 0 to channel 2


def _three_channel_pair(graph):
    rho0 = _vgmm(graph, [(1.0, _g(0.0, 1.0), 0)])
    rho1 = _vgmm(graph, [(0.5, _g(-3.0, 0.5), 2), (0.5, _g(3.0, 0.5), 2)])
    return rho0, rho1


def _checks_chain(rho0, rho1, run):
    out = _endpoint_checks(run)
    mids = _channel_mass_over_time(run, 1)
    out.append(Check("intermediate steps carry channel-1 mass", all(m > 0 for m in mids), f"channel-1 mass {_fmt(mids)}"))
    raster = [float(f.channel_mass()[1]) for f in run.frames[1:-1]]
    out.append(Check("intermediate frames show channel-1 density", all(m > 0 for m in raster), f"{_fmt(raster)}"))
    return out


def _checks_full(rho0, rho1, run):
    out = _endpoint_checks(run)
    mids = _channel_mass_over_time(run, 1)
    out.append(Check("channel 1 is never used", all(m == 0 for m in mids), f"channel-1 mass {_fmt(mids)}"))
    return out


# 2-D, R-G-B chain, red and blue blobs swap places


def _swap_pair(graph=None):
    G = graph or ChannelGraph.chain(3)
    A, B = _g([-3.0, 0.0], 0.5), _g([3.0, 0.0], 0.5)
    rho0 = _vgmm(G, [(0.5, A, 0), (0.5, B, 2)])
    rho1 = _vgmm(G, [(0.5, B, 0), (0.5, A, 2)])
    return rho0, rho1


def _checks_gamma_large(rho0, rho1, run):
    out = _endpoint_checks(run)
    out.append(_same_channel_only(rho0, rho1, run))
    stay = all(p.is_node for s in run.states for p in s.positions)
    out.append(Check("every component stays on a single channel", stay))
    mids = _channel_mass_over_time(run, 1)
    out.append(Check("green channel stays empty", all(m == 0 for m in mids), f"green mass {_fmt(mids)}"))
    return out


def _checks_gamma_small(rho0, rho1, run):
    out = _endpoint_checks(run)
    out.append(_cross_channel_only(rho0, rho1, run))
    mids = _channel_mass_over_time(run, 1)
    out.append(Check("mass passes through green", all(m > 0 for m in mids), f"green mass {_fmt(mids)}"))
    return out


def _checks_approach0(rho0, rho1, run):
    out = _endpoint_checks(run)
    out.append(_cross_channel_only(rho0, rho1, run))
    out.append(Check("distance is zero", run.result.distance == 0.0, f"d = {run.result.distance!r}"))
    direct = all(p.is_node or {p.node_a, p.node_b} == {0, 2} for s in _interior(run) for p in s.positions)
    out.append(Check("components blend red and blue directly", direct))
    mids = _channel_mass_over_time(run, 1)
    out.append(Check("green channel stays empty", all(m == 0 for m in mids), f"green mass {_fmt(mids)}"))
    return out


# 2-D scalar unbalanced: mass 1.0 grows to 1.4


def _unbalanced_pair():
    mu0 = MixtureModel([0.5, 0.5], [_g([2.0, 1.0], 0.3), _g([2.0, -1.0], 0.3)])
    mu1 = MixtureModel([0.5, 0.5, 0.4], [_g([0.0, 1.0], 0.3), _g([0.0, -1.0], 0.3), _g([-4.0, 0.0], 0.5)])
    return mu0, mu1


def _checks_unbalanced(mu0, mu1, run):
    checks = []
    P = run.result.plan.entries
    n0 = len(mu0)
    src_targets = sorted(int(j) for j in np.flatnonzero(P[n0] > 0)) if run.result.source_side == "start" else []
    checks.append(Check("created mass feeds only the far component", src_targets == [2], f"source row targets {src_targets}"))
    data_ok = all(j == i for i, j in zip(*np.nonzero(P[:n0] > 0)))
    checks.append(Check("existing mass moves to its nearest target", data_ok))
    masses = [float(orig.mass) for orig, _ in run.states]
    ok_ends = abs(masses[0] - mu0.mass) <= MASS_TOL and abs(masses[-1] - mu1.mass) <= MASS_TOL
    checks.append(Check("endpoint masses match the inputs", ok_ends, f"{masses[0]!r} -> {masses[-1]!r}"))
    mono = all(b >= a - MASS_TOL for a, b in zip(masses, masses[1:]))
    checks.append(Check("data-layer mass grows monotonically", mono, _fmt(masses)))
    checks.append(Check("frame count", len(run.frames) == len(run.times), f"{len(run.frames)} frames"))
    return checks


def _fmt(xs):
    return "[" + ", ".join(f"{x:.4g}" for x in xs) + "]"


GRID_1D = "-8:8:400"
GRID_1D_NARROW = "-6:6:400"
GRID_2D = "-6:6:96,-3:3:48"


def _build():
    two = _two_channel_pair()
    chain = _three_channel_pair(ChannelGraph.chain(3))
    full = _three_channel_pair(ChannelGraph.complete(3))
    swap = _swap_pair()
    swap_full = _swap_pair(ChannelGraph.complete(3))
    table = [
        ("fig-1d-2ch-a1", "two channels, approach 1", two, {"approach": 1}, GRID_1D, _checks_two_channel(2)),
        ("fig-1d-2ch-a2", "two channels, approach 2", two, {"approach": 2}, GRID_1D, _checks_two_channel(1)),
        ("fig-1d-3ch-chain", "three channels on a chain", chain, {}, GRID_1D_NARROW, _checks_chain),
        ("fig-1d-3ch-full", "three fully connected channels", full, {}, GRID_1D_NARROW, _checks_full),
        ("fig-2d-gamma-large", "red/blue swap, large gamma", swap, {"gamma": 1e6}, GRID_2D, _checks_gamma_large),
        ("fig-2d-gamma-small", "red/blue swap, small gamma", swap, {"gamma": 1e-3}, GRID_2D, _checks_gamma_small),
        (
            "fig-unbalanced",
            "unbalanced scalar mixture, mass 1.0 to 1.4",
            _unbalanced_pair(),
            {"unbalanced": True, "gamma": 2.0},
            "-7:5:96,-3:3:48",
            _checks_unbalanced,
        ),
        ("fig-approach0-full", "red/blue swap, approach 0, complete graph", swap_full, {"approach": 0}, GRID_2D, _checks_approach0),
    ]
    return {name: Recipe(name, desc, pair[0], pair[1], cfg, grid, checks) for name, desc, pair, cfg, grid, checks in table}


RECIPES = _build()


def run_recipe(name: str, steps: int = 10, out=None):
    """Run a recipe; returns ``(run, checks)``. Frames and JSON go to ``out`` when given."""
    if name not in RECIPES:
        raise KeyError(name)
    rec = RECIPES[name]
    cfg = RunConfig(steps=steps, grid=GridSpec.parse(rec.grid), out=out, **rec.config)
    run = interpolate(rec.rho0, rec.rho1, cfg)
    render_run(rec.rho0, rec.rho1, cfg, run)
    return run, rec.checks(rec.rho0, rec.rho1, run)
