"""Distance / interpolation runs shared by the CLI commands and the figure recipes."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import InfeasibleError, ModelValidationError
from .gmm import gmm_distance, gmm_interpolate, unbalanced_gmm_distance, unbalanced_gmm_interpolate
from .io import dumps, model_to_json, result_to_json
from .models import MixtureModel, VectorMixtureModel
from .render import DensityGrid, GridSpec, auto_grid, rasterize, write_frames
from .transport import Infeasible
from .vector import unbalanced_vgmm_distance, unbalanced_vgmm_interpolate, vgmm_distance, vgmm_interpolate


@dataclass
class RunConfig:
    approach: int = 2
    gamma: float = 1.0
    gamma_source: float | None = None
    steps: int = 10
    unbalanced: bool = False
    seed: int = 0
    k: int = 10
    grid: GridSpec | None = None
    out: Path | None = None

    def __post_init__(self):
        if self.approach not in (0, 1, 2):
            raise ModelValidationError(f"approach must be 0, 1 or 2, got {self.approach}")
        if self.steps < 1:
            raise ModelValidationError("steps must be >= 1")
        if self.gamma < 0 or (self.gamma_source is not None and self.gamma_source < 0):
            raise ModelValidationError("gamma values must be non-negative")


@dataclass
class Interpolation:
    result: object
    times: list
    states: list  # MixtureModel, VectorInterpolant, or (original, source) pairs
    frames: list = field(default_factory=list)
    source_frames: list = field(default_factory=list)


def _kind(rho0, rho1):
    if isinstance(rho0, VectorMixtureModel) and isinstance(rho1, VectorMixtureModel):
        return "vector"
    if type(rho0) is MixtureModel and type(rho1) is MixtureModel:
        return "scalar"
    raise ModelValidationError("both inputs must be of the same type (gmm or vgmm)")


def compute_distance(rho0, rho1, cfg: RunConfig):
    """TransportResult, or Infeasible for approach 0."""
    kind = _kind(rho0, rho1)
    if kind == "scalar":
        if cfg.unbalanced:
            gamma = cfg.gamma if cfg.gamma_source is None else cfg.gamma_source
            return unbalanced_gmm_distance(rho0, rho1, gamma)
        return gmm_distance(rho0, rho1)
    if cfg.unbalanced:
        return unbalanced_vgmm_distance(rho0, rho1, cfg.gamma, cfg.gamma_source)
    return vgmm_distance(rho0, rho1, cfg.gamma, cfg.approach)


def interpolate(rho0, rho1, cfg: RunConfig, result=None) -> Interpolation:
    kind = _kind(rho0, rho1)
    if result is None:
        result = compute_distance(rho0, rho1, cfg)
    if isinstance(result, Infeasible):
        raise InfeasibleError(result.reason)
    times = [k / cfg.steps for k in range(cfg.steps + 1)]
    states = []
    for t in times:
        if kind == "scalar" and cfg.unbalanced:
            states.append(unbalanced_gmm_interpolate(rho0, rho1, None, t, result=result))
        elif kind == "scalar":
            states.append(gmm_interpolate(rho0, rho1, t, result=result))
        elif cfg.unbalanced:
            states.append(unbalanced_vgmm_interpolate(rho0, rho1, t=t, result=result))
        else:
            states.append(vgmm_interpolate(rho0, rho1, t, cfg.gamma, cfg.approach, result=result))
    return Interpolation(result, times, states)


def _grids_for(rho0, rho1, run: Interpolation, grid: GridSpec, unbalanced: bool):
    """Data-channel grids per step (endpoints rasterised from the inputs) and source-layer grids."""
    frames, sources = [], []
    last = len(run.states) - 1
    for k, state in enumerate(run.states):
        if isinstance(state, tuple):
            original, source = state
            data = rasterize(original, grid)
            src = rasterize(source, grid) if len(source) else _empty_like(data)
        elif unbalanced:
            full = rasterize(state, grid)
            S = state.source_channel
            data = _select(full, [c for c in range(full.channels.shape[0]) if c != S])
            src = _select(full, [S])
        else:
            data, src = rasterize(state, grid), None
        if k == 0:
            data = rasterize(rho0, grid)
        elif k == last:
            data = rasterize(rho1, grid)
        frames.append(data)
        if src is not None:
            sources.append(src)
    return frames, sources


def _select(g: DensityGrid, chans) -> DensityGrid:
    return DensityGrid(g.origin, g.spacing, g.shape, g.channels[chans])


def _empty_like(g: DensityGrid) -> DensityGrid:
    return DensityGrid(g.origin, g.spacing, g.shape, np.zeros((1,) + g.shape))


def state_json(state):
    if isinstance(state, tuple):
        return {"original": model_to_json(state[0]), "source": model_to_json(state[1])}
    return model_to_json(state)


def render_run(rho0, rho1, cfg: RunConfig, run: Interpolation):
    """Rasterise every step and, if ``cfg.out`` is set, write frames and per-step JSON."""
    grid = cfg.grid or auto_grid([rho0, rho1], rho0.dim)
    run.frames, run.source_frames = _grids_for(rho0, rho1, run, grid, cfg.unbalanced)
    if cfg.out is not None:
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        write_frames(run.frames, out, "frame")
        if run.source_frames:
            write_frames(run.source_frames, out, "source")
        for k, (t, state) in enumerate(zip(run.times, run.states)):
            doc = {"t": t, "model": state_json(state)}
            (out / f"step_{k:03d}.json").write_text(dumps(doc))
        (out / "distance.json").write_text(dumps(result_to_json(run.result)))
    return run
