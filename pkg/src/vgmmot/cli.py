"""``vgmmot`` command line: fit, distance, interpolate, render, repro.

Exit codes: 0 success, 1 failed recipe check, 2 input error, 3 infeasible, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .errors import InfeasibleError, ModelValidationError, NumericalError, VGMMError
from .fit import fit_image
from .io import dumps, load_model, result_to_json, save_model
from .pipeline import RunConfig, compute_distance, interpolate, render_run
from .recipes import RECIPES, run_recipe
from .render import GridSpec, auto_grid, rasterize, write_frames
from .transport import Infeasible

INFEASIBLE_MESSAGE = "infeasible under graph restriction"


def _grid(text):
    try:
        return GridSpec.parse(text)
    except ModelValidationError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _nonneg(text):
    x = float(text)
    if not x >= 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative number, got {text}")
    return x


def _positive_int(text):
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return n


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--approach", type=int, choices=(0, 1, 2), default=2)
    common.add_argument("--gamma", type=_nonneg, default=1.0)
    common.add_argument("--gamma-source", type=_nonneg, default=None)
    common.add_argument("--steps", type=_positive_int, default=10)
    common.add_argument("--unbalanced", action="store_true")
    common.add_argument("--fit", action="store_true", help="inputs are images; fit a vector mixture to each")
    common.add_argument("--k", type=_positive_int, default=10, help="components per channel when fitting")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--grid", type=_grid, default=None, help='"x0:x1:nx[,y0:y1:ny]"')
    common.add_argument("--out", type=Path, default=None)

    parser = argparse.ArgumentParser(prog="vgmmot", description="Optimal transport between (vector) Gaussian mixtures.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("distance", parents=[common], help="distance and optimal plan between two models")
    p.add_argument("inputs", nargs=2, type=Path)
    p = sub.add_parser("interpolate", parents=[common], help="frames and per-step models along the geodesic")
    p.add_argument("inputs", nargs=2, type=Path)
    p = sub.add_parser("fit", parents=[common], help="fit a vector mixture to an image")
    p.add_argument("image", type=Path)
    p = sub.add_parser("render", parents=[common], help="rasterise one model to a frame")
    p.add_argument("model", type=Path)
    p = sub.add_parser("repro", parents=[common], help="run a named experiment recipe")
    p.add_argument("name", choices=sorted(RECIPES))
    return parser


def _config(args) -> RunConfig:
    return RunConfig(
        approach=args.approach,
        gamma=args.gamma,
        gamma_source=args.gamma_source,
        steps=args.steps,
        unbalanced=args.unbalanced,
        seed=args.seed,
        k=args.k,
        grid=args.grid,
        out=args.out,
    )


def _load_inputs(args):
    if args.fit:
        return [fit_image(p, k=args.k, seed=args.seed, balanced=not args.unbalanced) for p in args.inputs]
    return [load_model(p, balanced=not args.unbalanced) for p in args.inputs]


def cmd_distance(args) -> int:
    rho0, rho1 = _load_inputs(args)
    result = compute_distance(rho0, rho1, _config(args))
    if isinstance(result, Infeasible):
        raise InfeasibleError(result.reason)
    print(f"distance: {result.distance!r}")
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "distance.json").write_text(dumps(result_to_json(result)))
    return 0


def cmd_interpolate(args) -> int:
    rho0, rho1 = _load_inputs(args)
    cfg = _config(args)
    if cfg.out is None:
        cfg.out = Path("frames")
    run = interpolate(rho0, rho1, cfg)
    render_run(rho0, rho1, cfg, run)
    print(f"distance: {run.result.distance!r}")
    print(f"wrote {len(run.frames)} frames to {cfg.out}")
    return 0


def cmd_fit(args) -> int:
    model = fit_image(args.image, k=args.k, seed=args.seed, balanced=not args.unbalanced)
    out = args.out or Path(".")
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{args.image.stem}.json"
    save_model(path, model)
    print(f"wrote {path} ({len(model)} components)")
    return 0


def cmd_render(args) -> int:
    model = load_model(args.model)
    grid = args.grid or auto_grid([model], model.dim)
    out = args.out or Path(".")
    paths = write_frames([rasterize(model, grid)], out)
    print(f"wrote {paths[0]}")
    return 0


def cmd_repro(args) -> int:
    out = args.out or Path(args.name)
    run, checks = run_recipe(args.name, steps=args.steps, out=out)
    report = {
        "recipe": args.name,
        "description": RECIPES[args.name].description,
        "distance": run.result.distance,
        "passed": all(c.passed for c in checks),
        "checks": [c.to_json() for c in checks],
    }
    (out / "report.json").write_text(dumps(report))
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}" + (f": {c.detail}" if c.detail else ""))
    return 0 if report["passed"] else 1


COMMANDS = {
    "distance": cmd_distance,
    "interpolate": cmd_interpolate,
    "fit": cmd_fit,
    "render": cmd_render,
    "repro": cmd_repro,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except InfeasibleError:
        print(f"error: {INFEASIBLE_MESSAGE}", file=sys.stderr)
        return InfeasibleError.exit_code
    except VGMMError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except np.linalg.LinAlgError as exc:
        print(f"error: numerical failure: {exc}", file=sys.stderr)
        return NumericalError.exit_code


if __name__ == "__main__":
    sys.exit(main())
