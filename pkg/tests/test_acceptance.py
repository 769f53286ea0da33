"""Acceptance criteria 1-10, one test per criterion.

The terminal summary (see conftest.py) prints one PASS/FAIL line per criterion.
"""

import filecmp
import itertools
import subprocess
import sys
import time

import numpy as np
import pytest
from PIL import Image

from vgmmot import (
    ChannelGraph,
    Gaussian,
    MixtureModel,
    VectorMixtureModel,
    WeightedSamples,
    fit_gmm_em,
    fit_gmm_em_detailed,
    gmm_distance,
    gmm_interpolate,
    solve_transport,
    solve_transport_masked,
    unbalanced_gmm_distance,
    unbalanced_gmm_interpolate,
    unbalanced_vgmm_distance,
    unbalanced_vgmm_interpolate,
    vgmm_distance,
    vgmm_interpolate,
    w2_gaussian,
)
from vgmmot.cli import main
from vgmmot.io import save_model
from vgmmot.oracle import Grid1D, enumerate_transport_vertices, mask_feasible, w2_1d_quantile
from vgmmot.render import GridSpec, rasterize
from vgmmot.transport import Infeasible

from helpers import g1, rand_gmm, rand_graph, rand_vgmm

GRID = (0.0, 0.25, 0.5, 0.75, 1.0)


@pytest.mark.criterion(1, "closed-form Gaussian W2 vs quantile grid oracle (1%, <5 s)")
def test_criterion_01_gaussian_w2_vs_grid_oracle():
    rng = np.random.default_rng(101)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        m = rng.uniform(-5, 5, 2)
        v = rng.uniform(0.25, 4, 2)
        grids = []
        for mk, vk in zip(m, v):
            sd = np.sqrt(vk)
            grids.append(Grid1D.from_density(lambda x, mk=mk, vk=vk: np.exp(-((x - mk) ** 2) / (2 * vk)), mk - 8 * sd, mk + 8 * sd, 2000))
        exact = w2_gaussian(g1(m[0], v[0]), g1(m[1], v[1]))
        oracle = w2_1d_quantile(*grids)
        worst = max(worst, abs(exact - oracle) / max(oracle, 1e-300))
    elapsed = time.perf_counter() - start
    assert worst <= 0.01, f"worst relative error {worst:.3g}"
    assert elapsed < 5.0, f"took {elapsed:.2f} s"


@pytest.mark.criterion(2, "transport LP vs vertex enumeration and max-flow (1e-9, <10 s)")
def test_criterion_02_lp_vs_oracles():
    rng = np.random.default_rng(202)
    start = time.perf_counter()
    masked_seen = infeasible_seen = 0
    for k in range(200):
        n0, n1 = rng.integers(1, 5, 2)
        if k % 3 == 0:
            # small-integer weights make ties and degenerate bases common
            a = rng.integers(1, 4, n0).astype(float)
            b = rng.integers(1, 4, n1).astype(float)
            a, b = a / a.sum(), b / b.sum()
            C = rng.integers(0, 3, (n0, n1)).astype(float)
        else:
            a, b = rng.dirichlet(np.ones(n0)), rng.dirichlet(np.ones(n1))
            C = rng.random((n0, n1)) * 10
        if k % 2:
            masked_seen += 1
            mask = rng.random((n0, n1)) < 0.6
            sol = solve_transport_masked(C, a, b, mask)
            feasible = mask_feasible(a, b, mask)
            assert isinstance(sol, Infeasible) == (not feasible), f"instance {k}: feasibility disagrees"
            if not feasible:
                infeasible_seen += 1
                continue
            ref = enumerate_transport_vertices(C, a, b, mask)
        else:
            sol = solve_transport(C, a, b)
            ref = enumerate_transport_vertices(C, a, b)
        assert abs(sol.value - ref) <= 1e-9, f"instance {k}: {sol.value!r} vs {ref!r}"
    elapsed = time.perf_counter() - start
    assert masked_seen == 100 and 0 < infeasible_seen < masked_seen
    assert elapsed < 10.0, f"took {elapsed:.2f} s"


def _triangle_ok(d, x, y, z, tol):
    dxy, dyz, dxz = d(x, y), d(y, z), d(x, z)
    return all(
        [dxz <= dxy + dyz + tol, dxy <= dxz + dyz + tol, dyz <= dxy + dxz + tol, min(dxy, dyz, dxz) >= 0]
    )


@pytest.mark.criterion(3, "metric axioms for d, d_V1, d_V2; pseudo-metric d_V0")
def test_criterion_03_metric_axioms():
    rng = np.random.default_rng(303)
    feasible_v0 = 0
    for _ in range(100):
        dim = int(rng.integers(1, 4))
        M = int(rng.integers(1, 5))
        G = rand_graph(rng, M)
        gamma = float(rng.uniform(0.1, 3.0))
        scalar = [rand_gmm(rng, dim, int(rng.integers(1, 6))) for _ in range(3)]
        vector = [rand_vgmm(rng, G, dim, int(rng.integers(1, 6))) for _ in range(3)]

        def d(x, y):
            return gmm_distance(x, y).distance

        def dv(approach):
            return lambda x, y: vgmm_distance(x, y, gamma, approach).distance

        for dist, models in [(d, scalar), (dv(1), vector), (dv(2), vector)]:
            for x, y in itertools.combinations(models, 2):
                assert abs(dist(x, y) - dist(y, x)) <= 1e-9
            assert _triangle_ok(dist, *models, 1e-7)

        results = {(i, j): vgmm_distance(vector[i], vector[j], approach=0) for i, j in itertools.permutations(range(3), 2)}
        if all(not isinstance(r, Infeasible) for r in results.values()):
            feasible_v0 += 1
            assert _triangle_ok(lambda x, y: results[(vector.index(x), vector.index(y))].distance, *vector, 1e-7)
    assert feasible_v0 > 0

    # channel permutation on the complete graph: distinct models at pseudo-distance zero
    K3 = ChannelGraph.complete(3)
    A, B = Gaussian([-3.0, 0.0], 0.5 * np.eye(2)), Gaussian([3.0, 0.0], 0.5 * np.eye(2))
    rho0 = VectorMixtureModel(K3, [0.5, 0.5], [A, B], [0, 2])
    rho1 = VectorMixtureModel(K3, [0.5, 0.5], [B, A], [0, 2])
    assert not rho0.same_distribution(rho1)
    assert vgmm_distance(rho0, rho1, approach=0).distance == 0.0


@pytest.mark.criterion(4, "geodesic linearity d(rho_s, rho_t) = (t-s) d(rho_0, rho_1) (1e-6)")
def test_criterion_04_geodesic_linearity():
    rng = np.random.default_rng(404)
    pairs = [(s, t) for s in GRID for t in GRID if s < t]
    for _ in range(20):
        dim = int(rng.integers(1, 4))
        mu0, mu1 = rand_gmm(rng, dim, int(rng.integers(1, 5))), rand_gmm(rng, dim, int(rng.integers(1, 5)))
        r = gmm_distance(mu0, mu1)
        at = {t: gmm_interpolate(mu0, mu1, t, result=r) for t in GRID}
        for s, t in pairs:
            assert abs(gmm_distance(at[s], at[t]).distance - (t - s) * r.distance) <= 1e-6

        G = rand_graph(rng, int(rng.integers(2, 6)))
        gamma = float(rng.uniform(0.1, 3.0))
        rho0, rho1 = rand_vgmm(rng, G, dim, int(rng.integers(1, 5))), rand_vgmm(rng, G, dim, int(rng.integers(1, 5)))
        for approach in (1, 2):
            r = vgmm_distance(rho0, rho1, gamma, approach)
            at = {t: vgmm_interpolate(rho0, rho1, t, gamma, approach, result=r) for t in GRID}
            for s, t in pairs:
                got = vgmm_distance(at[s], at[t], gamma, approach).distance
                assert abs(got - (t - s) * r.distance) <= 1e-6, (approach, s, t, got, r.distance)


@pytest.mark.criterion(5, "chain end-to-end transfer: infeasible under approach 0, finite under 1 and 2; CLI exit 3 vs 0")
def test_criterion_05_chain_infeasibility(tmp_path):
    G = ChannelGraph.chain(3)
    rho0 = VectorMixtureModel(G, [1.0], [g1(0)], [0])
    rho1 = VectorMixtureModel(G, [1.0], [g1(0)], [2])
    assert isinstance(vgmm_distance(rho0, rho1, approach=0), Infeasible)
    for approach in (1, 2):
        assert np.isfinite(vgmm_distance(rho0, rho1, 1.0, approach).distance)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    save_model(a, rho0)
    save_model(b, rho1)
    assert main(["distance", str(a), str(b), "--approach", "0"]) == 3
    assert main(["distance", str(a), str(b), "--approach", "2"]) == 0


@pytest.mark.criterion(6, "root-sum-square triangle inequality on 1e5 random vectors")
def test_criterion_06_root_sum_square_inequality():
    rng = np.random.default_rng(606)
    violations = 0
    total = 0
    for n in range(1, 9):
        count = 12_500
        scale = 10.0 ** rng.uniform(-3, 3, (count, 1, 1))
        a, b, c, d = rng.normal(size=(4, count, n)) * scale[None, :, :, 0]
        lhs = np.sqrt(np.sum((a + b) ** 2 + (c + d) ** 2, axis=1))
        rhs = np.sqrt(np.sum(a**2 + c**2, axis=1)) + np.sqrt(np.sum(b**2 + d**2, axis=1))
        violations += int(np.sum(lhs - rhs > 1e-12 * np.maximum(1.0, rhs)))
        total += count
    assert total == 100_000
    assert violations == 0


def _swap_fixture():
    G = ChannelGraph.chain(3)  # R - G - B
    A, B = Gaussian([-3.0, 0.0], 0.5 * np.eye(2)), Gaussian([3.0, 0.0], 0.5 * np.eye(2))
    return VectorMixtureModel(G, [0.5, 0.5], [A, B], [0, 2]), VectorMixtureModel(G, [0.5, 0.5], [B, A], [0, 2])


@pytest.mark.criterion(7, "gamma routing on the red/blue swap: large stays in channel, small crosses via green")
def test_criterion_07_gamma_routing():
    rho0, rho1 = _swap_fixture()
    support = lambda r: list(zip(*np.nonzero(r.plan.entries > 0)))  # noqa: E731

    big = vgmm_distance(rho0, rho1, 1e6, 2)
    assert support(big) and all(rho0.channels[i] == rho1.channels[j] for i, j in support(big))

    small = vgmm_distance(rho0, rho1, 1e-3, 2)
    assert support(small) and all(rho0.channels[i] != rho1.channels[j] for i, j in support(small))
    grid = GridSpec.parse("-6:6:96,-3:3:48")
    for t in GRID[1:-1]:
        mid = vgmm_interpolate(rho0, rho1, t, 1e-3, 2, result=small)
        assert all(1 in (p.node_a, p.node_b) for p in mid.positions)
        assert mid.channel_masses()[1] > 0
        assert rasterize(mid, grid).channel_mass()[1] > 0


@pytest.mark.criterion(8, "unbalanced 1.0 -> 0.6 bookkeeping and single-channel vector equivalence")
def test_criterion_08_unbalanced_bookkeeping():
    mu0, mu1 = MixtureModel([1.0], [g1(0)]), MixtureModel([0.6], [g1(0)])
    r = unbalanced_gmm_distance(mu0, mu1, 2.0)
    assert abs(r.distance**2 - 0.8) <= 1e-12
    orig0, _ = unbalanced_gmm_interpolate(mu0, mu1, 2.0, 0.0, result=r)
    orig1, src1 = unbalanced_gmm_interpolate(mu0, mu1, 2.0, 1.0, result=r)
    assert abs(orig0.mass - 1.0) <= 1e-9 and abs(orig1.mass - 0.6) <= 1e-9
    assert abs(src1.mass - 0.4) <= 1e-9

    G = ChannelGraph(1)
    v0 = VectorMixtureModel(G, mu0.weights, mu0.gaussians, [0])
    v1 = VectorMixtureModel(G, mu1.weights, mu1.gaussians, [0])
    rv = unbalanced_vgmm_distance(v0, v1, gamma=1.0, gamma_source=2.0)
    assert abs(rv.distance - r.distance) <= 1e-9
    for t in GRID:
        scalar_orig, _ = unbalanced_gmm_interpolate(mu0, mu1, 2.0, t, result=r)
        vec = unbalanced_vgmm_interpolate(v0, v1, t=t, result=rv)
        assert abs(vec.original_mass() - scalar_orig.mass) <= 1e-9
    assert abs(unbalanced_vgmm_interpolate(v0, v1, t=0.0, result=rv).original_mass() - 1.0) <= 1e-9
    assert abs(unbalanced_vgmm_interpolate(v0, v1, t=1.0, result=rv).original_mass() - 0.6) <= 1e-9

    rng = np.random.default_rng(808)
    for _ in range(20):
        a = rand_gmm(rng, 2, int(rng.integers(1, 4)), mass=float(rng.uniform(0.3, 2)))
        b = rand_gmm(rng, 2, int(rng.integers(1, 4)), mass=float(rng.uniform(0.3, 2)))
        gamma = float(rng.uniform(0.1, 5))
        va = VectorMixtureModel(G, a.weights, a.gaussians, [0] * len(a))
        vb = VectorMixtureModel(G, b.weights, b.gaussians, [0] * len(b))
        assert abs(unbalanced_gmm_distance(a, b, gamma).distance - unbalanced_vgmm_distance(va, vb, 1.0, gamma).distance) <= 1e-9


@pytest.mark.criterion(9, "EM log-likelihood monotone over 20 fits; k=1 matches weighted moments (1e-8)")
def test_criterion_09_em():
    rng = np.random.default_rng(909)
    for seed in range(20):
        dim = 1 + seed % 3
        centres = rng.uniform(-5, 5, (3, dim))
        X = np.concatenate([rng.normal(c, rng.uniform(0.3, 1.5), (150, dim)) for c in centres])
        data = WeightedSamples(X, rng.uniform(0.05, 1.0, len(X)))
        res = fit_gmm_em_detailed(data, int(rng.integers(2, 6)), seed=seed)
        ll = np.array(res.log_likelihood)
        assert len(ll) >= 2
        assert np.all(np.diff(ll) >= 0.0), f"fit {seed}: log-likelihood decreased by {-np.diff(ll).min():.3g}"

        model = fit_gmm_em(data, 1, seed=seed)
        mean, cov = data.moments()
        assert np.max(np.abs(model.gaussians[0].mean - mean)) <= 1e-8
        assert np.max(np.abs(model.gaussians[0].cov - cov)) <= 1e-8


def _run_cli(args, cwd):
    return subprocess.run([sys.executable, "-m", "vgmmot.cli", *args], cwd=cwd, capture_output=True, text=True)


def _same_tree(a, b):
    cmp = filecmp.dircmp(a, b)
    if cmp.left_only or cmp.right_only:
        return False
    files = sorted(p.name for p in a.iterdir())
    match, mismatch, errors = filecmp.cmpfiles(a, b, files, shallow=False)
    return not mismatch and not errors and len(match) == len(files)


@pytest.mark.criterion(10, "repeated CLI runs give byte-identical JSON and PPM outputs")
def test_criterion_10_cli_determinism(tmp_path):
    rng = np.random.default_rng(1010)
    arr = np.zeros((24, 24, 3), np.uint8)
    arr[..., 0] = (255 * rng.random((24, 24)) ** 4).astype(np.uint8)
    arr[4:12, 10:20, 2] = 180
    Image.fromarray(arr).save(tmp_path / "img.png")
    G = ChannelGraph.chain(3)
    save_model(tmp_path / "a.json", rand_vgmm(rng, G, 2, 3))
    save_model(tmp_path / "b.json", rand_vgmm(rng, G, 2, 4))

    runs = [
        ["interpolate", "a.json", "b.json", "--steps", "5", "--grid=-6:6:48,-5:5:40", "--gamma", "0.7"],
        ["distance", "a.json", "b.json", "--approach", "1"],
        ["fit", "img.png", "--k", "3", "--seed", "7"],
        ["interpolate", "img.png", "img.png", "--fit", "--k", "2", "--seed", "3", "--steps", "3"],
        ["repro", "fig-unbalanced", "--steps", "4"],
    ]
    for k, args in enumerate(runs):
        outs = []
        for rep in range(2):
            out = tmp_path / f"run{k}_{rep}"
            proc = _run_cli([*args, "--out", str(out)], tmp_path)
            assert proc.returncode == 0, proc.stderr
            outs.append(out)
        assert any(outs[0].iterdir())
        assert _same_tree(*outs), f"outputs of {args[0]} differ between runs"
