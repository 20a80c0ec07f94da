"""Numerical counterexample search by multi-restart projected descent.

Both objectives are homogeneous in each block, so the blocks are confined
to unit Frobenius spheres (an unconstrained infimum would be 0 or run off
to -infinity along any violating ray); the block-mixing invariance means
this costs no generality.  Minimization is projected gradient descent on
the real parameterization of every entry, with a central finite-difference
gradient by default (an analytic gradient sits behind the same switch and
is validated against differences in the test suite), a halving
backtracking line search that only ever accepts strict decreases, and a
stall cutoff.

Determinism contract: a SearchConfig fixes the result bit-for-bit.
Per-restart seeds are derived from (seed, restart index), restarts never
share state, and the aggregation is ordered by restart index, so thread
counts cannot change any reported number.  Found minima are infima-found,
never global claims.
"""

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from ._kernels import PhiPlan
from .cbs import (
    DEFAULT_BUDGET,
    CbsInput,
    cbs_input_from_json,
    cbs_input_to_json,
    phi,
    weighted_total,
    weights_by_mask,
    work_estimate,
)
from .hypermatrix import (
    BudgetExceededError,
    DimVector,
    Hypermatrix,
    as_dims,
)
from .quantum import ProductBasisLayout, SchmidtRank2Spec

CANDIDATE_THRESHOLD = -1e-6


@dataclass(frozen=True)
class SearchConfig:
    dims: DimVector
    n: int
    restarts: int = 100
    max_iters: int = 2000
    step_init: float = 0.5
    grad_eps: float = 1e-6
    seed: int = 0
    normalization: str = "per-block-unit-sphere"
    gradient: str = "fd"
    budget: int = DEFAULT_BUDGET
    stall_window: int = 10
    stall_tol: float = 1e-12

    def __post_init__(self):
        object.__setattr__(self, "dims", as_dims(self.dims))
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.restarts < 1 or self.max_iters < 1:
            raise ValueError("restarts and max_iters must be >= 1")
        if self.step_init <= 0:
            raise ValueError("step_init must be positive")
        if not 1e-8 <= self.grad_eps <= 1e-4:
            raise ValueError("grad_eps must lie in [1e-8, 1e-4]")
        if self.normalization != "per-block-unit-sphere":
            raise ValueError(f"unknown normalization {self.normalization!r}")
        if self.gradient not in ("fd", "analytic"):
            raise ValueError(f"unknown gradient mode {self.gradient!r}")


@dataclass(frozen=True)
class RestartRecord:
    final_value: float
    iterations: int
    converged: bool
    aborted: bool = False


@dataclass(frozen=True)
class SearchResult:
    best_value: float
    best_input: CbsInput
    per_restart: tuple
    wall_time: float


@dataclass(frozen=True)
class ExpectationSearchResult:
    best_value: float
    best_spec: SchmidtRank2Spec
    per_restart: tuple
    wall_time: float


def _restart_seed(seed: int, index) -> np.random.Generator:
    ss = np.random.SeedSequence((seed, *np.atleast_1d(index)))
    return np.random.Generator(np.random.PCG64(ss))


def _unit_rows(rng: np.random.Generator, rows: int, dim: int) -> np.ndarray:
    z = rng.standard_normal((rows, dim)) + 1j * rng.standard_normal((rows, dim))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def _project(z: np.ndarray):
    norms = np.linalg.norm(z, axis=1, keepdims=True)
    if np.any(norms < 1e-150):
        return None
    return z / norms


def _descend(z0, objective, gradient, config: SearchConfig):
    """Projected descent from the feasible point z0.  Returns
    (z, value, iterations, converged, aborted)."""
    z = z0
    f = objective(z)
    if not math.isfinite(f):
        return z, f, 0, False, True
    history = [f]
    for it in range(1, config.max_iters + 1):
        g = gradient(z)
        alpha = config.step_init
        accepted = False
        while alpha > 1e-18:
            cand = _project(z - alpha * g)
            if cand is None:
                return z, f, it, False, True
            f_new = objective(cand)
            if not math.isfinite(f_new):
                return z, f, it, False, True
            if f_new < f:
                z, f = cand, f_new
                accepted = True
                break
            alpha *= 0.5
        if not accepted:
            # no decrease at any step length: stationary at this resolution
            return z, f, it, True, False
        history.append(f)
        if len(history) > config.stall_window:
            ref = history[-config.stall_window - 1]
            if ref - f < config.stall_tol * max(1.0, abs(ref)):
                return z, f, it, True, False
    return z, f, config.max_iters, False, False


def _run_indexed(worker, indices, threads):
    """Run independent restart workers, aggregating in index order."""
    if threads <= 1:
        return [worker(i) for i in indices]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, indices))


def minimize_phi(config: SearchConfig, threads: int = 1) -> SearchResult:
    """Minimize the functional over 2n unit-sphere blocks of the given
    shape, with `restarts` independent descents."""
    dims = config.dims
    if work_estimate(dims, config.n) > config.budget:
        raise BudgetExceededError(
            f"per-evaluation work at {tuple(dims)}, n={config.n} exceeds budget"
        )
    plan = PhiPlan(tuple(dims))
    weights = weights_by_mask(dims.m, config.n)
    n, D = config.n, dims.size

    def objective(z):
        return weighted_total(dims.m, n, plan.values(z[:n], z[n:]))

    if config.gradient == "analytic":
        def gradient(z):
            _, gx, gu = plan.cogradients(weights, z[:n], z[n:])
            return 2.0 * np.concatenate([gx, gu], axis=0)
    else:
        def gradient(z):
            gx, gu = plan.fd_gradient(weights, z[:n], z[n:], config.grad_eps)
            g = np.concatenate([gx, gu], axis=0)
            return g[..., 0] + 1j * g[..., 1]

    def worker(r):
        rng = _restart_seed(config.seed, r)
        z0 = _unit_rows(rng, 2 * n, D)
        return _descend(z0, objective, gradient, config)

    t0 = time.perf_counter()
    outcomes = _run_indexed(worker, range(config.restarts), threads)
    records = []
    best = None
    for z, f, iters, converged, aborted in outcomes:
        records.append(RestartRecord(final_value=f, iterations=iters,
                                     converged=converged, aborted=aborted))
        if not aborted and (best is None or f < best[1]):
            best = (z, f)
    if best is None:
        raise ArithmeticError("every restart aborted on a non-finite objective")
    z_best, f_best = best
    best_input = CbsInput(
        xs=tuple(Hypermatrix(dims, z_best[k]) for k in range(n)),
        us=tuple(Hypermatrix(dims, z_best[n + k]) for k in range(n)),
    )
    return SearchResult(
        best_value=f_best,
        best_input=best_input,
        per_restart=tuple(records),
        wall_time=time.perf_counter() - t0,
    )


def minimize_expectation(op, dims, config: SearchConfig, threads: int = 1) -> ExpectationSearchResult:
    """Minimize <psi| op |psi> / <psi|psi> over rank-2 vectors built from
    four unit-sphere blocks (x, y, u, v) of the given shape."""
    dims = as_dims(dims)
    layout = ProductBasisLayout(dims)
    op = np.asarray(op, dtype=np.complex128)
    if op.shape != (layout.total_dim, layout.total_dim):
        raise ValueError(f"operator must be {layout.total_dim}x{layout.total_dim}")
    if np.linalg.norm(op - op.conj().T) > 1e-12 * max(1.0, np.linalg.norm(op)):
        raise ValueError("operator must be Hermitian")
    D = dims.size
    # Conjugate the operator by the interleave permutation once, so the
    # objective works directly on raveled coefficient matrices.
    perm = layout.from_coefficient_matrix(
        np.arange(D * D, dtype=np.float64).reshape(D, D)
    ).real.astype(np.int64)
    G = np.empty_like(op)
    G[np.ix_(perm, perm)] = op

    def amplitudes(z):
        return (np.outer(z[0], z[2]) + np.outer(z[1], z[3])).reshape(-1)

    def objective(z):
        c = amplitudes(z)
        nrm2 = float(np.real(np.vdot(c, c)))
        if nrm2 < 1e-28:
            return math.nan
        return float(np.real(np.vdot(c, G @ c))) / nrm2

    def analytic_gradient(z):
        c = amplitudes(z)
        nrm2 = float(np.real(np.vdot(c, c)))
        if nrm2 < 1e-28:
            return np.full_like(z, np.nan)
        h = G @ c
        f = float(np.real(np.vdot(c, h))) / nrm2
        W = ((h - f * c) / nrm2).reshape(D, D)
        gx = W @ np.conj(z[2])
        gy = W @ np.conj(z[3])
        gu = W.T @ np.conj(z[0])
        gv = W.T @ np.conj(z[1])
        return 2.0 * np.stack([gx, gy, gu, gv])

    def fd_gradient(z):
        eps = config.grad_eps
        g = np.empty_like(z)
        work = np.array(z)
        for b in range(4):
            for e in range(D):
                orig = work[b, e]
                work[b, e] = orig + eps
                f_p = objective(work)
                work[b, e] = orig - eps
                f_m = objective(work)
                g_re = (f_p - f_m) / (2 * eps)
                work[b, e] = orig + 1j * eps
                f_p = objective(work)
                work[b, e] = orig - 1j * eps
                f_m = objective(work)
                g_im = (f_p - f_m) / (2 * eps)
                work[b, e] = orig
                g[b, e] = g_re + 1j * g_im
        return g

    gradient = analytic_gradient if config.gradient == "analytic" else fd_gradient

    def worker(r):
        rng = _restart_seed(config.seed, r)
        z0 = _unit_rows(rng, 4, D)
        return _descend(z0, objective, gradient, config)

    t0 = time.perf_counter()
    outcomes = _run_indexed(worker, range(config.restarts), threads)
    records = []
    best = None
    for z, f, iters, converged, aborted in outcomes:
        records.append(RestartRecord(final_value=f, iterations=iters,
                                     converged=converged, aborted=aborted))
        if not aborted and (best is None or f < best[1]):
            best = (z, f)
    if best is None:
        raise ArithmeticError("every restart aborted on a degenerate vector")
    z_best, f_best = best
    spec = SchmidtRank2Spec(
        x=Hypermatrix(dims, z_best[0]), y=Hypermatrix(dims, z_best[1]),
        u=Hypermatrix(dims, z_best[2]), v=Hypermatrix(dims, z_best[3]),
    )
    return ExpectationSearchResult(
        best_value=f_best,
        best_spec=spec,
        per_restart=tuple(records),
        wall_time=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# campaigns
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CellResult:
    dims: tuple
    n: int
    best_value: float
    candidate: bool
    converged_restarts: int
    aborted_restarts: int
    wall_time: float
    candidate_file: str = ""
    reverified_value: float = math.nan
    error: str = ""


@dataclass(frozen=True)
class CampaignReport:
    cells: tuple
    candidates: tuple
    wall_time: float


def campaign(cells, template: SearchConfig, out_dir=None, threads: int = 1,
             candidate_threshold: float = CANDIDATE_THRESHOLD) -> CampaignReport:
    """Run minimize_phi over a grid of (dims, n) cells.

    Any best value below the candidate threshold is flagged as a CANDIDATE
    COUNTEREXAMPLE: its input is serialized for independent re-checking and
    immediately re-loaded and re-evaluated through the plain functional
    path.  Per-cell failures are recorded, not raised.
    """
    import json
    import os

    t0 = time.perf_counter()
    results = []
    candidates = []
    for idx, (dims, n) in enumerate(cells):
        dims = as_dims(dims)
        cell_seed = int(np.random.SeedSequence((template.seed, idx)).generate_state(1)[0])
        config = replace(template, dims=dims, n=int(n), seed=cell_seed)
        try:
            res = minimize_phi(config, threads=threads)
        except BudgetExceededError as exc:
            results.append(CellResult(dims=tuple(dims), n=int(n), best_value=math.nan,
                                      candidate=False, converged_restarts=0,
                                      aborted_restarts=0, wall_time=0.0, error=str(exc)))
            continue
        flagged = res.best_value < candidate_threshold
        path = ""
        reverified = math.nan
        if flagged:
            record = {
                "dims": list(dims), "n": int(n), "seed": cell_seed,
                "best_value": res.best_value,
                "input": cbs_input_to_json(res.best_input),
            }
            if out_dir is not None:
                os.makedirs(out_dir, exist_ok=True)
                path = os.path.join(
                    out_dir, f"candidate_{'x'.join(map(str, dims))}_n{n}.json")
                with open(path, "w") as fh:
                    json.dump(record, fh)
                reloaded = cbs_input_from_json(record["input"])
            else:
                reloaded = cbs_input_from_json(
                    json.loads(json.dumps(record))["input"])
            reverified = phi(reloaded).total
            candidates.append((tuple(dims), int(n), res.best_value, path))
        results.append(CellResult(
            dims=tuple(dims), n=int(n), best_value=res.best_value, candidate=flagged,
            converged_restarts=sum(1 for r in res.per_restart if r.converged),
            aborted_restarts=sum(1 for r in res.per_restart if r.aborted),
            wall_time=res.wall_time, candidate_file=path, reverified_value=reverified,
        ))
    return CampaignReport(cells=tuple(results), candidates=tuple(candidates),
                          wall_time=time.perf_counter() - t0)
