"""Monte Carlo experiments: increment variance on the torus and annulus
circuit probabilities in boxes with 0/1 boundary."""

from concurrent.futures import ProcessPoolExecutor
import math

import numpy as np
from scipy import stats

from . import heights as H
from .events import Pred, circuit, crossing
from .lattice import annulus, box, torus
from .mcmc import BatchMeans, ChainState


def log_spaced(N):
    """Powers of two from 2 up to N/4."""
    out, d = [], 2
    while d <= N // 4:
        out.append(d)
        d *= 2
    return out


def _pool_map(fn, jobs, threads):
    if threads and threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(fn, jobs))
    return [fn(j) for j in jobs]


# variance on the torus

def increment_observables(grid, distances):
    """Translation- and axis-averaged (h(x+d e) - h(x))^2 and h(x+d e) - h(x)."""
    sq, lin = [], []
    for d in distances:
        a = np.roll(grid, -d, axis=0) - grid
        b = np.roll(grid, -d, axis=1) - grid
        sq.append(0.5 * (np.mean(a * a) + np.mean(b * b)))
        lin.append(0.5 * (np.mean(a[:1]) + np.mean(b[:, :1])))
    return sq, lin


def _variance_chain(job):
    N, c, distances, seed, chain_id, burnin, sweeps, batches = job
    D = torus(N)
    chain = ChainState(D, H.checkerboard(D), c, seed=seed, chain_id=chain_id)
    chain.run(burnin)
    bsize = max(1, sweeps // batches)
    sq = [BatchMeans(bsize) for _ in distances]
    lin = [BatchMeans(bsize) for _ in distances]
    diff = BatchMeans(bsize)
    for _ in range(sweeps):
        chain.sweep()
        s, l = increment_observables(chain.h.reshape(N, N), distances)
        for e, v in zip(sq, s):
            e.add(v)
        for e, v in zip(lin, l):
            e.add(v)
        diff.add(s[-1] - s[-2] if len(s) > 1 else 0.0)
    return sq, lin, diff


def fit_log(distances, values):
    """Least-squares V(d) = a + b log d; returns (a, b, b_stderr, r2)."""
    r = stats.linregress(np.log(distances), values)
    return r.intercept, r.slope, r.stderr, r.rvalue ** 2


def variance_experiment(N, c, distances=None, seed=0, burnin=2000, sweeps=20000,
                        batches=40, chains=1, threads=1):
    """Estimate V(d) = E[(h(x) - h(y))^2] at lattice distance d along the axes.

    Returns ``(rows, fit)``. ``fit`` holds the log fit and the paired
    estimate of V(d_last) - V(d_prev) with its batch-means error.
    """
    if N % 2:
        raise ValueError("torus size must be even")
    distances = list(distances or log_spaced(N))
    if max(distances) > N // 2:
        raise ValueError("distances must be at most N/2")
    c = H.parse_c(c)
    jobs = [(N, c, distances, seed, k, burnin, sweeps, batches) for k in range(chains)]
    parts = _pool_map(_variance_chain, jobs, threads)
    sq, lin, diff = parts[0]
    for s2, l2, d2 in parts[1:]:
        sq = [a.merge(b) for a, b in zip(sq, s2)]
        lin = [a.merge(b) for a, b in zip(lin, l2)]
        diff = diff.merge(d2)
    total = chains * (burnin + sweeps)
    rows = []
    for d, e, l in zip(distances, sq, lin):
        rows.append({"N": N, "c": _fmt(c), "d": d, "V": e.mean, "stderr": e.stderr,
                     "mean_increment": l.mean, "increment_stderr": l.stderr,
                     "batches": e.batches, "sweeps": total, "seed": seed})
    a, b, b_se, r2 = fit_log(distances, [r["V"] for r in rows])
    fit = {"a": a, "b": b, "b_stderr": b_se, "r2": r2,
           "last_diff": diff.mean, "last_diff_stderr": diff.stderr}
    return rows, fit


# circuits in boxes

def _circuit_chain(job):
    n, k, c, seed, chain_id, burnin, samples, thin, batches = job
    D = box(2 * n)
    xi = H.zero_one(D)
    chain = ChainState(D, H.min_extension(D, xi, floor=0), c, fixed=list(xi),
                       seed=seed, chain_id=chain_id)
    # annulus faces touching Lambda_n, possibly only at a corner
    inner = [f for f in annulus(n, 2 * n) if max(abs(2 * f[0] + 1), abs(2 * f[1] + 1)) == 2 * n + 1]
    outer = list(D.boundary_faces)
    bsize = max(1, samples // batches)
    est = {name: BatchMeans(bsize) for name in ("circuit", "circuit_abs", "blocked_abs")}
    chain.run(burnin)
    for _ in range(samples):
        chain.run(thin)
        h = chain.h
        est["circuit"].add(circuit(D, h, n, 2 * n, Pred('ge', k)))
        est["circuit_abs"].add(circuit(D, h, n, 2 * n, Pred('abs_ge', k)))
        est["blocked_abs"].add(crossing(D, h, inner, outer, Pred('abs_le', k - 1), 'cross'))
    return est


def circuit_experiment(ns, k, c, seed=0, burnin=5000, samples=2000, thin=10,
                       batches=40, chains=1, threads=1):
    """Estimate P[O_{h>=k}(n, 2n)] under the 0/1 boundary on Lambda_{2n}.

    Also reports the |h| >= k circuit frequency and the frequency of a
    radial x-crossing of |h| <= k-1 through the annulus that blocks it.
    """
    c = H.parse_c(c)
    jobs = [(n, k, c, seed, ch, burnin, samples, thin, batches)
            for n in ns for ch in range(chains)]
    parts = _pool_map(_circuit_chain, jobs, threads)
    rows = []
    for i, n in enumerate(ns):
        group = parts[i * chains:(i + 1) * chains]
        merged = group[0]
        for g in group[1:]:
            merged = {key: merged[key].merge(g[key]) for key in merged}
        e = merged["circuit"]
        rows.append({"n": n, "k": k, "c": _fmt(c), "p_circuit": e.mean, "stderr": e.stderr,
                     "p_circuit_abs": merged["circuit_abs"].mean,
                     "p_circuit_abs_stderr": merged["circuit_abs"].stderr,
                     "p_blocked_abs": merged["blocked_abs"].mean,
                     "batches": e.batches, "sweeps": chains * (burnin + samples * thin),
                     "seed": seed})
    return rows


def _fmt(c):
    from .checks import format_c
    return format_c(c)
