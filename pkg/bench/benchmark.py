"""Compare the compiled and pure-Python heat-bath kernels.

Runs the same seeded chain with each available backend, checks that the
final height functions agree, and reports sweeps per second.

    python bench/benchmark.py --sizes 16,32,64 --sweeps 200
"""

import argparse
import csv
import sys
import time

import numpy as np

from sixvertex import heights as H
from sixvertex import kernels
from sixvertex.lattice import box, torus
from sixvertex.mcmc import ChainState


def make_chain(kind, n, c, seed):
    if kind == "torus":
        D = torus(n)
        return ChainState(D, H.checkerboard(D), c, seed=seed)
    D = box(n)
    xi = H.zero_one(D)
    return ChainState(D, H.min_extension(D, xi, floor=0), c, fixed=list(xi), seed=seed)


def time_backend(name, kind, n, c, sweeps, seed):
    kernels.set_backend(name)
    chain = make_chain(kind, n, c, seed)
    chain.run(2)  # warm-up
    t0 = time.perf_counter()
    chain.run(sweeps)
    dt = time.perf_counter() - t0
    return dt, chain.h.copy(), chain.D.n_faces


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="16,32,64")
    ap.add_argument("--sweeps", type=int, default=200)
    ap.add_argument("--c", type=float, default=2.0)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args(argv)

    names = kernels.available()
    before = kernels.backend()
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(["domain", "n", "faces", "backend", "sweeps", "seconds",
                  "sweeps_per_s", "face_updates_per_s", "speedup", "same_result"])
    try:
        for kind in ("torus", "box"):
            for n in [int(s) for s in args.sizes.split(",")]:
                runs = {nm: time_backend(nm, kind, n, args.c, args.sweeps, args.seed)
                        for nm in names}
                ref_dt, ref_h, _ = runs["python"]
                for nm, (dt, h, faces) in runs.items():
                    out.writerow([kind, n, faces, nm, args.sweeps, f"{dt:.4f}",
                                  f"{args.sweeps / dt:.1f}", f"{faces * args.sweeps / dt:.3g}",
                                  f"{ref_dt / dt:.2f}", bool(np.array_equal(h, ref_h))])
    finally:
        kernels.set_backend(before)


if __name__ == "__main__":
    main()
