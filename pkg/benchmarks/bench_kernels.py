#!/usr/bin/env python3
"""Time the hot kernels on both execution paths.

Each kernel has a numba @njit build and a pure-numpy build; the active path
is chosen at import time from the CAPFILM_PURE_NUMPY environment variable.
This script times both directly (bypassing the dispatcher), so one run
reports the full comparison.

Usage: python benchmarks/bench_kernels.py [--size coarse|fine]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from capfilm import _mesh_kernels as mk
from capfilm import _meridian_kernel as mer
from capfilm._accel import HAVE_NUMBA
from capfilm.geometry import CircleWire, Tube, inner_offset_domain
from capfilm.meshing import init_mesh
from capfilm.spanning import _cover_numba, _cover_numpy, quasi_random_in_domain


def timeit(fn, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_mesh(target_edge: float):
    tube = Tube(CircleWire(1.0), 0.1)
    dom = inner_offset_domain(tube)
    mesh = init_mesh(dom, tube, target_edge)
    V, F = mesh.vertices, mesh.triangles
    rng = np.random.default_rng(0)
    V = V + 0.01 * rng.standard_normal(V.shape)
    rows = []

    pairs = [
        ("area+grad", mk._area_grad_numba, mk._area_grad_numpy, lambda f: f(V, F, np.zeros_like(V))),
        ("prism+grad", mk._prism_grad_numba, mk._prism_grad_numpy, lambda f: f(V, F, np.zeros_like(V))),
        ("area+prism", mk._area_prism_numba, mk._area_prism_numpy, lambda f: f(V, F)),
        (
            "cotan",
            mk._cotan_numba,
            mk._cotan_numpy,
            lambda f: f(V, F, np.zeros_like(V), np.zeros(V.shape[0])),
        ),
    ]
    for name, fn_nb, fn_np, call in pairs:
        if HAVE_NUMBA:
            call(fn_nb)  # compile
            t_nb = timeit(lambda: call(fn_nb))
        else:
            t_nb = float("nan")
        t_np = timeit(lambda: call(fn_np))
        rows.append((name, F.shape[0], t_nb, t_np))

    pts = quasi_random_in_domain(dom, 2000)
    t0 = V[F[:, 0]]
    t1 = V[F[:, 1]]
    t2 = V[F[:, 2]]
    args = [np.ascontiguousarray(x) for x in (
        pts[:, 0], pts[:, 1], t0[:, 0], t0[:, 1], t1[:, 0], t1[:, 1], t2[:, 0], t2[:, 1]
    )]

    def cover(fn):
        fn(*args, np.zeros(pts.shape[0], dtype=np.bool_))

    if HAVE_NUMBA:
        cover(_cover_numba)
        t_nb = timeit(lambda: cover(_cover_numba))
    else:
        t_nb = float("nan")
    t_np = timeit(lambda: cover(_cover_numpy))
    rows.append(("spanning", F.shape[0], t_nb, t_np))
    return rows


def bench_meridian():
    args = dict(lam=0.067, r0=0.9, z0=0.003, psi0=-0.03, r_stop=1e-4)

    def run(impl):
        out = np.empty((60001, 4))
        impl(
            args["lam"], args["r0"], args["z0"], args["psi0"], args["r_stop"],
            np.pi / 2 - 1e-9, 1e-12, 1e-13, 60000, 1e9, out,
        )

    if HAVE_NUMBA:
        run(mer._integrate_numba)
        t_nb = timeit(lambda: run(mer._integrate_numba))
    else:
        t_nb = float("nan")
    t_np = timeit(lambda: run(mer._integrate_py))
    return [("meridian RK", 0, t_nb, t_np)]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", choices=["coarse", "fine"], default="coarse")
    ns = ap.parse_args()
    edge = 0.05 if ns.size == "coarse" else 0.02
    print(f"numba available: {HAVE_NUMBA}")
    print(f"{'kernel':<14}{'ntri':>8}{'numba [ms]':>14}{'numpy [ms]':>14}{'speedup':>10}")
    for name, ntri, t_nb, t_np in bench_mesh(edge) + bench_meridian():
        ratio = t_np / t_nb if t_nb == t_nb and t_nb > 0 else float("nan")
        print(f"{name:<14}{ntri:>8}{1e3 * t_nb:>14.3f}{1e3 * t_np:>14.3f}{ratio:>10.1f}")


if __name__ == "__main__":
    main()
