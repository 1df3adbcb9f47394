"""Time the element flux kernel on both backends.

Run ``python3 benchmarks/bench_kernels.py [--n 200] [--repeat 5]``.
"""

import argparse
import timeit

import numpy as np

from phisys import kernels
from phisys.grid import Mesh
from phisys.nfunction import PhiKernel


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=200, help="cells per side of the square mesh")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    mesh = Mesh.rectangle(nx=args.n, ny=args.n)
    u = np.random.default_rng(0).normal(size=mesh.n_nodes)
    backends = ["python"] + (["cython"] if kernels._compiled is not None else [])
    print(f"mesh: {mesh.n_elements} triangles; compiled extension: {kernels._compiled is not None}")
    grads = np.einsum("ea,ead->ed", u[mesh.elements], mesh.grad_basis)
    print(f"{'kernel':<22}{'stage':<10}{'backend':<10}{'best [ms]':>12}{'speedup':>10}")
    for kernel in (PhiKernel.power(3.0), PhiKernel.sum_powers(1.5, 2.5)):
        label = f"{kernel.family}{kernel.exponents}"
        stages = {
            "element": lambda b: kernels.element_flux(grads, mesh.grad_basis, mesh.measures, kernel, 1e-8, backend=b),
            "assembly": lambda b: kernels.flux_operator(mesh, u, kernel, 1e-8, backend=b),
        }
        for stage, call in stages.items():
            times = {}
            for b in backends:
                call(b)
                times[b] = min(timeit.repeat(lambda: call(b), number=1, repeat=args.repeat))
            for b in backends:
                print(f"{label:<22}{stage:<10}{b:<10}{1e3 * times[b]:>12.1f}{times['python'] / times[b]:>10.2f}")


if __name__ == "__main__":
    main()
