"""Time the energy/gradient kernel with numba and with the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 20]
"""

import argparse
import timeit

import numpy as np

from ahc._accel import HAS_NUMBA
from ahc.grid import EnergyModel, build_cylinder, planar_data
from ahc.medium import make_medium
from ahc.potential import DoubleWell, TransitionProfile

CASES = [
    ("d=1 h=10 spacing=0.01", [1.0], 1.0, 10.0, 0.01),
    ("d=2 R=16 h=16 spacing=0.1", [1.0, 0.0], 16.0, 16.0, 0.1),
    ("d=2 R=32 h=32 spacing=0.25", [0.6, 0.8], 32.0, 32.0, 0.25),
    ("d=3 R=4 h=4 spacing=0.2", [0.0, 0.6, 0.8], 4.0, 4.0, 0.2),
]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    W, q = DoubleWell(), TransitionProfile()
    rng = np.random.default_rng(0)
    print(f"{'case':<30} {'nodes':>8} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}")
    for name, e, R, h, spacing in CASES:
        dom = build_cylinder(np.asarray(e), None, R, h, spacing, np.zeros(len(e)))
        m = make_medium("random_checkerboard", {"values": [1.0, 2.0], "lambda": 1.0, "Lambda_cap": 4.0}, 1)
        model = EnergyModel(dom, m, W)
        u = planar_data(dom, np.zeros(len(e)), q).values
        u = np.clip(u + rng.normal(0, 0.05, u.size), -1, 1)
        t_np = min(timeit.repeat(lambda: model.energy_grad(u, numba=False), number=1, repeat=args.repeat))
        if HAS_NUMBA:
            model.energy_grad(u, numba=True)  # compile
            t_nb = min(timeit.repeat(lambda: model.energy_grad(u, numba=True), number=1, repeat=args.repeat))
            nb, sp = f"{1e3 * t_nb:10.3f}", f"{t_np / t_nb:7.1f}x"
        else:
            nb, sp = f"{'n/a':>10}", f"{'':>8}"
        print(f"{name:<30} {dom.n_nodes:>8} {1e3 * t_np:10.3f} {nb} {sp}")


if __name__ == "__main__":
    main()
