"""Residual of L^f = L + dF/dt along a path as the sampling is refined, per gauge."""

import argparse

import numpy as np

from lcfi.config import parse_gauges
from lcfi.em_fields import FluxTube
from lcfi.field_interaction import verify_lagrangian_relation
from lcfi.quadrature import QuadratureConfig, observed_orders
from lcfi.trajectories import straight_path


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--radius", type=float, default=0.0, help="core radius")
    parser.add_argument("--gauges", default="azimuthal; dirac-string@pi; azimuthal+chi:1/(1+x*x+y*y)")
    parser.add_argument("--base-samples", type=int, default=41)
    parser.add_argument("--halvings", type=int, default=3)
    args = parser.parse_args(argv)
    tube = FluxTube(2 * np.pi, args.radius)
    quad = QuadratureConfig(rtol=1e-8)
    for gauge in parse_gauges(args.gauges):
        errs = []
        for h in range(args.halvings + 1):
            n = (args.base_samples - 1) * 2**h + 1
            path = straight_path((0.8, -2.0), (0.8, 2.0), 0.01, n)
            errs.append(verify_lagrangian_relation(path, gauge, tube, 1.0, quad=quad).max_residual)
        orders = observed_orders(np.array(errs), floor=1e-15)
        print(f"{gauge.identifier}: residuals {' '.join(f'{e:.2e}' for e in errs)}; orders "
              f"{' '.join(f'{o:.2f}' for o in orders)}")


if __name__ == "__main__":
    main()
