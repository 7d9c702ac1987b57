"""Fringe of the two-source device with and without flux, and how far it moves."""

import argparse

import numpy as np

from lcfi.em_fields import FluxTube
from lcfi.interferometers import SourceState, loopless_fringe


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--flux", type=float, default=np.pi)
    parser.add_argument("--wavenumber", type=float, default=5.0)
    parser.add_argument("--points", type=int, default=40)
    args = parser.parse_args(argv)
    xs = np.linspace(-2.95, 2.95, args.points)
    pts = np.column_stack([xs, np.full_like(xs, 3.0)])
    s1, s2 = (-1.0, -2.0), (1.0, -2.0)
    off = loopless_fringe(SourceState.balanced(), s1, s2, FluxTube(0.0), 1.0, args.wavenumber, pts)
    on = loopless_fringe(SourceState.balanced(), s1, s2, FluxTube(args.flux), 1.0, args.wavenumber, pts)
    print("x\tP(flux=0)\tP(flux)\tphi_B")
    for x, a, b, pb in zip(xs, off.intensity, on.intensity, on.phi_B):
        print(f"{x:+.3f}\t{a:.6f}\t{b:.6f}\t{pb:+.4f}")
    print(f"largest change {np.max(np.abs(on.intensity - off.intensity)):.3e}")


if __name__ == "__main__":
    main()
