"""Fitted flux period of the Andreev current against 2 pi^2 hbar c/(e dtheta), noiseless and through the noisy protocol."""

import argparse

import numpy as np

from lcfi.interferometers import (JunctionParams, andreev_current, andreev_sweep, fit_sinusoid, flux_period,
                                  measurement_protocol)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repetitions", type=int, default=50)
    parser.add_argument("--noise-fraction", type=float, default=0.02)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    print("dtheta\texpected\tnoiseless\tprotocol\tprotocol_err")
    for dtheta in (0.5 * np.pi, np.pi, 2 * np.pi):
        p = JunctionParams(t1=0.1, t2=0.08, delta_theta=dtheta, phi0=0.3)
        period = flux_period(p)
        fluxes = np.linspace(0.0, 4 * period, 161)
        clean = fit_sinusoid(fluxes, andreev_sweep(p, fluxes).intensity, slope_guess=2 * np.pi / period)
        noise = args.noise_fraction * float(np.max(andreev_current(p, fluxes)[0]))
        data = measurement_protocol(p, fluxes, args.repetitions, noise, args.seed)
        noisy = fit_sinusoid(fluxes, data.extra["raw_mean"], data.std_error, slope_guess=2 * np.pi / period)
        print(f"{dtheta:.4f}\t{period:.6f}\t{clean.period:.6f}\t{noisy.period:.6f}\t{noisy.period_error:.2e}")


if __name__ == "__main__":
    main()
