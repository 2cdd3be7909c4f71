#!/usr/bin/env python3
"""Regenerates the spectrum and material attenuation tables under data/.

Attenuation values are log-log interpolated between approximate mass
attenuation anchors (cm^2/g) with the iodine and gadolinium K-edges kept as
discontinuities. The spectrum is a Kramers-law 80 kVp shape with soft
filtration, split into three counting bins.
"""
import math
import pathlib

DATA = pathlib.Path(__file__).resolve().parent.parent / "data"

WATER = [(20, 0.8096), (30, 0.3756), (40, 0.2683), (50, 0.2269), (60, 0.2059),
         (80, 0.1837), (100, 0.1707), (150, 0.1505)]
IODINE = [(20, 24.4), (30, 7.8), (33.169, 6.55), (33.17, 36.0), (40, 22.1),
          (50, 12.3), (60, 7.6), (80, 3.5), (100, 1.94), (150, 0.70)]
GADOLINIUM = [(20, 41.0), (30, 13.5), (40, 6.3), (50.239, 3.4), (50.24, 18.8),
              (60, 12.0), (80, 5.6), (100, 3.1), (150, 1.1)]


def loglog(anchors, e):
    for (e0, v0), (e1, v1) in zip(anchors, anchors[1:]):
        if e0 <= e <= e1:
            if e1 - e0 < 1e-2:
                return v1
            t = (math.log(e) - math.log(e0)) / (math.log(e1) - math.log(e0))
            return math.exp(math.log(v0) + t * (math.log(v1) - math.log(v0)))
    raise ValueError(e)


def main():
    energies = list(range(20, 151))
    with open(DATA / "materials_water_iodine_gadolinium.csv", "w") as f:
        f.write("energy_keV,water,iodine,gadolinium\n")
        for e in energies:
            f.write(f"{e},{loglog(WATER, e):.6g},{loglog(IODINE, e):.6g},"
                    f"{loglog(GADOLINIUM, e):.6g}\n")

    kvp = 80
    spec = [e for e in range(20, kvp)]
    flux = [(kvp - e) / e * math.exp(-((18.0 / e) ** 3)) for e in spec]
    total = sum(flux)
    edges = [(20, 33), (33, 50), (50, kvp)]
    with open(DATA / "spectrum_80kvp_3bin.csv", "w") as f:
        f.write("energy_keV,flux,bin_1,bin_2,bin_3\n")
        for e, s in zip(spec, flux):
            resp = [1 if lo <= e < hi else 0 for lo, hi in edges]
            f.write(f"{e},{s / total:.8g}," + ",".join(map(str, resp)) + "\n")

    # One energy per bin: the log-linearized model is exact for this table.
    with open(DATA / "spectrum_mono_3bin.csv", "w") as f:
        f.write("energy_keV,flux,bin_1,bin_2,bin_3\n")
        f.write("28,0.3333333333,1,0,0\n")
        f.write("40,0.3333333333,0,1,0\n")
        f.write("60,0.3333333334,0,0,1\n")


if __name__ == "__main__":
    main()
