# Phase damping turns a coherent superposition sqrt(p)|W> + sqrt(1-p)|0...0>
# into the PCS state with coherency lambda. The one-vs-rest SCREN does not
# see lambda at all, and monogamy stays saturated for every lambda.

import numpy as np

from pcsmono import (
    MonogamyOptions,
    PCSParams,
    PCSState,
    build_coherent_superposition,
    build_pcs,
    phase_damp,
    sample_random_wclass,
    scren_mixed,
    strong_monogamy_residual,
)
from pcsmono.convex_roof import RoofOptions

coeffs = sample_random_wclass(4, 2, seed=3)
p = 0.6
psi = build_coherent_superposition(coeffs, p)

print(" lambda  channel-vs-PCS   SCREN(0|123) optimizer   SM residual (generic)")
for lam in np.linspace(0.0, 1.0, 5):
    damped = phase_damp(psi, lam)
    pcs = PCSState(coeffs, PCSParams(p, lam))
    dev = np.max(np.abs(damped.entries - build_pcs(pcs).entries))
    value = scren_mixed(damped, [0], RoofOptions(seed=0)).value
    sm = strong_monogamy_residual(pcs, 0, MonogamyOptions(force_generic=True))
    print(f"  {lam:.2f}   {dev:.1e}          {value:.12f}       {sm.residual:+.1e}")
