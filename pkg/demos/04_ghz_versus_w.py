# The n-party SCREN separates GHZ from W-class entanglement: GHZ has all of
# its entanglement in the genuinely tripartite term, while coherent W-class
# superpositions have none.

import math

import numpy as np

from pcsmono import (
    MonogamyOptions,
    PureState,
    SubsystemLayout,
    WClassCoefficients,
    build_coherent_superposition,
    multiparty_scren_pure,
)

generic = MonogamyOptions(force_generic=True)

amps = np.zeros(8)
amps[0] = amps[7] = 1 / math.sqrt(2)
ghz = PureState(SubsystemLayout.uniform(3, 2), amps)

w_like = build_coherent_superposition(WClassCoefficients.standard_w(3, 2), 0.8)

for name, psi in [("GHZ", ghz), ("W-class, p=0.8", w_like)]:
    mv = multiparty_scren_pure(psi, 0, generic)
    pairs = [round(t["value"], 9) for t in mv.detail["terms"]]
    print(f"{name:15s} one-vs-rest={mv.detail['lhs']:.9f} pair terms={pairs} n-SCREN={mv.value:+.9f}")
