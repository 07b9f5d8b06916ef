# Tracing parties out of a PCS state gives another PCS state. The kept
# W weight Omega fixes p' = p Omega and lambda' = lambda sqrt((1-p)/(1-p')),
# so coherence can only decrease along a chain of partial traces.

import numpy as np

from pcsmono import build_pcs, partial_trace, reduce_pcs_symbolic, sample_random_pcs

pcs = sample_random_pcs(5, 3, seed=2024)
print(f"start: n={pcs.n} d={pcs.d} p={pcs.p:.6f} lambda={pcs.lam:.6f}")
print("party weights X_i:", np.round(pcs.coeffs.party_weights(), 6))

rho = build_pcs(pcs)
current, kept = pcs, list(range(pcs.n))
for traced in [4, 1, 2]:
    pos = kept.index(traced)
    current = reduce_pcs_symbolic(current, [pos])
    kept.remove(traced)
    numeric = partial_trace(rho, kept).entries
    err = np.max(np.abs(build_pcs(current).entries - numeric))
    print(f"trace out {traced}: kept={kept} p'={current.p:.6f} lambda'={current.lam:.6f} "
          f"max deviation from numeric partial trace {err:.1e}")
