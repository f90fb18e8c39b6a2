#!/usr/bin/env python3
"""Memory capacity versus the order of spatial multiplexing.

Reduced-scale version of the capacity sweep: 4-qubit reservoirs with 5
virtual nodes, a shortened protocol, and orders 1 to 3. Adding disjoint
reservoirs raises how far back the trained readouts can reconstruct the
input.
"""

import warnings

from qrmux import EnsembleConfig, PhaseProtocol, QRSystemConfig, run_trial

warnings.filterwarnings("ignore", message=".*underdetermined.*")

protocol = PhaseProtocol(washout=500, train=1000, eval=1000)
base = QRSystemConfig(n_qubits=4, tau=1.0, virtual_nodes=5)

print("order  memory capacity   MF at d=1,5,10,20")
for order in (1, 2, 3):
    ensemble = EnsembleConfig.replicated(base, list(range(order)))
    result = run_trial(ensemble, "memory_capacity", protocol, input_seed=42)
    mf = result.mf_profile
    peek = "  ".join(f"{mf[d]:.2f}" for d in (1, 5, 10, 20))
    print(f"{order:>5}  {result.mc:>15.2f}   {peek}")

print()
print("Full-scale figure: qrmux run --preset fig3 --out results/fig3, then")
print("plotkit mc_vs_order --in results/fig3/trials.csv --out mc.png")
