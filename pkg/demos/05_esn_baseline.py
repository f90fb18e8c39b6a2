#!/usr/bin/env python3
"""Classical echo-state-network reference point.

The tanh random network with spectral radius 0.9 and weak input coupling is
the conventional baseline: its memory capacity grows with the node count,
which calibrates what the quantum ensembles are compared against.
"""

import numpy as np

from qrmux import ESNConfig, PhaseProtocol, esn_run, evaluate_features, generate_input

protocol = PhaseProtocol(washout=1000, train=1500, eval=1500)

print("nodes   memory capacity (3 draws)")
for n_nodes in (20, 50, 100):
    capacities = []
    for draw in range(3):
        config = ESNConfig(n_nodes=n_nodes, spectral_radius=0.9,
                           input_scale=0.01, weight_seed=100 * n_nodes + draw)
        inputs = generate_input(protocol.total, seed=7 + draw)
        features = esn_run(config, inputs)
        result = evaluate_features(features, inputs, "memory_capacity", protocol)
        capacities.append(result.mc)
    shown = "  ".join(f"{mc:.1f}" for mc in capacities)
    print(f"{n_nodes:>5}   {shown}   (mean {np.mean(capacities):.1f})")

print()
print("Full sweep: qrmux esn --mode mc_fixed --nodes 20,100 --out results/esn")
