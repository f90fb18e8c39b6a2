#!/usr/bin/env python3
"""Why the better-performing reservoir is not always the better partner.

A three-observation counterexample: candidate B beats candidate C on its
own, yet combining with C wins. The projector bracket quantifies what can
be guaranteed without fitting the combined model, and the partner-selection
procedure refuses to guess when the brackets overlap.
"""

import numpy as np

from qrmux import RegressionInstance, combination_bounds, residual_sq, select_partner

y = np.array([1.0, 1.0, 1.0])
design_a = np.array([0.25, 1.0, 0.0])
design_b = np.array([1.0, 0.0, 0.0])
design_c = np.array([0.0, 1.0, -1.0])

inst = RegressionInstance(design_a, y)
print("solo training residuals:")
print(f"  A: {residual_sq(inst):.6f}")
print(f"  B: {residual_sq(RegressionInstance(design_b, y)):.6f}   (better solo)")
print(f"  C: {residual_sq(RegressionInstance(design_c, y)):.6f}")

for name, partner in (("A+B", design_b), ("A+C", design_c)):
    bounds = combination_bounds(inst, partner)
    print(f"combined {name}: exact {bounds.residual_combined:.6f}, "
          f"bracket [{bounds.residual_lower:.6f}, {bounds.residual_upper:.6f}]")

decision = select_partner(inst, design_b, design_c)
print(f"partner decision: {decision.choice}  "
      "(brackets overlap, so no safe call without fitting)")

print()
print("a span degeneracy makes a safe call possible:")
a = np.array([[1.0], [0.0], [0.0]])
b = 2.0 * a                       # adds nothing beyond A
c = np.array([[1.0], [1.0], [0.0]])
decision = select_partner(RegressionInstance(a, y), b, c)
print(f"partner decision: {decision.choice}  "
      f"(A+B provably stays at {decision.bounds_with_b.residual_lower:.1f}, "
      f"A+C is bounded above by {decision.bounds_with_c.residual_upper:.1f})")
