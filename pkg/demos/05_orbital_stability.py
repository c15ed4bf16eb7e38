"""Orbital stability of the constrained minimizer under the full dynamics.

Perturb a converged minimizer, evolve with the mass-conserving relaxation
scheme, and track the H1 distance to the minimizer's phase orbit.  Stable
means: the distance stays comparable to the initial kick for all time, with
no growth trend.  Mass is conserved to solver precision by construction;
energy drift measures the time-discretization error.
"""
import math

import numpy as np

from graphwave import (
    StarGraphSpec,
    build,
    ground_state,
    h1_norm_sq,
    make_star,
    mass_curve,
    minimize,
    stability_experiment,
)

P, DELTA, T_FINAL = 6.0, 1e-2, 20.0

d = build(make_star(StarGraphSpec(3, 1.0, 40.0)), 0.02)
gs = ground_state(d)
c = mass_curve(3, 1.0, P, 0.2)
res = minimize(d, P, c, 1.0, tau=1.0, tol=1e-9, ground=gs)
h1_ref = math.sqrt(h1_norm_sq(res.phi))
print(f"reference minimizer: c={c:.4f}, omega={res.omega:.6f}, |phi|_H1={h1_ref:.4f}")
print(f"kick: delta={DELTA} along the linear ground state, mass rescaled back to c\n")

trace = stability_experiment(
    d, P, res.phi, delta=DELTA, t_final=T_FINAL, dt=0.01, bump=gs.psi0, n_samples=40
)

print(f"{'t':>6} {'orbit dist':>11} {'mass drift':>11} {'energy drift':>12}")
for i in range(0, len(trace.times), 5):
    print(f"{trace.times[i]:6.1f} {trace.orbit_distance[i]:11.3e} "
          f"{trace.mass_drift[i]:11.3e} {trace.energy_drift[i]:12.3e}")

sup = float(np.max(trace.orbit_distance))
print(f"\nsup_t orbit distance = {sup:.3e}  "
      f"(= {sup / (DELTA * h1_ref):.2f} x the initial kick scale delta*|phi|_H1)")
