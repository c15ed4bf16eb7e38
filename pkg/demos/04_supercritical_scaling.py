"""Why the global problem fails above the critical power.

The family u_lam(x) = sqrt(lam) u(lam x) keeps the mass fixed while
concentrating the profile.  Kinetic energy grows like lam^2, but the
focusing term grows like lam^{(p-1)/2}: for p > 5 the exponent exceeds 2
and the energy dives to minus infinity, so no global minimizer on the mass
sphere can exist.  At p = 3 the ordering flips and the energy eventually
climbs, which is why the subcritical problem never needed the ball.
"""
from graphwave import (
    ClosedFormWave,
    StarGraphSpec,
    build,
    evaluate_wave,
    make_star,
    scaling_energy_curve,
)

d = build(make_star(StarGraphSpec(3, 1.0, 40.0)), 0.01)
u = evaluate_wave(ClosedFormWave(3, 1.0, 7.0, 0.5, 0), d)

lams = [1.0, 2.0, 4.0, 8.0]
print("supercritical p=7: concentration sends the energy to -infinity")
print(f"{'lam':>5} {'E(u_lam)':>12}")
for lam, E in scaling_energy_curve(d, 7.0, u, lams):
    print(f"{lam:5.1f} {E:12.4f}")

print("\nsubcritical p=3 (diagnostic): the lam^2 kinetic term wins instead")
print(f"{'lam':>5} {'E(u_lam)':>12}")
for lam, E in scaling_energy_curve(d, 3.0, u, lams):
    print(f"{lam:5.1f} {E:12.4f}")
