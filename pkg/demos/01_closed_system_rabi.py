"""Sanity check: with the bath switched off the engine reproduces free
Rabi oscillations of a driven spin-1/2 to machine precision.

The full tensor-network pipeline still runs (influence functions are all
trivial), so this is the quickest end-to-end smoke test of the machinery.
"""

import numpy as np

from temposim import (
    BathConfig,
    SimulationConfig,
    SpinBosonSpec,
    TruncationPolicy,
    build_spin_boson,
    run_tempo,
)

parts = build_spin_boson(SpinBosonSpec(spin="half", omega=1.0, alpha=0.0))
config = SimulationConfig(
    system=parts.system,
    density=parts.density,
    bath=BathConfig(temperature=0.0),
    delta=0.01,
    steps=1000,
    memory=2,                      # no bath, so no memory needed
    policy=TruncationPolicy(1e-12),
    observables=parts.observables,
)

trajectory = run_tempo(config)
exact = 0.5 * np.cos(trajectory.times)
error = np.max(np.abs(trajectory.observables["sz"] - exact))

print("closed-system spin-1/2, omega = 1")
print(f"  steps: {config.steps}, timestep: {config.delta}")
print(f"  max |<Sz>(t) - cos(t)/2| = {error:.3e}")
for i in range(0, config.steps + 1, 200):
    print(f"  t = {trajectory.times[i]:5.2f}   <Sz> = "
          f"{trajectory.observables['sz'][i]:+.6f}")
