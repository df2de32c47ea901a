"""How does the compressed state grow with the memory length?

The dense history tensor needs 4^K numbers; the compressed representation
stays polynomial.  This demo tabulates the final state size and maximum
bond dimension against K at two couplings and prints the fitted power.
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

memories = np.array([10, 15, 20, 30, 40])

for alpha in (0.5, 1.5):
    sizes = []
    for memory in memories:
        parts = build_spin_boson(SpinBosonSpec(spin="half", omega=1.0,
                                               alpha=alpha, omega_c=5.0))
        config = SimulationConfig(
            system=parts.system, density=parts.density,
            bath=BathConfig(temperature=0.0),
            delta=0.06, steps=int(memory) + 10, memory=int(memory),
            policy=TruncationPolicy(1e-6),
            observables=parts.observables, reduce=True,
        )
        trajectory = run_tempo(config)
        n_tot = trajectory.stats.n_tot[-1]
        sizes.append(n_tot)
        print(f"alpha={alpha}  K={memory:3d}  N_tot={n_tot:8d}  "
              f"bond_max={trajectory.stats.bond_max.max():4d}  "
              f"dense would need 4^K = {4.0 ** memory:.2e}")
    slope = np.polyfit(np.log(memories), np.log(sizes), 1)[0]
    print(f"alpha={alpha}: N_tot ~ K^{slope:.2f}\n")
