"""Scaled-down localisation scan of the Ohmic spin-boson model.

For each coupling alpha, fit the late-time exponential decay rate of
<Sz>(t) at several memory lengths K, extrapolate K -> infinity with a
cubic in 1/K (rates cannot be negative), and watch the extrapolated rate
head towards zero as alpha grows: the precursor of the localisation
transition.  The production-scale version of this scan (K up to 200)
locates the critical coupling near alpha ~ 1.25; this demo keeps K <= 40
so it finishes in a few minutes and only shows the trend.
"""

from temposim import (
    BathConfig,
    SimulationConfig,
    SpinBosonSpec,
    TruncationPolicy,
    build_spin_boson,
    extrapolate_gamma,
    fit_exponential,
    run_tempo,
)

memories = (12, 16, 22, 30, 40)
alphas = (0.9, 1.5)


def decay_rate(alpha, memory):
    parts = build_spin_boson(SpinBosonSpec(spin="half", omega=1.0,
                                           alpha=alpha, omega_c=5.0))
    config = SimulationConfig(
        system=parts.system, density=parts.density,
        bath=BathConfig(temperature=0.0),
        delta=0.1, steps=90, memory=memory,
        policy=TruncationPolicy(1e-7),
        observables=parts.observables, reduce=True,
    )
    trajectory = run_tempo(config)
    return fit_exponential(trajectory.times, trajectory.observables["sz"]).gamma


for alpha in alphas:
    points = []
    for memory in memories:
        gamma = decay_rate(alpha, memory)
        points.append((memory, gamma))
        print(f"alpha={alpha}  K={memory:3d}  gamma={gamma:.5f}")
    result = extrapolate_gamma(points)
    print(f"alpha={alpha}: extrapolated K->inf rate = {result.gamma_inf:.5f}")
    print()
