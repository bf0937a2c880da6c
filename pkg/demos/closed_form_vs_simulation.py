# %% [markdown]
# # Closed-form rotor response against the simulator
#
# A single machine with its electrical power held fixed obeys a linear swing
# equation, so the closed-form solution should track the RK4 simulation to
# integration accuracy.  The attack below scales and biases the speed reading
# for five seconds and adds a ramp to the power reading later on.

# %%
import numpy as np

import sps_fdia as sf

model = sf.default_model(1, pe_mode="frozen", pm_mode="fixed")
state = sf.find_equilibrium(model, load=1.0)
state.delta_omega[0] = 0.01

attacks = [
    sf.AttackSpec(sf.Target.RotorSpeedDeviation, 1, alpha=0.2, gamma=0.004,
                  beta=sf.TimeVaryingTerm.sinusoid(0.01, 0.5, 0.3), t_start=1.0, t_end=6.0),
    sf.AttackSpec(sf.Target.ElectricalPower, 1, gamma=-0.02, beta=sf.TimeVaryingTerm.ramp(0.003), t_start=2.5),
]

# %%
ts = sf.simulate(state, model, attacks, sf.IntegratorConfig(dt=1e-4, t_end=10.0, record_every=100))
dw, th = sf.piecewise_rotor_response(model.generators[0], attacks, ts.times, 0.01, 0.0)

print(f"{'t [s]':>6} {'dw sim':>14} {'dw closed':>14} {'theta sim':>12}")
for k in range(0, len(ts), 10):
    print(f"{ts.times[k]:6.1f} {ts['delta_omega_1'][k]:14.8f} {dw[k]:14.8f} {ts['theta_1'][k]:12.6f}")

print("max |difference| in dw:", np.max(np.abs(ts["delta_omega_1"] - dw)))
print("max |difference| in theta:", np.max(np.abs(ts["theta_1"] - th)))

# %% [markdown]
# The steady states of the three textbook cases follow from the same
# coefficients.  A persistent bias leaves the rotor running at -gamma1 and the
# angle drifting; an amplification with -1 < alpha1 < 0 only shifts the angle.

# %%
gen = sf.GeneratorParams()
for case, value in ((sf.Case.Nominal, 0.0), (sf.Case.ConstantBias, 0.01), (sf.Case.Amplification, -0.5)):
    ss = sf.case_steady_state(case, gen, value, dw0=0.01, th0=0.0)
    print(f"{case.name:14s} dw_ss={ss.dw_ss:+.4f} theta_limit={ss.theta_limit} theta_rate={ss.theta_rate:+.4f}")
