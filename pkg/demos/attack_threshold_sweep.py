# %% [markdown]
# # How large does a speed bias need to be?
#
# Sweeps the bias on machine 1's speed reading and records whether any relay
# trips within two seconds of the attack starting.  The same sweep is
# available from the command line:
#
#     sps-fdia sweep governor_attack.scenario --param 'attacks[0].gamma' --values 0,0.001,0.005,0.02

# %%
import sps_fdia as sf

sc = sf.load_scenario(sf.fixture_path("governor_attack"))
sc = sf.with_parameter(sc, "integrator.t_end", 3.0)

values = [0.0, 0.0005, 0.001, 0.002, 0.005, 0.01, 0.02]
rows = sf.sweep(sc, "attacks[0].gamma", values, workers=2)

# %%
for row in rows:
    print(f"gamma={row['value']:>6s} trips={row['trip_count']} success={row['attack_success']} "
          f"max|dw|={row['max_abs_delta_omega']:.2e}")
