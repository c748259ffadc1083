# %% [markdown]
# # From threshold to run length and back
#
# The Markov-chain approximation splits [0, k) into equal cells and solves one
# linear system.  It is checked here against plain simulation.

# %%
from dualcusum import arl_markov, arl_mc, calibrate_threshold, gaussian

pair = gaussian(-0.5, 0.5, 1.0)
for m in (50, 100, 200, 400, 800):
    print(f"states={m:4d}  ARL(k=5) = {arl_markov(pair, 'lower', 'F0', 5.0, m):8.2f}")

# %%
est = arl_mc(pair, "lower", "F0", 5.0, reps=10_000, master_seed=1)
print(f"simulated ARL = {est.mean:.1f} +- {est.std_error:.1f}")

# %% [markdown]
# The inverse problem is a bracketed bisection on k.

# %%
k = calibrate_threshold(pair, "lower", "F0", 930.0, states=100)
print("k for ARL 930:", k, "->", arl_markov(pair, "lower", "F0", k, 100))

# %% [markdown]
# Very short targets are not always reachable.  In control the lower chart
# needs at least 1 / P(log lr > 0) steps on average, about 3.24 here.

# %%
for regime in ("F0", "F1"):
    print(regime, "ARL(k=0.01) =", round(arl_markov(pair, "lower", regime, 0.01, 100), 3))
