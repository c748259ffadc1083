# %% [markdown]
# # Two bounded charts on one stream
#
# The lower chart starts at 0 and the upper chart at h.  Both follow the same
# reflected recursion, so the gap between them can only shrink, and it shrinks
# only when one of them presses against a barrier.  Once they meet they stay
# together.

# %%
import numpy as np

from dualcusum import RegimeSchedule, classify, gaussian, make_stream, run_dual

pair = gaussian(-0.5, 0.5, 1.0)
schedule = RegimeSchedule(150, ((41, 90, 1),))
policy = classify(8, 8, 16)
print(policy.scenario.value)

trace = run_dual(pair, schedule, policy, make_stream(1, 0))

# %% [markdown]
# With h = kL + kU the chart signals 1 at or above 8 and 0 at or below 8,
# continuously, for as long as it stays there.

# %%
print("coupled at t =", trace.coupling_time, "value", trace.rL[trace.coupling_time - 1])
runs = "".join("-01"[s + 1] for s in trace.signal)
for start in range(0, len(runs), 50):
    print(f"{start + 1:4d}  {runs[start:start + 50]}")

# %% [markdown]
# Same stream, a narrower band: h = 6 leaves a dead zone where neither
# condition holds.

# %%
gap = run_dual(pair, schedule, classify(5, 5, 6), make_stream(1, 0))
print(gap.policy.scenario.value, "no-signal steps:", int(np.sum(gap.signal == -1)))

# %%
with open("trace.csv", "w") as fh:
    trace.to_csv(fh)
