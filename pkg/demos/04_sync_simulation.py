"""Two hosts on a virtual clock.

Host 1 runs the IMU thread at 50 Hz (and sEMG at 200 Hz when a model is
given); Host 2 checks for messages at 250 Hz and commands the robot at
1000 Hz. Every increment is integrated once; between messages the robot
holds its last target. Over an ideal channel the commanded path equals the
operator's path passed through the same smoothing window.
"""

import numpy as np

from wearteleop.config import ChannelModel
from wearteleop.metrics import evaluate
from wearteleop.sync import Scenario, run_simulation
from wearteleop.synth import ShapeSpec, gen_shape

log, truth = gen_shape(ShapeSpec("circle"))
ideal = run_simulation(Scenario(log))
rep = evaluate(ideal.human, ideal.commanded, skip_us=200_000)
print("ideal channel RMSE per axis:", {k: f"{v:.1e}" for k, v in rep.rmse.items()})
print("control cycles", ideal.stats["host2"]["control_cycles"], "integrations", ideal.stats["host2"]["integrations"])

lossy = run_simulation(Scenario(log, channel=ChannelModel(latency_us=20_000, jitter_us=10_000, drop_prob=0.05, seed=0)))
rep = evaluate(lossy.human, lossy.commanded, skip_us=200_000)
print("20 ms +- 10 ms latency, 5% drops: RMSE", {k: round(v, 4) for k, v in rep.rmse.items()})
print("messages dropped", lossy.stats["channel"]["dropped"], "superseded", lossy.stats["host2"]["superseded"])

dead = run_simulation(Scenario(log, channel=ChannelModel(drop_prob=1.0)))
print("everything dropped: robot moved", np.ptp(dead.commanded.pos, axis=0).max(), "m, stale at end:", dead.stats["final_stale"])

again = run_simulation(Scenario(log, channel=ChannelModel(latency_us=20_000, jitter_us=10_000, drop_prob=0.05, seed=0)))
print("same seed, same event log:", again.event_log() == lossy.event_log())
