"""Both hosts over TCP on this machine.

Host 2 listens and runs its receive and control loops on wall-clock timers;
Host 1 replays a recorded square in real time and streams length-prefixed
frames. Halfway through, Host 1 drops the connection: Host 2 keeps
commanding the last target and raises its stale flag.
"""

import socket
import threading

import numpy as np

from wearteleop.metrics import evaluate
from wearteleop.sync.live import run_host1, run_host2
from wearteleop.synth import ShapeSpec, gen_shape

with socket.socket() as s:
    s.bind(("127.0.0.1", 0))
    addr = f"127.0.0.1:{s.getsockname()[1]}"

log, _ = gen_shape(ShapeSpec("square", duration_s=4.0))
result, ready = {}, threading.Event()
host2 = threading.Thread(target=lambda: result.setdefault("host2", run_host2(addr, ready=ready, linger_s=0.5)))
host2.start()
ready.wait()

host1 = run_host1(addr, log, abort_after_s=2.5)
host2.join()
robot = result["host2"]
print("host 1 sent", host1.stats["sent"], "aborted:", host1.stats["aborted"])
print("host 2 integrated", robot.stats["host2"]["integrations"], "increments; stale at end:", robot.stats["final_stale"])

t_cut = robot.stats["disconnected_at_us"]
before = evaluate(host1.human, robot.commanded, skip_us=200_000)
print("tracking RMSE up to the disconnect:", {k: f"{v * 1000:.2f} mm" for k, v in before.rmse.items()})
held = robot.commanded.pos[robot.commanded.t_us > t_cut]
print(f"after the disconnect the pose moved {np.ptp(held, axis=0).max():.1e} m over {len(held)} control cycles")
