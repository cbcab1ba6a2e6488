"""Grasp recognition from 8-channel sEMG.

Windows of 100 samples become 24 features (MAV, WL and RMS per channel); a
logistic regression decides "close" only when P(contracted) > 0.5, and a
debouncer needs two matching decisions before the gripper changes state.
"""

import numpy as np

from wearteleop.semg import Debouncer, accuracy, build_feature_vector, decide, predict_prob, train
from wearteleop.synth import gen_semg, semg_training_windows

windows = semg_training_windows(n_per_class=1000, window_len=100, seed=0)
data = [(build_feature_vector(w), y) for w, y in windows]
order = np.random.default_rng(0).permutation(len(data))
fit, test = [data[i] for i in order[:1600]], [data[i] for i in order[1600:]]

model = train(fit)
print(f"trained in {model.config['epochs']} epochs, step {model.config['lr']:.3f}, final loss {model.config['final_loss']:.5f}")
print("held-out accuracy:", accuracy(model, [x for x, _ in test], [y for _, y in test]))

x = build_feature_vector(gen_semg("contracted", 0.5, seed=7))
print("first channel [MAV, WL, RMS] of a contracted window:", np.round(x[:3], 2))
print("P(contracted) =", round(predict_prob(model, x), 4), "-> state", decide(predict_prob(model, x)))
print("a probability of exactly 0.5 stays open:", decide(0.5))

debounce = Debouncer(2)
stream = [0, 1, 0, 1, 1, 1, 0, 0]
print("decisions", stream, "-> transitions", [debounce.update(d) for d in stream])
