import sys
import time
import numpy as np
from cyclevib.data import LevelSetSpec, generate
from cyclevib.model import CycleVibModel, ModelConfig
from cyclevib.trainer import TrainConfig, init_train_state, train_step
from cyclevib.evaluation import evaluate

mode = sys.argv[1]            # "lrdecay" | "relu" | "plain"
dim = int(sys.argv[2]); seed = int(sys.argv[3]); epochs = int(sys.argv[4])
floor = float(sys.argv[5]) if len(sys.argv) > 5 else 0.1
lr_late = float(sys.argv[6]) if len(sys.argv) > 6 else 2.5e-4

ANNEAL = 5250
ds = generate(LevelSetSpec(dim=dim, n_points=10000, seed=seed))
mc = ModelConfig(seed=seed, lam=10.0, beta=1.0)
model = CycleVibModel.create(mc)
if mode == "relu":
    for stack in (model.encoder, model.dec_y, model.dec_x):
        for layer in stack[:-1]:
            layer.activation = "relu"
state = init_train_state(model, TrainConfig(batch_size=256, seed=seed, warmup_steps=1000,
                                            anneal_start_step=ANNEAL, anneal_floor=floor))
Xtr, Ytr = ds.X_train, ds.Y_train
n_batches = len(Xtr)//256
t0 = time.time()
for epoch in range(epochs):
    order = state.shuffle_rng.permutation(len(Xtr))
    for b in range(n_batches):
        if mode == "lrdecay" and state.step == ANNEAL:
            state.optimizer.learning_rate = lr_late
        rows = order[b*256:(b+1)*256]
        train_step(state, Xtr[rows], Ytr[rows])
    if (epoch+1) % 50 == 0:
        r = evaluate(model, ds, n_samples=100, n_references=10)
        nz0 = int(r.selected_dims[:mc.d_z0].sum()); nz1 = int(r.selected_dims[mc.d_z0:].sum())
        print(f"{mode} dim={dim} seed={seed} fl={floor} ep{epoch+1:4d} t={time.time()-t0:5.0f}s "
              f"mae_x={r.mae_x:.4f} mae_y={r.mae_y:.4f} inv={r.invariance_mae:.5f} "
              f"sel z0={nz0} z1={nz1} sig={np.round(r.sigma_signal,2)}", flush=True)
# seam diagnostic: error vs angle of the original point
mu = model.encode_mean(ds.X_test)
yh = model.predict_y(mu[:, :3]); xh = model.decode_input(mu[:, 3:], yh)
err = np.abs(ds.X_test - xh).mean(axis=1)
ang = np.arctan2(ds.X_original[ds.test_idx][:, 1], ds.X_original[ds.test_idx][:, 0])
bins = np.linspace(-np.pi, np.pi, 13)
idx = np.digitize(ang, bins) - 1
prof = [err[idx == k].mean() if np.any(idx == k) else np.nan for k in range(12)]
print(f"{mode} err-vs-angle profile:", np.round(prof, 3), flush=True)
