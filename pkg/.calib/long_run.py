import sys
import time
import numpy as np
from cyclevib.data import LevelSetSpec, generate
from cyclevib.model import CycleVibModel, ModelConfig
from cyclevib.trainer import TrainConfig, init_train_state, train_step
from cyclevib.evaluation import evaluate

lam = float(sys.argv[1])
beta = float(sys.argv[2])
epochs = int(sys.argv[3])
dim = int(sys.argv[4]) if len(sys.argv) > 4 else 2
seed = int(sys.argv[5]) if len(sys.argv) > 5 else 0

ds = generate(LevelSetSpec(dim=dim, n_points=10000, seed=seed))
mc = ModelConfig(seed=seed, lam=lam, beta=beta)
model = CycleVibModel.create(mc)
state = init_train_state(model, TrainConfig(batch_size=256, seed=seed, warmup_steps=1000))
Xtr, Ytr = ds.X_train, ds.Y_train
n_batches = len(Xtr)//256
t0 = time.time()
for epoch in range(epochs):
    order = state.shuffle_rng.permutation(len(Xtr))
    for b in range(n_batches):
        rows = order[b*256:(b+1)*256]
        train_step(state, Xtr[rows], Ytr[rows])
    if (epoch+1) % 100 == 0:
        r = evaluate(model, ds, n_samples=100, n_references=10)
        nz0 = int(r.selected_dims[:3].sum()); nz1 = int(r.selected_dims[3:].sum())
        print(f"dim={dim} seed={seed} lam={lam:5.1f} beta={beta:4.1f} ep{epoch+1:4d} "
              f"t={time.time()-t0:5.0f}s mae_x={r.mae_x:.4f} mae_y={r.mae_y:.4f} "
              f"inv={r.invariance_mae:.5f} sel z0={nz0} z1={nz1} "
              f"sig={np.round(r.sigma_signal,2)}", flush=True)
