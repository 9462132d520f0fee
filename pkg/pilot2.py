"""Pilot round 2: tune constructions for criteria 1/2 and 4a; analyze 3-SEM and probe."""
import numpy as np

import kernelbayes as kb
from kernelbayes.diagnostics import ConstantTarget, KernelSectionTarget, limit_identity_check, rkhs_norm_divergence_probe
from kernelbayes.embedding import KbrWeights
from kernelbayes.kernels import GaussianKernel, gram_matrix
from kernelbayes.numerics import singular_values

SEED = 42

# --- (A) criteria 1/2 construction: spread + conditioning screen ---
print("== A: delta->0 setups, spread 4, cond screen 300")
def make_setups(count, n=10, spread=4.0, cond_cap=300.0, seed=SEED):
    setups = []
    k = 0
    attempt = 0
    while len(setups) < count:
        rng = np.random.default_rng([seed, 5000 + attempt])
        attempt += 1
        pts = spread * rng.standard_normal((n, 2))
        gy = gram_matrix(pts, GaussianKernel(1.0))
        sv = singular_values(gy.entries)
        if sv[0] / sv[-1] > cond_cap:
            continue
        mu = KbrWeights(mu=rng.uniform(0.5, 1.5, n), epsilon=0.0, n=n)
        setups.append((mu, gy, sv[0] / sv[-1]))
    return setups, attempt

setups, attempts = make_setups(50)
print(f" accepted 50 of {attempts} attempts; cond range "
      f"{min(c for *_, c in setups):.1f}..{max(c for *_, c in setups):.1f}")
worst_id, worst_final, mono_fail = 0.0, 0.0, 0
grid = [1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12]
for mu, gy, _ in setups:
    series = limit_identity_check(mu, gy, grid + [0.0])
    d = [x for _, x in series]
    worst_final = max(worst_final, d[-2])
    worst_id = max(worst_id, d[-1])
    if any(b > a for a, b in zip(d[:-1], d[1:])):
        mono_fail += 1
print(f" delta=0 worst {worst_id:.2e} (<1e-8?)  delta=1e-12 worst {worst_final:.2e} (<1e-6?)  mono fails {mono_fail}")

# n=8 variant for module invariant
setups8, _ = make_setups(10, n=8)
worst = 0.0
for mu, gy, _ in setups8:
    d = [x for _, x in limit_identity_check(mu, gy, grid)]
    worst = max(worst, d[-1])
    assert all(b <= a for a, b in zip(d, d[1:]))
print(f" n=8 worst final {worst:.2e}")

# --- (B) criterion 4a: desk-scale KBR2 with wider covariance ---
print("== B: KBR2 n=20 sigma=1, cov scale variants")
for cov_scale in (0.5, 1.0):
    spec = kb.ExperimentSpec(
        n_per_class=10, replicates=30, master_seed=SEED,
        class_covs=(((cov_scale, 0.0), (0.0, cov_scale)), ((cov_scale, 0.0), (0.0, cov_scale))),
    )
    gaps, conds, kept = [], [], 0
    for r in range(30):
        s = kb.generate_training_sample(spec, r)
        gy = gram_matrix(s.features, GaussianKernel(1.0))
        sv = singular_values(gy.entries)
        cond = sv[0] / sv[-1]
        conds.append(cond)
        if cond > 1e7:
            continue
        kept += 1
        for y in ((0.5, 0.5), (0.6, 0.4), (0.7, 0.3)):
            pa = kb.kbr2_posterior(s, (0.1, 0.9), np.array(y), 1.0)
            pb = kb.kbr2_posterior(s, (0.9, 0.1), np.array(y), 1.0)
            gaps.append(np.max(np.abs(pa.values - pb.values)))
    print(f" cov={cov_scale}: cond median {np.median(conds):.2e} max {np.max(conds):.2e}; "
          f"kept {kept}/30; worst gap {max(gaps) if gaps else float('nan'):.2e}")

# --- (C) BR vs BR_th 3-SEM structure ---
print("== C: BR 3-SEM analysis across seeds")
for seed in (42, 7, 2024):
    spec = kb.ExperimentSpec(master_seed=seed)
    res = kb.run_prior_sweep(spec, sigma=0.1, epsilon=1e-7, delta=1e-7)
    ref = {(r.prior_c1, r.test_x, r.test_y): r.mean_post_c1
           for r in res.rows if r.classifier == "BR_th"}
    zs = []
    for r in res.rows:
        if r.classifier != "BR":
            continue
        z = abs(r.mean_post_c1 - ref[(r.prior_c1, r.test_x, r.test_y)]) / r.sem
        zs.append((z, r.prior_c1, (r.test_x, r.test_y)))
    ok = sum(1 for z, *_ in zs if z <= 3)
    worst = sorted(zs, reverse=True)[:5]
    print(f" seed {seed}: {ok}/27 within 3 SEM; worst z: "
          + ", ".join(f"{z:.1f}@p={p},y={y}" for z, p, y in worst))

# --- (D) probe saturation analysis ---
print("== D: probe curve over wide eps range")
for target in (ConstantTarget(1.0), KernelSectionTarget(0.0)):
    grid_wide = [1e0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-8, 1e-10]
    series = rkhs_norm_divergence_probe(200, 1.0, 1.0, target, grid_wide, SEED)
    print(f" {target}:")
    for e, nm in series:
        print(f"   eps={e:.0e} norm={nm:.4f}")
    n1 = dict(series)
    print(f"   ratio(1e-6/1e-2) = {n1[1e-6]/n1[1e-2]:.3f}")
