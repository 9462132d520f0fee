"""Pilot round 3: re-measure every frozen bound at candidate default seed 7."""
import math
import numpy as np

import kernelbayes as kb
from kernelbayes.diagnostics import (
    ConstantTarget, KernelSectionTarget, gram_nonsingularity_trial,
    limit_identity_check, prior_independence_gap, rkhs_norm_divergence_probe,
    weights_nonzero_trial,
)
from kernelbayes.embedding import KbrWeights
from kernelbayes.kernels import GaussianKernel, gram_matrix
from kernelbayes.numerics import singular_values

SEED = 7

print("== criteria 1/2 at seed 7 (spread 4, cap 300, n=10)")
def make_setups(count, n, seed):
    setups, attempt = [], 0
    while len(setups) < count:
        rng = np.random.default_rng([seed, 5000 + attempt]); attempt += 1
        pts = 4.0 * rng.standard_normal((n, 2))
        gy = gram_matrix(pts, GaussianKernel(1.0))
        sv = singular_values(gy.entries)
        if sv[0] / sv[-1] > 300.0:
            continue
        setups.append((KbrWeights(mu=rng.uniform(0.5, 1.5, n), epsilon=0.0, n=n), gy))
    return setups, attempt

grid = [1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12]
setups, attempts = make_setups(50, 10, SEED)
wid = wfin = 0.0; mono = 0
for mu, gy in setups:
    d = [x for _, x in limit_identity_check(mu, gy, grid + [0.0])]
    wid = max(wid, d[-1]); wfin = max(wfin, d[-2])
    mono += any(b > a for a, b in zip(d[:-1], d[1:]))
print(f" attempts {attempts}; delta=0 worst {wid:.2e}; delta=1e-12 worst {wfin:.2e}; mono fails {mono}")
setups8, _ = make_setups(10, 8, SEED)
w8 = max(max(x for _, x in limit_identity_check(mu, gy, grid)[-1:]) for mu, gy in setups8)
print(f" n=8 worst final {w8:.2e}")

print("== criterion 8 trials at seed 7")
rep = gram_nonsingularity_trial(10, 2, 1.0, 500, SEED)
print(f" gram {rep.passes}/{rep.trials} min {rep.stat_min:.3e}")
rngp = np.random.default_rng([SEED, 999])
prior = kb.PriorMixture(weights=np.array([0.5, 0.5]), atoms=rngp.standard_normal((2, 2)))
rep2 = weights_nonzero_trial(10, 2, 1.0, 1e-3, prior, 200, SEED)
print(f" weights {rep2.passes}/{rep2.trials} min {rep2.stat_min:.3e}")

print("== criterion 9 probes at seed 7")
for target in (ConstantTarget(1.0), KernelSectionTarget(0.0)):
    s = rkhs_norm_divergence_probe(200, 1.0, 1.0, target, [1e-2, 1e-4, 1e-6], SEED)
    norms = [nm for _, nm in s]
    print(f" {target}: {[f'{v:.4f}' for v in norms]} ratio {norms[-1]/norms[0]:.3f} "
          f"inc={all(b > a for a, b in zip(norms, norms[1:]))}")

print("== criterion 4a: KBR2 desk (n=20, sigma=1, covs=I) at seed 7")
spec20 = kb.ExperimentSpec(n_per_class=10, replicates=20, master_seed=SEED,
                           class_covs=(((1.0, 0.0), (0.0, 1.0)), ((1.0, 0.0), (0.0, 1.0))))
worst, kept = 0.0, 0
for r in range(20):
    s = kb.generate_training_sample(spec20, r)
    gy = gram_matrix(s.features, GaussianKernel(1.0))
    sv = singular_values(gy.entries)
    if sv[0] / sv[-1] > 1e7:
        continue
    kept += 1
    for y in ((0.5, 0.5), (0.6, 0.4), (0.7, 0.3)):
        pa = kb.kbr2_posterior(s, (0.1, 0.9), np.array(y), 1.0)
        pb = kb.kbr2_posterior(s, (0.9, 0.1), np.array(y), 1.0)
        worst = max(worst, float(np.max(np.abs(pa.values - pb.values))))
print(f" kept {kept}/20 worst gap {worst:.2e}")

print("== KBR1 delta=0 prior independence (n=10, covs=I, sigma=1) at seed 7")
spec10 = kb.ExperimentSpec(n_per_class=5, replicates=20, master_seed=SEED,
                           class_covs=(((1.0, 0.0), (0.0, 1.0)), ((1.0, 0.0), (0.0, 1.0))))
worst, conds, kept = 0.0, [], 0
for r in range(20):
    s = kb.generate_training_sample(spec10, r)
    gy = gram_matrix(s.features, GaussianKernel(1.0))
    sv = singular_values(gy.entries)
    conds.append(sv[0] / sv[-1])
    if sv[0] / sv[-1] > 1e3:
        continue
    kept += 1
    gap = prior_independence_gap(s, (0.2, 0.8), (0.7, 0.3), np.array([0.5, 0.5]), 1.0, 1e-3, 0.0)
    worst = max(worst, gap)
print(f" cond median {np.median(conds):.2e} max {np.max(conds):.2e} kept {kept}/20 worst gap {worst:.2e} (need <= 1e-8)")

print("== gap delta-sweep nonincreasing (n=10) at seed 7")
s = kb.generate_training_sample(spec10, 0)
gaps = [prior_independence_gap(s, (0.2, 0.8), (0.7, 0.3), np.array([0.5, 0.5]), 1.0, 1e-3, d)
        for d in (1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12)]
print(" gaps:", [f"{g:.3e}" for g in gaps], "noninc:", all(b <= a for a, b in zip(gaps, gaps[1:])))

print("== default sweep at seed 7")
import time
t0 = time.time()
spec = kb.ExperimentSpec(master_seed=SEED)
res = kb.run_prior_sweep(spec, 0.1, 1e-7, 1e-7)
print(f" {time.time()-t0:.1f}s")
def rows_of(c, tx, ty):
    return {r.prior_c1: r for r in res.rows if r.classifier == c and (r.test_x, r.test_y) == (tx, ty)}
k1 = rows_of("KBR1", 0.5, 0.5)
means = [k1[p].mean_post_c1 for p in sorted(k1)]
print(f" KBR1 range {max(means)-min(means):.5f}")
bt = rows_of("BR_th", 0.5, 0.5)
print(f" BR_th range-0.8 {abs(max(bt[p].mean_post_c1 for p in bt)-min(bt[p].mean_post_c1 for p in bt)-0.8):.2e}")
print(f" BR_th max sem {max(bt[p].sem for p in bt):.2e}")
for tx, ty in ((0.5, 0.5), (0.6, 0.4), (0.7, 0.3)):
    k2 = rows_of("KBR2", tx, ty)
    print(f" KBR2 gap@({tx},{ty}) {abs(k2[0.1].mean_post_c1-k2[0.9].mean_post_c1):.2e}")
ok = tot = 0
ref = {(r.prior_c1, r.test_x, r.test_y): r.mean_post_c1 for r in res.rows if r.classifier == "BR_th"}
worst_z = 0
for r in res.rows:
    if r.classifier != "BR":
        continue
    tot += 1
    z = abs(r.mean_post_c1 - ref[(r.prior_c1, r.test_x, r.test_y)]) / r.sem
    worst_z = max(worst_z, z)
    ok += z <= 3
print(f" BR 3SEM {ok}/{tot} worst z {worst_z:.2f}")
print(f" errors {sum(r.n_errors for r in res.rows)}")

print("== shrink sweep at seed 7")
res5 = kb.run_prior_sweep(spec, 0.1, 1e-1, 1e-1)
k1 = {r.prior_c1: r for r in res5.rows if r.classifier == "KBR1" and (r.test_x, r.test_y) == (0.5, 0.5)}
print(f" KBR1@p=.9 {k1[0.9].mean_post_c1:.6f}")

print("== generator checks at seed 7")
pooled = np.vstack([kb.generate_training_sample(spec, r).features[:50] for r in range(100)])
print(f" pooled class-0 mean {pooled.mean(axis=0)}")

rng = kb.replicate_rng(SEED, 0)
draws = np.array([kb.sample_mvnormal([0.0, 0.0], [[0.1, 0.0], [0.0, 0.1]], rng) for _ in range(100000)])
emp = np.cov(draws, rowvar=False)
print(f" mvnormal cov rel err {np.max(np.abs(emp - np.diag([0.1, 0.1])))/0.1:.4f} (need < 0.05)")

print("== fit MC at seed 7")
rng = kb.replicate_rng(SEED, 1)
feats = np.vstack([
    np.array([kb.sample_mvnormal([1.0, 0.0], [[0.1, 0], [0, 0.1]], rng) for _ in range(50)]),
    np.array([kb.sample_mvnormal([0.0, 1.0], [[0.1, 0], [0, 0.1]], rng) for _ in range(50)]),
])
samp = kb.LabeledSample(labels=np.repeat([0, 1], 50), features=feats)
st = kb.fit_gaussian_stats(samp)
print(f" mean err {np.max(np.abs(st.means - np.array([[1.0, 0.0], [0.0, 1.0]]))):.4f} (need < 0.1)")

print("== density MC integral at seed 7")
rng = np.random.default_rng([SEED, 77])
mean = np.array([0.3, -0.2]); cov = np.array([[0.1, 0.0], [0.0, 0.1]])
half = 6 * math.sqrt(0.1)
pts = rng.uniform(-half, half, size=(100000, 2)) + mean
vals = np.array([kb.gaussian_density(p, mean, cov) for p in pts])
est = vals.mean() * (2 * half) ** 2
print(f" integral {est:.4f} (need within 2% of 1)")

print("== KBR1 desk flatness (15 reps) at seed 7")
spec_small = kb.ExperimentSpec(replicates=15, master_seed=SEED)
gaps = []
for r in range(15):
    s = kb.generate_training_sample(spec_small, r)
    a = kb.kbr1_posterior(s, (0.1, 0.9), np.array([0.5, 0.5]), 0.1, 1e-7, 1e-7).values[0]
    b = kb.kbr1_posterior(s, (0.9, 0.1), np.array([0.5, 0.5]), 0.1, 1e-7, 1e-7).values[0]
    gaps.append(abs(a - b))
print(f" mean gap {np.mean(gaps):.5f} max {np.max(gaps):.5f}")
