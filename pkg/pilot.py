"""Pilot run: measure every bound the acceptance tests will freeze."""
import time

import numpy as np

import kernelbayes as kb
from kernelbayes.diagnostics import (
    ConstantTarget,
    KernelSectionTarget,
    gram_nonsingularity_trial,
    limit_identity_check,
    rkhs_norm_divergence_probe,
    weights_nonzero_trial,
)
from kernelbayes.embedding import KbrWeights
from kernelbayes.kernels import GaussianKernel, gram_matrix
from kernelbayes.numerics import singular_values

SEED = 42

# --- criteria 1 & 2: delta=0 identity and delta->0 limit, n=10 sigma=1 ---
print("== criteria 1/2: random well-conditioned setups (n=10, sigma=1)")
for spread in (1.0, 2.0, 3.0):
    worst_id = 0.0
    worst_final = 0.0
    monotone_fails = 0
    conds = []
    for k in range(50):
        rng = np.random.default_rng([SEED, 1000 + k])
        pts = spread * rng.standard_normal((10, 2))
        gy = gram_matrix(pts, GaussianKernel(1.0))
        sv = singular_values(gy.entries)
        conds.append(sv[0] / sv[-1])
        mu = KbrWeights(mu=rng.uniform(0.5, 1.5, 10), epsilon=0.0, n=10)
        series = limit_identity_check(mu, gy, [1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12, 0.0])
        dists = [d for _, d in series]
        worst_id = max(worst_id, dists[-1])
        worst_final = max(worst_final, dists[-2])
        if any(b > a for a, b in zip(dists[:-1], dists[1:])):
            monotone_fails += 1
    print(f" spread={spread}: cond(G_Y) median {np.median(conds):.2e} max {np.max(conds):.2e}")
    print(f"   delta=0 identity worst rel dist {worst_id:.2e}  (need < 1e-8)")
    print(f"   delta=1e-12 worst rel dist {worst_final:.2e}    (need < 1e-6)")
    print(f"   monotone failures {monotone_fails}/50")

# --- criterion 8: section-6.2-style trials ---
print("== criterion 8: nonsingularity trials")
rep = gram_nonsingularity_trial(n=10, d=2, sigma=1.0, trials=500, seed=SEED)
print(f" gram: pass {rep.passes}/{rep.trials} min stat {rep.stat_min:.3e} median {rep.stat_median:.3e}")
rngp = np.random.default_rng([SEED, 999])
prior = kb.PriorMixture(weights=np.array([0.5, 0.5]), atoms=rngp.standard_normal((2, 2)))
rep2 = weights_nonzero_trial(n=10, d=2, sigma=1.0, epsilon=1e-3, prior=prior, trials=200, seed=SEED)
print(f" weights: pass {rep2.passes}/{rep2.trials} min stat {rep2.stat_min:.3e} median {rep2.stat_median:.3e}")

# --- criterion 9: divergence probes ---
print("== criterion 9: divergence probes (n=200, sigma0=sigma=1)")
for target in (ConstantTarget(1.0), KernelSectionTarget(0.0)):
    series = rkhs_norm_divergence_probe(200, 1.0, 1.0, target, [1e-2, 1e-4, 1e-6], SEED)
    norms = [nm for _, nm in series]
    print(f" {target}: norms {[f'{v:.4g}' for v in norms]} ratio {norms[-1]/norms[0]:.2f} "
          f"increasing={all(b > a for a, b in zip(norms, norms[1:]))}")

# --- KBR2 desk-scale prior independence (criterion 4a) ---
print("== criterion 4a: KBR2 n=20 sigma=1 prior 0.1 vs 0.9")
spec20 = kb.ExperimentSpec(n_per_class=10, replicates=20, master_seed=SEED)
worst_gap = 0.0
conds = []
for r in range(20):
    s = kb.generate_training_sample(spec20, r)
    gy = gram_matrix(s.features, GaussianKernel(1.0))
    sv = singular_values(gy.entries)
    conds.append(sv[0] / sv[-1])
    for y in ((0.5, 0.5), (0.6, 0.4), (0.7, 0.3)):
        pa = kb.kbr2_posterior(s, (0.1, 0.9), np.array(y), 1.0)
        pb = kb.kbr2_posterior(s, (0.9, 0.1), np.array(y), 1.0)
        worst_gap = max(worst_gap, np.max(np.abs(pa.values - pb.values)))
print(f" cond(G_Y): median {np.median(conds):.2e} max {np.max(conds):.2e}")
print(f" worst per-class gap {worst_gap:.2e} (need < 1e-6)")

# --- default full sweep: criteria 3, 4b, and BR-vs-BR_th invariant ---
print("== default sweep (sigma=0.1, eps=delta=1e-7, 100 replicates)")
t0 = time.time()
spec = kb.ExperimentSpec(master_seed=SEED)
res = kb.run_prior_sweep(spec, sigma=0.1, epsilon=1e-7, delta=1e-7)
print(f" took {time.time()-t0:.1f}s, {len(res.rows)} rows")

def rows_of(classifier, tx, ty):
    return {r.prior_c1: r for r in res.rows
            if r.classifier == classifier and (r.test_x, r.test_y) == (tx, ty)}

kbr1 = rows_of("KBR1", 0.5, 0.5)
means = [kbr1[p].mean_post_c1 for p in sorted(kbr1)]
print(f" KBR1@(.5,.5) means {[f'{v:.4f}' for v in means]} range {max(means)-min(means):.4f} (need < 0.05)")
brth = rows_of("BR_th", 0.5, 0.5)
bmeans = [brth[p].mean_post_c1 for p in sorted(brth)]
print(f" BR_th@(.5,.5) range {max(bmeans)-min(bmeans):.17g} sems {max(brth[p].sem for p in brth):.2e}")
for tx, ty in ((0.5, 0.5), (0.6, 0.4), (0.7, 0.3)):
    k2 = rows_of("KBR2", tx, ty)
    gap = abs(k2[0.1].mean_post_c1 - k2[0.9].mean_post_c1)
    print(f" KBR2@({tx},{ty}) mean prior.1 {k2[0.1].mean_post_c1:.4f} vs .9 {k2[0.9].mean_post_c1:.4f} gap {gap:.4f} (need < 0.05)")
n_errors = sum(r.n_errors for r in res.rows)
print(f" total errors {n_errors}")

ok3 = 0
tot = 0
for r in res.rows:
    if r.classifier != "BR":
        continue
    tot += 1
    ref = rows_of("BR_th", r.test_x, r.test_y)[r.prior_c1].mean_post_c1
    if abs(r.mean_post_c1 - ref) <= 3 * r.sem:
        ok3 += 1
print(f" BR within 3 SEM of BR_th: {ok3}/{tot} (need >= 95%)")

# --- criterion 5: shrinkage at eps=delta=1e-1 ---
print("== shrink sweep (eps=delta=1e-1)")
t0 = time.time()
res5 = kb.run_prior_sweep(spec, sigma=0.1, epsilon=1e-1, delta=1e-1)
print(f" took {time.time()-t0:.1f}s")
k1 = {r.prior_c1: r for r in res5.rows
      if r.classifier == "KBR1" and (r.test_x, r.test_y) == (0.5, 0.5)}
print(f" KBR1 mean at prior 0.9 y=(.5,.5): {k1[0.9].mean_post_c1:.6f} (need < 0.5)")
print(f" all KBR1 means: {[f'{k1[p].mean_post_c1:.4f}' for p in sorted(k1)]}")

# --- generator sanity: pooled class-0 mean ---
pooled = np.vstack([kb.generate_training_sample(spec, r).features[:50] for r in range(100)])
print(f"== pooled class-0 mean {pooled.mean(axis=0)} (need within 0.02 of (1,0))")

# --- KBR1 desk-scale flatness (module test scale) ---
spec_small = kb.ExperimentSpec(replicates=15, master_seed=SEED)
gaps = []
for r in range(15):
    s = kb.generate_training_sample(spec_small, r)
    a = kb.kbr1_posterior(s, (0.1, 0.9), np.array([0.5, 0.5]), 0.1, 1e-7, 1e-7).values[0]
    b = kb.kbr1_posterior(s, (0.9, 0.1), np.array([0.5, 0.5]), 0.1, 1e-7, 1e-7).values[0]
    gaps.append(abs(a - b))
print(f"== KBR1 desk flatness: mean gap over 15 reps {np.mean(gaps):.5f} max {np.max(gaps):.5f}")
