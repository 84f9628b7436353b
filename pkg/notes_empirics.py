"""Scratch empirical study for acceptance-test parameter choices (not shipped)."""
import time

import numpy as np

import reachkit as rk
from reachkit import _engine

_engine.warmup()


def covering(cloud, spec, res=120000):
    ref = rk.dense_reference(spec, res)
    return rk.hausdorff_asym(ref, cloud)


print("=== A. circle n=2000 ===", flush=True)
for seed in (11, 3):
    spec = rk.Circle(1.0)
    cloud = rk.sample(spec, 2000, seed)
    rho = covering(cloud, spec)
    eps_hat = rk.estimate_epsilon(cloud)
    t0 = time.perf_counter()
    prof = rk.defect_profile(cloud)
    dt = time.perf_counter() - t0
    ts, hs = prof.scales, prof.values
    mask = (ts >= 0.1) & (ts <= 0.9)
    analytic = 1 - np.sqrt(1 - ts[mask] ** 2)
    dev = np.abs(hs[mask] - analytic).max()
    qc_mask = ts <= 0.9
    qc_slack = (hs[qc_mask] - (1 - np.sqrt(1 - ts[qc_mask] ** 2))).max()
    est = rk.reach(cloud, rk.ModelParams(d=1, k=3, r_max=10.0))
    print(f" seed={seed} rho={rho:.4f} eps_hat={eps_hat:.4f} profile_time={dt:.1f}s")
    print(f"   crit6: max|h-qc|={dev:.4f} vs 3rho={3*rho:.4f}  crit7 slack={qc_slack:.4f} vs 3eps={3*eps_hat:.4f}")
    print(f"   reach: r_hat={est.r_hat:.4f} local={est.r_local:.4f} wfs={est.r_wfs:.4f} branch={est.branch}", flush=True)

print("=== B. sphere n=5000 ===", flush=True)
spec = rk.Sphere(2, 1.0)
for seed in range(1, 9):
    cloud = rk.sample(spec, 5000, seed)
    rho = covering(cloud, spec, 150000)
    eps_hat = rk.estimate_epsilon(cloud)
    prof = rk.defect_profile(cloud, rk.DefectConfig(max_scale=0.75))
    best = (0, 0, 0)
    for eps, k in [(eps_hat, 3), (eps_hat, 4), (2 * rho, 3), (2 * rho, 4), (0.24, 3)]:
        p = rk.ModelParams(d=2, k=k, r_max=10.0, epsilon=eps)
        rloc, delta = rk.local_reach(prof, p)
        rwfs = rk.wfs(prof, p)
        rhat = min(rloc, rwfs)
        if rhat > best[0]:
            best = (rhat, eps, k, delta, rloc, rwfs)
    print(f" seed={seed} rho={rho:.4f} eps_hat={eps_hat:.4f} best r_hat={best[0]:.4f} "
          f"(eps={best[1]:.3f} k={best[2]} delta={best[3]:.3f} loc={best[4]:.3f} wfs={best[5]:.3f})", flush=True)

print("=== C. two segments 400 pts ===", flush=True)
spec = rk.TwoSegmentBottleneck(1.0, 0.3)
for seed in (1, 2, 3, 4):
    cloud = rk.sample(spec, 400, seed)
    rho = covering(cloud, spec, 40000)
    eps = max(rho * 1.05, 0.01)
    est = rk.reach(cloud, rk.ModelParams(d=1, k=3, r_max=10.0, epsilon=eps))
    print(f" seed={seed} rho={rho:.4f} eps={eps:.4f} delta={est.delta_used:.3f} "
          f"r_hat={est.r_hat:.4f} branch={est.branch} loc={est.r_local:.3f} wfs={est.r_wfs:.4f}", flush=True)

print("=== D. dumbbell n=2000 ===", flush=True)
spec = rk.Dumbbell(1.0, 0.3, 1.0)
for seed in (1, 2, 3, 4, 5):
    cloud = rk.sample(spec, 2000, seed)
    rho = covering(cloud, spec, 120000)
    eps = rho * 1.05
    delta = eps ** (1 / 3)
    t0 = time.perf_counter()
    est = rk.reach(cloud, rk.ModelParams(d=1, k=3, r_max=10.0, epsilon=eps),
                   rk.DefectConfig(max_scale=0.5))
    dt = time.perf_counter() - t0
    print(f" seed={seed} rho={rho:.4f} eps={eps:.4f} delta={delta:.4f} r_hat={est.r_hat:.4f} "
          f"branch={est.branch} loc={est.r_local:.3f} wfs={est.r_wfs:.4f} ({dt:.1f}s)", flush=True)

print("=== E. bump circle n=4000 ===", flush=True)
for seed in (1, 2, 3, 4, 5):
    row = []
    for gamma in (0.1, 0.2, 0.3):
        spec = rk.BumpSphere(1, 1.0, gamma, 3)
        cloud = rk.sample(spec, 4000, seed)
        est = rk.reach(cloud, rk.ModelParams(d=1, k=3, r_max=10.0),
                       rk.DefectConfig(max_scale=0.35))
        row.append(est.r_local)
    mono = row[0] > row[1] > row[2]
    print(f" seed={seed} r_local(gamma=.1,.2,.3)={row[0]:.4f},{row[1]:.4f},{row[2]:.4f} strict_decreasing={mono}", flush=True)

print("=== F. rates quick (3 trials) ===", flush=True)
meds = []
for n in (256, 1024, 4096):
    errs = []
    for trial in range(3):
        from reachkit.cli import derive_seed
        cloud = rk.sample(rk.Circle(1.0), n, derive_seed(7, n, trial))
        t0 = time.perf_counter()
        est = rk.reach(cloud, rk.ModelParams(d=1, k=3, r_max=10.0), rk.DefectConfig(max_scale=0.5))
        errs.append(abs(est.r_hat - 1.0))
    meds.append(np.median(errs))
    print(f" n={n} median_err={meds[-1]:.4f} last_time={time.perf_counter()-t0:.1f}s", flush=True)
slope = np.polyfit(np.log([256, 1024, 4096]), np.log(meds), 1)[0]
print(f" slope={slope:.3f} decreasing={meds[0] > meds[1] > meds[2]}", flush=True)

print("=== G. criterion-1 style clouds ===", flush=True)
rng = np.random.default_rng(42)
t0 = time.perf_counter()
for i in range(20):
    n = int(rng.integers(30, 301))
    D = int(rng.integers(2, 4))
    pts = rng.uniform(-1, 1, (n, D))
    prof = rk.defect_profile(rk.PointCloud(pts))
print(f" 20 random clouds: {time.perf_counter()-t0:.1f}s", flush=True)

print("=== H. oracle-equivalence cost (1 cloud) ===", flush=True)
rng = np.random.default_rng(0)
pts = rng.uniform(0, 1, (12, 3))
cloud = rk.PointCloud(pts)
t0 = time.perf_counter()
ours = rk.defect_at(cloud, 0.2, rk.DefectConfig(order=3, triple_grid=200))
oracle = rk.defect_bruteforce(cloud, 0.2, max_subset=3, hull_samples=200)
print(f" defect_at={ours:.6f} oracle={oracle:.6f} diff={abs(ours-oracle):.2e} time={time.perf_counter()-t0:.1f}s", flush=True)
