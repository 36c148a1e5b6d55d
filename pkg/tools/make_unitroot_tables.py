"""Regenerate the frozen Dickey-Fuller and KPSS quantile tables.

Dickey-Fuller t quantiles are simulated at several sample sizes and fitted
with a response surface q(T) = b0 + b1/T + b2/T**2 per probability level.
KPSS quantiles are simulated at a long sample as an asymptotic proxy.

    python tools/make_unitroot_tables.py > src/ticktca/econometrics/_tables.py
"""
import numpy as np

PROBS = [0.001, 0.005, 0.01, 0.025, 0.05, 0.075, 0.10, 0.125, 0.15, 0.20,
         0.25, 0.30, 0.35, 0.40, 0.45, 0.50, 0.55, 0.60, 0.65, 0.70, 0.75,
         0.80, 0.85, 0.90, 0.95, 0.975, 0.99, 0.995, 0.999]
SIZES = [25, 40, 60, 100, 160, 250, 400, 700, 1000]
REPS = 200_000
BATCH = 5_000


def df_tau(rng, nobs, trend):
    """Simulate DF t-statistics with `nobs` regression observations."""
    out = []
    t = np.arange(nobs, dtype=float)
    if trend == "n":
        z = np.zeros((nobs, 0))
    elif trend == "c":
        z = np.ones((nobs, 1))
    else:
        z = np.column_stack([np.ones(nobs), t])
    k = z.shape[1]
    if k:
        proj = z @ np.linalg.solve(z.T @ z, z.T)
    for _ in range(REPS // BATCH):
        e = rng.standard_normal((BATCH, nobs + 1))
        y = np.cumsum(e, axis=1)
        x = y[:, :-1]
        dy = np.diff(y, axis=1)
        if k:
            x = x - x @ proj
            dy = dy - dy @ proj
        sxx = np.einsum("ij,ij->i", x, x)
        beta = np.einsum("ij,ij->i", x, dy) / sxx
        resid = dy - beta[:, None] * x
        s2 = np.einsum("ij,ij->i", resid, resid) / (nobs - k - 1)
        out.append(beta / np.sqrt(s2 / sxx))
    return np.concatenate(out)


def kpss_eta(rng, nobs, trend):
    out = []
    t = np.arange(nobs, dtype=float)
    z = np.ones((nobs, 1)) if trend == "c" else np.column_stack([np.ones(nobs), t])
    proj = z @ np.linalg.solve(z.T @ z, z.T)
    for _ in range(REPS // BATCH):
        e = rng.standard_normal((BATCH, nobs))
        resid = e - e @ proj
        s = np.cumsum(resid, axis=1)
        var = np.einsum("ij,ij->i", resid, resid) / nobs
        out.append(np.einsum("ij,ij->i", s, s) / nobs**2 / var)
    return np.concatenate(out)


def main():
    rng = np.random.default_rng(20140114)
    print('"""Frozen quantile tables for unit-root p-values.')
    print()
    print("Generated by tools/make_unitroot_tables.py; do not edit by hand.")
    print('"""')
    print()
    print(f"PROBS = {PROBS!r}")
    print()
    print("# Dickey-Fuller t quantiles: per trend, one (b0, b1, b2) row per")
    print("# probability level; quantile(T) = b0 + b1 / T + b2 / T**2.")
    print("DF_SURFACE = {")
    for trend in ("n", "c", "ct"):
        qs = np.array([np.quantile(df_tau(rng, n, trend), PROBS) for n in SIZES])
        design = np.column_stack([np.ones(len(SIZES)), 1 / np.array(SIZES), 1 / np.array(SIZES) ** 2])
        coef, *_ = np.linalg.lstsq(design, qs, rcond=None)
        print(f"    {trend!r}: [")
        for row in coef.T:
            print(f"        ({row[0]:.5f}, {row[1]:.4f}, {row[2]:.3f}),")
        print("    ],")
    print("}")
    print()
    print("# KPSS statistic quantiles (long-sample proxy for the asymptotic law).")
    print("KPSS_QUANTILES = {")
    for trend in ("c", "ct"):
        q = np.quantile(kpss_eta(rng, 2000, trend), PROBS)
        print(f"    {trend!r}: [{', '.join(f'{v:.5f}' for v in q)}],")
    print("}")


if __name__ == "__main__":
    main()
