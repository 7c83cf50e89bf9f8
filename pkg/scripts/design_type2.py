"""Offline design of the low-OOB two-bank prototype pair (``type2`` preset).

Each prototype is frequency sampled with ``2T+1`` complex taps at bins
``i/N``, ``i = -T..T``.  The optimiser maximises the self-interference ratio
subject to a worst-case smoothed aggregate out-of-band density, measured from
``BORDER`` subcarrier spacings beyond the band edge, for both possible parities
of the edge subcarriers.  The result is printed as a ``_taps.py`` body.

Needs jax (not a package dependency):

    python scripts/design_type2.py --starts 8 > taps.txt
"""

import argparse

import jax
import jax.numpy as jnp
import numpy as np
from scipy.optimize import minimize

jax.config.update("jax_enable_x64", True)

M, L = 64, 4
N = L * M
OS = 8
F = OS * N
NACT = 32


def synth(c, T):
    n = jnp.arange(N) + 0.5
    i = jnp.arange(-T, T + 1)
    q = jnp.exp(2j * jnp.pi * jnp.outer(n, i) / N) @ c
    return q / jnp.linalg.norm(q)


def ambiguity(qa, qb):
    rows = []
    for k in range(-L + 1, L):
        if k >= 0:
            u = jnp.concatenate([jnp.zeros(k * M), jnp.conj(qa[k * M:]) * qb[: N - k * M]])
        else:
            u = jnp.concatenate([jnp.conj(qa[: N + k * M]) * qb[-k * M:], jnp.zeros(-k * M)])
        rows.append(jnp.fft.ifft(u.reshape(-1, M).sum(0)) * M)
    return jnp.stack(rows)


PAR = np.arange(M) % 2


def interference(q0, q1):
    total = 0.0
    for qa, qb, odd in ((q0, q0, 0), (q0, q1, 1), (q1, q1, 0), (q1, q0, 1)):
        P = jnp.abs(ambiguity(qa, qb)) ** 2 * (PAR == odd)
        if not odd:
            P = P.at[L - 1, 0].set(0.0)
        total = total + P.sum()
    return total / 2


FA = np.arange(F) / F * M
HW = int(0.125 * OS * L)
KERN = np.ones(2 * HW + 1) / (2 * HW + 1)


def aggregate_psd(q0, q1, first):
    Q = [jnp.abs(jnp.fft.fft(q, F)) ** 2 for q in (q0, q1)]
    combs = [np.zeros(F), np.zeros(F)]
    for m in range(first, first + NACT):
        combs[m % 2][(m * OS * L) % F] = 1.0
    P = jnp.real(jnp.fft.ifft(jnp.fft.fft(Q[0]) * jnp.fft.fft(combs[0]) + jnp.fft.fft(Q[1]) * jnp.fft.fft(combs[1])))
    P = jnp.convolve(jnp.concatenate([P[-HW:], P, P[:HW]]), KERN, mode="valid")
    return P


def oob(q0, q1, border, p=8.0):
    """Soft maximum (p-norm) and true maximum of the relative out-of-band density."""
    ratios = []
    for first in (0, 1):
        lo, hi = first - 0.5, first + NACT - 0.5
        P = aggregate_psd(q0, q1, first)
        inb = P[(FA > lo + 2.5) & (FA < hi - 2.5)].mean()
        mask = (FA > hi + border) & (FA < M + lo - border)
        ratios.append(P[mask] / inb)
    r = jnp.concatenate(ratios)
    return jnp.mean(r**p) ** (1 / p), jnp.max(r)


def design(T, target, border, seed):
    K = 2 * T + 1

    def unpack(x):
        return synth(x[:K] + 1j * x[K:2 * K], T), synth(x[2 * K:3 * K] + 1j * x[3 * K:], T)

    x = np.random.default_rng(seed).standard_normal(4 * K)
    for mu in (1.0, 10.0, 100.0, 1000.0):
        def objective(x, mu=mu):
            q0, q1 = unpack(x)
            soft = oob(q0, q1, border)[0]
            return 1e2 * interference(q0, q1) + mu * jax.nn.relu(10 * jnp.log10(soft) - target) ** 2

        vg = jax.jit(jax.value_and_grad(objective))
        res = minimize(lambda v: [np.asarray(a) for a in vg(v)], x, jac=True, method="L-BFGS-B",
                       options={"maxiter": 3000})
        x = res.x
    q0, q1 = unpack(x)
    sir = -10 * np.log10(float(interference(q0, q1)))
    worst = 10 * np.log10(float(oob(q0, q1, border)[1]))
    return sir, worst, x[:K] + 1j * x[K:2 * K], x[2 * K:3 * K] + 1j * x[3 * K:]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--taps", type=int, default=12, help="T, taps per bank are 2T+1")
    ap.add_argument("--target", type=float, default=-47.0, help="soft OOB target in dB")
    ap.add_argument("--border", type=float, default=1.375, help="spacings beyond the band edge")
    ap.add_argument("--accept", type=float, default=-43.0, help="worst OOB in dB a start must reach to be kept")
    ap.add_argument("--starts", type=int, default=8)
    args = ap.parse_args()
    best = None
    for seed in range(args.starts):
        sir, worst, c0, c1 = design(args.taps, args.target, args.border, seed)
        print(f"# start {seed}: SIR {sir:.2f} dB, worst OOB {worst:.1f} dB", flush=True)
        if worst < args.accept and (best is None or sir > best[0]):
            best = (sir, worst, c0, c1)
    if best is None:
        raise SystemExit("no start met the OOB target")
    sir, worst, c0, c1 = best
    print(f"# selected: SIR {sir:.2f} dB, worst OOB {worst:.1f} dB")
    for name, c in (("TYPE2_BANK0_TAPS", c0), ("TYPE2_BANK1_TAPS", c1)):
        c = c / c[len(c) // 2]
        print(f"{name} = (")
        for v in c:
            print(f"    complex({v.real:+.8f}, {v.imag:+.8f}),")
        print(")")


if __name__ == "__main__":
    main()
