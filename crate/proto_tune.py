"""Scratch prototype of the BPL feature-mode chain + synthetic generators.
Used only to tune generator constants; the Rust implementation is authoritative.
"""
import numpy as np

rng_global = np.random.default_rng(12345)

def compress(p, beta, gamma):
    w = beta / (beta + 1.0)
    return gamma * (w * p + (1 - w) * 0.5) + (1 - gamma) * 0.5

def listener(lik0, lik1, pt):
    a, b = lik0 * (1 - pt), lik1 * pt
    return b / (a + b)

def chain(k, beta, N, P, gamma, nu, labels, phi, lam=0.5, alpha=1.0, rng=None, exclude=None):
    """Vectorized-ish per-claim chain. labels/phi describe the recall corpus."""
    pt = compress(P, beta, gamma)
    s = np.clip(0.55 - 0.25 * nu, 0.05, 0.95)
    L = listener(1 - s, s, pt)
    n_claims = len(P)
    tot_phi = phi.sum()
    tot_true = (phi * labels).sum()
    for level in range(1, k + 1):
        # speaker alpha=1: S(u|1)=L, S(u|0)=1-L ; level2: General(pi=1-gamma)
        s1, s0 = L.copy(), 1 - L
        if level == 2:
            pi = 1 - gamma
            s1, s0 = (1 - pi) * s1 + pi * s0, (1 - pi) * s0 + pi * s1
        # recall sample: N draws prop to phi (approximate exclusion: ignore)
        if rng is None:
            w1 = np.full(n_claims, tot_true / tot_phi)
        else:
            idx = rng.choice(n_claims, size=(n_claims, N), p=phi / tot_phi)
            w = phi[idx]
            w1 = (w * labels[idx]).sum(axis=1) / w.sum(axis=1)
        S1 = (1 - lam) * s1 + lam * w1
        S0 = (1 - lam) * s0 + lam * (1 - w1)
        L = listener(S0, S1, pt)
    return L

def gen_informative(n, seed, sigma_label=0.28, p_spice_mid=0.35, p_spice_base=0.08):
    rng = np.random.default_rng(seed)
    n_speakers = n // 3
    acc = rng.uniform(0.12, 0.88, n_speakers)
    T = rng.integers(25, 61, n_speakers)
    sp = rng.integers(0, n_speakers, n)
    a = acc[sp]
    t = a + rng.normal(0, sigma_label, n)
    edges = [0.2, 0.35, 0.5, 0.65, 0.8]
    ordinal = np.digitize(t, edges)
    binary = (ordinal >= 3).astype(float)
    amb = 1 - np.abs(ordinal - 2.5) / 2.5
    # history: binomial split, fixed per speaker
    trueish = rng.binomial(T, acc)
    falseish = T - trueish
    P = (trueish[sp] + 1) / (T[sp] + 2)
    gamma = np.minimum(1.0, T[sp] / 20.0)
    r = falseish[sp].astype(float)
    # spice: mid-coupled
    p1 = p_spice_base + p_spice_mid * amb
    u = rng.uniform(0, 1, n)
    nu = np.where(u < p1 * 0.3, 1.0, np.where(u < p1, 0.5, 0.0))
    phi = 1 + nu + np.log1p(r)
    return dict(P=P, gamma=gamma, nu=nu, r=r, binary=binary, amb=amb, phi=phi, ordinal=ordinal)

def ablation_table(d, seed=1):
    labels, phi = d["binary"], d["phi"]
    configs = [("Full", 1, 1, 25), ("NoDepth", 2, 1, 25), ("NoComp", 1, 100, 25),
               ("NoAvail", 1, 1, 1000), ("RsaLit", 0, 100, 1000), ("MaxBound", 0, 0.1, 3)]
    out = {}
    for name, k, beta, N in configs:
        rng = np.random.default_rng(seed + hash(name) % 1000)
        b = chain(k, beta, N, d["P"], d["gamma"], d["nu"], labels, phi, rng=rng)
        out[name] = np.corrcoef(b, labels)[0, 1]
    return out

def population_delta(d, seed=2):
    grid = [(k, b, N) for k in (0, 1, 2) for b, N in ((0.2, 5), (1, 25), (50, 500))]
    beliefs = []
    for i, (k, beta, N) in enumerate(grid):
        rng = np.random.default_rng(seed * 100 + i)
        beliefs.append(chain(k, beta, N, d["P"], d["gamma"], d["nu"], d["binary"], d["phi"], rng=rng))
    B = np.stack(beliefs)
    delta = B.var(axis=0)
    return delta

def crit4(d):
    t = ablation_table(d)
    full = t["Full"]
    deltas = {k: v - full for k, v in t.items() if k != "Full"}
    ok = (deltas["NoComp"] == min(deltas.values())) and abs(deltas["NoDepth"]) <= 0.02 and abs(deltas["NoAvail"]) <= 0.02
    return t, deltas, ok

def crit6(d):
    delta = population_delta(d)
    r = np.corrcoef(delta, d["amb"])[0, 1]
    return r

if __name__ == "__main__":
    d = gen_informative(5000, 7)
    t, deltas, ok = crit4(d)
    print("r per config:", {k: round(v, 4) for k, v in t.items()})
    print("deltas:", {k: round(v, 4) for k, v in deltas.items()}, "crit4 ok:", ok)
    print("crit6 r(Delta, ambiguity):", round(crit6(d), 4))
