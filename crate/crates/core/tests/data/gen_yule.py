"""Regenerates yule_oracle.json with mpmath at 40 significant digits.

- yule_simon: (a, n, P) with P = a B(n, a + 1) from log-gamma arithmetic.
- s2_top: (alpha, N, P(N)) for rho = (N+1)^(-alpha), from the product over
  rates rho r (N - r).
- finite_yule: (beta, lambda, t, n, P) for nu = 1 by quadrature of
  beta e^{-beta y} e^{-lambda y} (1 - e^{-lambda y})^{n-1} / (1 - e^{-beta t}).
"""
import json
import mpmath as mp

mp.mp.dps = 40


def yule_simon(a, n):
    a = mp.mpf(a)
    return a * mp.exp(mp.loggamma(n) + mp.loggamma(a + 1) - mp.loggamma(n + a + 1))


def s2_top(alpha, N):
    rho = mp.mpf(N + 1) ** (-mp.mpf(alpha))
    ln = mp.mpf(0)
    for r in range(1, N):
        x = rho * r * (N - r)
        ln += mp.log(x / (1 + x))
    return mp.exp(ln)


def finite_yule(beta, lam, t, n):
    beta, lam, t = mp.mpf(beta), mp.mpf(lam), mp.mpf(t)
    f = lambda y: mp.exp(-beta * y) * mp.exp(-lam * y) * (1 - mp.exp(-lam * y)) ** (n - 1)
    return beta * mp.quad(f, [0, t / 4, t / 2, t]) / (1 - mp.exp(-beta * t))


out = {
    "yule_simon": [[a, n, float(yule_simon(a, n))] for a in (0.5, 1.0, 2.0) for n in range(1, 1001)],
    "s2_top": [[al, N, float(s2_top(al, N))] for al in (0.5, 1.2) for N in (10, 100, 1000, 10000)],
    "finite_yule": [
        [b, l, t, n, float(finite_yule(b, l, t, n))]
        for (b, l) in ((1.0, 1.0), (0.5, 1.5))
        for t in (0.3, 2.0, 8.0)
        for n in (1, 2, 5, 12)
    ],
}
with open("yule_oracle.json", "w") as fh:
    json.dump(out, fh)
