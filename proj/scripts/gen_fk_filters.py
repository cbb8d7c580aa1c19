"""Generate Fejer-Korovkin scaling filters.

|H(w)|^2 / 2 = 1/2 + 1/2 G(w), where G is the square wave sign(cos w) smoothed
by the Fejer-Korovkin kernel of degree L-1 and renormalised so G(0) = 1. The
filter is the minimum-phase spectral factor, scaled so the taps sum to sqrt(2).
"""
import mpmath as mp

mp.mp.dps = 60


def kernel_coeff(n, k):
    a = mp.pi / (n + 2)
    return ((n - k + 2) * mp.cos(k * a) + mp.sin(k * a) * mp.cot(a)) / (n + 2)


def fk_filter(length):
    n = length - 1
    odd = {}
    for k in range(1, n + 1, 2):
        sign = 1 if ((k - 1) // 2) % 2 == 0 else -1
        odd[k] = sign * 4 / (mp.pi * k) * kernel_coeff(n, k)
    g0 = sum(odd.values())
    # |H|^2 = 1 + G with cos(kw) = (z^k + z^-k) / 2, so |H(0)|^2 = 2
    coeffs = [mp.mpf(0)] * (2 * n + 1)
    coeffs[n] = mp.mpf(1)
    for k, v in odd.items():
        coeffs[n + k] += v / g0 / 2
        coeffs[n - k] += v / g0 / 2
    roots = mp.polyroots(coeffs[::-1], maxsteps=2000, extraprec=400)
    inside = sorted([r for r in roots if abs(r) < 1 - mp.mpf(10) ** -8],
                    key=lambda r: (mp.re(r), mp.im(r)))
    on_circle = [r for r in roots if abs(abs(r) - 1) <= mp.mpf(10) ** -8]
    # unit-circle roots have even multiplicity; keep every other one
    on_circle = sorted(on_circle, key=lambda r: (float(mp.arg(r)), float(abs(r))))
    chosen = inside + on_circle[::2]
    assert len(chosen) == n, (len(chosen), n)
    poly = [mp.mpc(1)]
    for r in chosen:
        nxt = [mp.mpc(0)] * (len(poly) + 1)
        for i, c in enumerate(poly):
            nxt[i] += c
            nxt[i + 1] -= c * r
        poly = nxt
    h = [mp.re(c) for c in poly]
    s = sum(h)
    h = [c * mp.sqrt(2) / s for c in h]
    return h


# Only lengths 4 and 8 give a nonnegative |H|^2 under the G(0) = 1 renormalisation.
for L in (4, 8):
    h = fk_filter(L)
    ortho = max(abs(sum(h[i] * h[i + 2 * m] for i in range(L - 2 * m))) for m in range(1, L // 2))
    print(f"// fk{L}: sum^2-1={float(sum(c*c for c in h)-1):.2e} shift-ortho={float(ortho):.2e}")
    print("{" + ", ".join(mp.nstr(c, 20) for c in h) + "}")
