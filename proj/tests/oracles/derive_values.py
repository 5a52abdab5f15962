"""Reference values for the unit tests, computed at 50 digits with mpmath.

Run once; the printed numbers are frozen into tests/unit/*.cpp. Each map is
written from its closed-form definition (polyspherical angles, stick
breaking, Wilson-Hilferty), not from the library's stabilized formulas.
"""

import mpmath as mp

mp.mp.dps = 50


def show(label, x):
    print(f"{label} = {mp.nstr(x, 17, min_fixed=-5, max_fixed=5)}")


def expit(x):
    return 1 / (1 + mp.exp(-x))


def ndtr(x):
    return mp.ncdf(x)


def ndtri(p):
    # root of ncdf(z) = p in log space; erfinv(2p-1) would lose tiny p
    if p > 0.5:
        return -ndtri(1 - p)
    guess = -mp.sqrt(-2 * mp.log(p)) if p < 0.1 else mp.sqrt(2) * mp.erfinv(2 * p - 1)
    return mp.findroot(lambda z: mp.log(mp.ncdf(z)) - mp.log(p), guess)


def logistic_to_gaussian(x):
    z = -ndtri(expit(-abs(x)))
    return z if x >= 0 else -z


def gaussian_to_logistic(z):
    return mp.log(mp.ncdf(z)) - mp.log(mp.ncdf(-z))


def simplex(x):
    # stick breaking: u_k = expit(-x_k) ** (1/(n-k)) is the fraction kept
    n = len(x)
    rest = mp.mpf(1)
    out = []
    for k, xk in enumerate(x):
        keep = expit(-xk) ** (mp.mpf(1) / (n - k))
        out.append(rest * (1 - keep))
        rest *= keep
    out.append(rest)
    return out


def sphere(x, half=False):
    n = len(x)
    ang = []
    for k, xk in enumerate(x):
        c = mp.sqrt(2 * (n - k) - 1)
        a = mp.pi / 2 * (2 if (k == n - 1 and not half) else 1)
        ang.append(a * mp.tanh(xk / (2 * c)))
    # polyspherical: v_0 = sin a_0, v_k = cos a_0..cos a_{k-1} sin a_k, last = prod cos
    out = []
    prod = mp.mpf(1)
    for a in ang:
        out.append(prod * mp.sin(a))
        prod *= mp.cos(a)
    out.append(prod)
    return out


def wh_cdf(n, y):
    if n == 2:
        return 1 - mp.exp(-y / 2)
    m = mp.cbrt(n) * (1 - mp.mpf(2) / (9 * n))
    s = mp.sqrt(mp.mpf(2) / (9 * mp.cbrt(n)))
    t = mp.log(mp.expm1(4 * mp.cbrt(y))) / 4
    return ndtr((t - m) / s)


def ball(x):
    g = [logistic_to_gaussian(v) for v in x]
    q = sum(v * v for v in g)
    f = wh_cdf(len(x), q) ** (mp.mpf(1) / len(x)) / mp.sqrt(q)
    return [v * f for v in g]


def spd(x):
    n = int((mp.sqrt(8 * len(x) + 1) - 1) / 2)
    L = mp.zeros(n, n)
    p = n
    for i in range(n):
        L[i, i] = mp.log(1 + mp.exp(x[i]))
        for j in range(i):
            L[i, j] = x[p]
            p += 1
    for i in range(n):
        for j in range(i + 1):
            L[i, j] /= mp.sqrt(i + 1)
    return L * L.T


def student_logpdf(x, mu, S, nu):
    p = len(mu)
    d = mp.matrix([x[i] - mu[i] for i in range(p)])
    q = (d.T * mp.inverse(S) * d)[0]
    return (mp.loggamma((nu + p) / 2) - mp.loggamma(nu / 2) - p / 2 * mp.log(nu * mp.pi)
            - mp.log(mp.det(S)) / 2 - (nu + p) / 2 * mp.log(1 + q / nu))


print("# special functions")
for v in ["1", "0.5", "-2", "3", "5.5"]:
    show(f"erf({v})", mp.erf(mp.mpf(v)))
for v in ["5", "10", "26"]:
    show(f"erfc({v})", mp.erfc(mp.mpf(v)))
for v in ["0.5", "-0.3", "0.999999", "1e-10"]:
    show(f"erfinv({v})", mp.erfinv(mp.mpf(float(v))))  # exact double input
show("erfinv(1-2^-40)", mp.erfinv(1 - mp.mpf(2) ** -40))
for v in ["0", "5", "-1", "-10", "-37", "-40", "-100"]:
    show(f"log_ndtr({v})", mp.log(ndtr(mp.mpf(v))))
for v in ["1e-300", "0.025", "0.975", "1e-20"]:
    show(f"ndtri({v})", ndtri(mp.mpf(v)))
for v in ["3", "-20", "700", "0.25"]:
    show(f"logistic_to_gaussian({v})", logistic_to_gaussian(mp.mpf(v)))
for v in ["2.3", "-8", "30", "0.5"]:
    show(f"gaussian_to_logistic({v})", gaussian_to_logistic(mp.mpf(v)))
for v in ["-40", "0", "40", "800", "-800"]:
    show(f"log1pexp({v})", mp.log(1 + mp.exp(mp.mpf(v))))
for v in ["1e-10", "2.4", "50"]:
    show(f"logexpm1({v})", mp.log(mp.expm1(mp.mpf(v))))
show("softplusinv(0.3)", mp.log(mp.expm1(mp.mpf("0.3"))))
show("interval(-1.2,(0,12))", 12 * expit(mp.mpf("-1.2")))

print("# chi2 / gamma")
for n, y in [(1, "1"), (5, "3"), (20, "25"), (3, "0.1"), (2, "1")]:
    show(f"chi2_cdf({n},{y})", mp.gammainc(mp.mpf(n) / 2, 0, mp.mpf(y) / 2, regularized=True))
for v in ["0.5", "7.3", "100.5"]:
    show(f"lgamma({v})", mp.loggamma(mp.mpf(v)))
show("digamma(3.5)", mp.digamma(mp.mpf("3.5")))
show("trigamma(3.5)", mp.psi(1, mp.mpf("3.5")))
show("digamma(0.3)", mp.digamma(mp.mpf("0.3")))
show("trigamma(0.3)", mp.psi(1, mp.mpf("0.3")))

print("# vector maps")
for x in [["2", "1"], ["-0.5", "0.5", "1"], ["-30", "25", "0.1", "3"]]:
    print("simplex", x, [mp.nstr(v, 17) for v in simplex([mp.mpf(t) for t in x])])
for x in [["0.7", "-1.3"], ["3", "-5", "9"], ["-36", "36"]]:
    print("sphere", x, [mp.nstr(v, 17) for v in sphere([mp.mpf(t) for t in x])])
    print("halfsphere", x, [mp.nstr(v, 17) for v in sphere([mp.mpf(t) for t in x], half=True)])
for x in [["1", "1"], ["-3", "0.2", "0.1"], ["4", "-2", "7", "0.5", "-1"]]:
    print("ball", x, [mp.nstr(v, 17) for v in ball([mp.mpf(t) for t in x])])
for n, y in [(3, "2"), (5, "7.5"), (10, "30")]:
    show(f"wh_cdf({n},{y})", wh_cdf(n, mp.mpf(y)))

print("# matrices")
M = spd([mp.mpf(t) for t in ["1.5373", "1.9485", "0.1972", "0.8165", "1.5", "-1.765"]])
print("spd anchor x ->", [[mp.nstr(M[i, j], 17) for j in range(3)] for i in range(3)])
M = spd([mp.mpf(t) for t in ["-0.5", "0.5", "1", "-1", "0", "1.5"]])
print("spd(-0.5,0.5,1,-1,0,1.5) ->", [[mp.nstr(M[i, j], 17) for j in range(3)] for i in range(3)])

print("# likelihoods")
S = mp.matrix([[2, 1, 1], [1, 2, 1.5], [1, 1.5, 2]])
show("student_logpdf((0.3,-1,2.5),(0,1,2),S,7)",
     student_logpdf([mp.mpf("0.3"), -1, mp.mpf("2.5")], [0, 1, 2], S, mp.mpf(7)))
show("student_logpdf(p=1,x=0,nu=1)", student_logpdf([0], [0], mp.matrix([[1]]), mp.mpf(1)))

print("# simplex limit inputs, n = 5: x_j = -40 (j < k), x_k = 40, rest 0")
for k in range(6):
    x = [mp.mpf(0)] * 5
    for j in range(min(k, 5)):
        x[j] = -40
    if k < 5:
        x[k] = 40
    show(f"simplex_limit_w[{k}]", simplex(x)[k])

print("# spd(3) shape 4, x = linspace(-3, 3, 24): min eigenvalue per slice")
xs = [mp.mpf(-3) + 6 * mp.mpf(i) / 23 for i in range(24)]
for s in range(4):
    M = spd(xs[6 * s:6 * s + 6])
    ev, _ = mp.eigsy(M)
    show(f"spd_linspace_min_eig[{s}]", min(ev))

print("# xoshiro256++ seeded by splitmix64, written from the published reference")
M64 = (1 << 64) - 1


def splitmix(state):
    state = (state + 0x9E3779B97F4A7C15) & M64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M64
    return state, z ^ (z >> 31)


def rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & M64


def xoshiro(seed, count):
    s, sm = [], seed
    for _ in range(4):
        sm, w = splitmix(sm)
        s.append(w)
    out = []
    for _ in range(count):
        out.append((rotl((s[0] + s[3]) & M64, 23) + s[0]) & M64)
        t = (s[1] << 17) & M64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = rotl(s[3], 45)
    return out


for seed in [0, 12345]:
    print(f"xoshiro({seed}) =", ", ".join(f"0x{v:016x}ull" for v in xoshiro(seed, 5)))
