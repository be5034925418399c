"""Independent high-precision reference values frozen into the test suite.

Uses mpmath only (no symdiv imports). Run ``python3 tests/oracles/compute_oracles.py``
to regenerate; each printed line is ``name = value``.
"""

import mpmath as mp

mp.mp.dps = 30


def po_g(alpha):
    return lambda u: alpha / (1 + (alpha - 1) * u) ** 2


def renyi_unit(g, q):
    if q == 1:
        return mp.quad(lambda u: g(u) * mp.log(g(u)), [0, 1])
    return mp.log(mp.quad(lambda u: g(u) ** q, [0, 1])) / (q - 1)


def kl_po_null(x):
    return mp.quad(lambda u: po_g(mp.e ** x)(u) * mp.log(po_g(mp.e ** x)(u)), [0, 1])


def main():
    out = {}
    p = mp.mpf("0.25")
    # piecewise-uniform link density: (1-p)/p on [0, p], p/(1-p) on (p, 1]
    g_lo, g_hi = (1 - p) / p, p / (1 - p)
    out["pw_uniform_entropy_p025"] = p * g_lo * mp.log(g_lo) + (1 - p) * g_hi * mp.log(g_hi)
    out["normal_q975"] = mp.findroot(lambda x: mp.ncdf(x) - mp.mpf("0.975"), 2)
    out["weibull2_mean"] = mp.quad(lambda x: mp.e ** (-x ** 2), [0, mp.inf])
    a = mp.mpf(2)
    out["po2_ed_parent_mean"] = mp.quad(lambda x: a ** 2 * mp.e ** -x / (1 - (1 - a) * mp.e ** -x) ** 2, [0, mp.inf])
    f2 = 1 - mp.e ** -1
    out["gll_logit_exp1_theta1_x1"] = 1 / (1 + mp.e ** -(mp.log(f2 / (1 - f2)) + 1))
    out["renyi_po_a2_q2"] = renyi_unit(po_g(mp.mpf(2)), 2)
    out["renyi_po_a2_qhalf"] = renyi_unit(po_g(mp.mpf(2)), mp.mpf("0.5"))
    out["kl_po_null_2.305"] = kl_po_null(mp.mpf("2.305"))
    out["kl_po_null_-8.753"] = kl_po_null(mp.mpf("-8.753"))
    out["kl_po_null_log2"] = kl_po_null(mp.log(2))
    out["kl_po_null_11.61"] = kl_po_null(mp.mpf("11.61"))
    out["kl_po_null_1.633"] = kl_po_null(mp.mpf("1.633"))
    # power link pi=2: g = 2u
    out["power2_forward"] = renyi_unit(lambda u: 2 * u, 1)
    out["power2_reverse"] = -mp.quad(lambda u: mp.log(2 * u), [0, 1])
    out["laplace_shift1"] = mp.quad(
        lambda v: 0.5 * mp.e ** -abs(v) * (abs(v + 1) - abs(v)), [-mp.inf, -1, 0, mp.inf]
    )
    r = mp.mpf("0.6")
    out["gauss_mi_06"] = -mp.log(1 - r ** 2) / 2
    out["gauss_khalf_06"] = -2 * mp.log((1 - r ** 2) ** mp.mpf(0.25) / mp.sqrt(1 - r ** 2 / 4))
    out["gauss_index_06"] = 1 - mp.e ** -out["gauss_khalf_06"]
    th = mp.mpf("0.5")
    c = lambda u, v: 1 + th * (1 - 2 * u) * (1 - 2 * v)
    out["fgm05_forward"] = mp.quad(lambda u, v: c(u, v) * mp.log(c(u, v)), [0, 1], [0, 1])
    out["fgm05_reverse"] = -mp.quad(lambda u, v: mp.log(c(u, v)), [0, 1], [0, 1])
    # equal-weight PO mixture, tilts e and 1/e, exponential(1) baseline at x=1
    s0 = mp.e ** -1
    sj = lambda al: al * s0 / (1 - (1 - al) * s0)
    out["mixture_e_inv_e_x1"] = (sj(mp.e) + sj(1 / mp.e)) / 2
    # scaled survival divergence between the PO(2) equilibrium parent and exponential(1), q=1
    s1 = lambda x: a ** 2 * mp.e ** -x / (1 - (1 - a) * mp.e ** -x) ** 2
    mu1 = out["po2_ed_parent_mean"]
    out["ed_kl_po2_exp_forward"] = mp.quad(lambda x: s1(x) / mu1 * mp.log((s1(x) / mu1) / mp.e ** -x), [0, mp.inf])
    out["ed_kl_po2_exp_reverse"] = mp.quad(lambda x: mp.e ** -x * mp.log(mp.e ** -x / (s1(x) / mu1)), [0, mp.inf])
    out["crkl_po2_forward"] = mp.quad(lambda x: s1(x) * mp.log(s1(x) / mp.e ** -x) + mp.e ** -x - s1(x), [0, mp.inf])
    out["crkl_po2_reverse"] = mp.quad(lambda x: mp.e ** -x * mp.log(mp.e ** -x / s1(x)) + s1(x) - mp.e ** -x, [0, mp.inf])
    for k, v in out.items():
        print(f"{k} = {mp.nstr(v, 15)}")


if __name__ == "__main__":
    main()
