#!/usr/bin/env python3
"""Independent reference implementation of the 1-decoy finite-key bounds.

Run this script to regenerate the frozen constants asserted in
tests/test_keyrate.cpp (the "oracle-frozen" test case). It shares no code
with the C++ implementation; keep it that way so the two can be reconciled
against each other.
"""

import math

# --- fixed evaluation point (mirrored literally in test_keyrate.cpp) -------
MU1, MU2, P_MU1 = 0.24, 0.11, 0.7
EPS_SEC, EPS_CORR = 1e-9, 1e-12

COUNTS = dict(
    n_z_mu1=1_503_956, n_z_mu2=296_044,
    n_x_mu1=122_451, n_x_mu2=24_273,
    m_x_mu1=2_997, m_x_mu2=698,
    m_z_mu1=19_248, m_z_mu2=4_039,
)
LAMBDA_EC = 229_100.0


def tau(n):
    return (P_MU1 * math.exp(-MU1) * MU1**n +
            (1.0 - P_MU1) * math.exp(-MU2) * MU2**n) / math.factorial(n)


def basis_stats(n1, n2, m1, m2):
    """Hoeffding-corrected per-intensity estimates n_k^± = (e^mu_k/p_k)(n_k ± delta(n_k))."""
    log_term = math.log(19.0 / EPS_SEC)
    d = lambda n: math.sqrt(n / 2.0 * log_term)
    c1, c2 = math.exp(MU1) / P_MU1, math.exp(MU2) / (1.0 - P_MU1)
    return dict(
        n1p=c1 * (n1 + d(n1)), n1m=c1 * max(0.0, n1 - d(n1)),
        n2p=c2 * (n2 + d(n2)), n2m=c2 * max(0.0, n2 - d(n2)),
        m1p=c1 * (m1 + d(m1)), m2p=c2 * (m2 + d(m2)),
        m2m=c2 * max(0.0, m2 - d(m2)),
    )


def s0_lower(st):
    return max(0.0, tau(0) / (MU1 - MU2) * (MU1 * st["n2m"] - MU2 * st["n1p"]))


def s0_upper(st, n_total):
    return min(2.0 * tau(0) * st["m2p"], n_total)


def s1_lower(st, s0_up):
    coef = tau(1) * MU1 / (MU2 * (MU1 - MU2))
    inner = (st["n2m"] - (MU2**2 / MU1**2) * st["n1p"] -
             ((MU1**2 - MU2**2) / MU1**2) * s0_up / tau(0))
    return max(0.0, coef * inner)


def v1_upper(st):
    return max(0.0, tau(1) / (MU1 - MU2) * (st["m1p"] - st["m2m"]))


def gamma(a, b, c, d):
    if b <= 0.0:
        return 0.0
    if b >= 1.0 or c <= 0.0 or d <= 0.0:
        return 0.5
    t1 = (c + d) * (1.0 - b) * b / (c * d * math.log(2.0))
    arg = (c + d) / (c * d * (1.0 - b) * b) * 21.0**2 / a**2
    if arg <= 1.0:
        return 0.0
    return math.sqrt(t1 * math.log2(arg))


def h2(x):
    if x <= 0.0 or x >= 1.0:
        return 0.0
    return -x * math.log2(x) - (1 - x) * math.log2(1 - x)


def main():
    c = COUNTS
    z = basis_stats(c["n_z_mu1"], c["n_z_mu2"], c["m_z_mu1"], c["m_z_mu2"])
    x = basis_stats(c["n_x_mu1"], c["n_x_mu2"], c["m_x_mu1"], c["m_x_mu2"])

    s_z0 = s0_lower(z)
    s_z0_up = s0_upper(z, c["n_z_mu1"] + c["n_z_mu2"])
    s_z1 = s1_lower(z, s_z0_up)
    s_x0_up = s0_upper(x, c["n_x_mu1"] + c["n_x_mu2"])
    s_x1 = s1_lower(x, s_x0_up)
    v_x1 = v1_upper(x)
    ratio = v_x1 / s_x1
    phi = min(0.5, max(0.0, ratio + gamma(EPS_SEC, ratio, s_x1, s_z1)))

    overhead = 6.0 * math.log2(19.0 / EPS_SEC) + math.log2(2.0 / EPS_CORR)
    l = math.floor(s_z0 + s_z1 * (1.0 - h2(phi)) - LAMBDA_EC - overhead)

    print(f"s_z0_lower  = {s_z0:.6f}")
    print(f"s_z1_lower  = {s_z1:.6f}")
    print(f"s_x1_lower  = {s_x1:.6f}")
    print(f"v_x1_upper  = {v_x1:.6f}")
    print(f"phi_z_upper = {phi:.12f}")
    print(f"overhead    = {overhead:.6f}")
    print(f"l_secret    = {l}")


if __name__ == "__main__":
    main()
