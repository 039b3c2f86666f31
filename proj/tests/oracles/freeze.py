#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
"""Regenerates frozen_values.hpp with 30-digit mpmath reference values.

Run from this directory: python3 freeze.py > frozen_values.hpp
"""
import mpmath as mp

mp.mp.dps = 30


def hbar(p, x):
    p, x = mp.mpf(p), mp.mpf(x)
    if x == 0:
        return mp.log(1 / (1 - p))
    if x == 1:
        return mp.log(1 / p)
    return x * mp.log(x / p) + (1 - x) * mp.log((1 - x) / (1 - p))


def beta_mgf(beta, theta):
    # E[exp(theta s)] for density beta s^(beta-1) on [0,1] is Kummer's 1F1.
    beta, theta = mp.mpf(beta), mp.mpf(theta)
    return mp.hyp1f1(beta, beta + 1, theta)


def beta_log_mgf(beta, theta):
    return mp.log(beta_mgf(beta, theta))


def beta_log_mgf_prime(beta, theta):
    beta, theta = mp.mpf(beta), mp.mpf(theta)
    return beta / (beta + 1) * mp.hyp1f1(beta + 1, beta + 2, theta) / beta_mgf(beta, theta)


def affine_shape(d):
    m = mp.mpf("0.2") - mp.mpf("0.1") * (d - mp.mpf("0.08"))
    return 1 / m - 1


def loss_rate(beta, x):
    # sup_theta { theta x - M(theta) } via the stationarity equation.
    theta = mp.findroot(lambda t: beta_log_mgf_prime(beta, t) - x, 0)
    return theta * x - beta_log_mgf(beta, theta), theta


def single_type_rate(ell):
    # inf_D { hbar_p(D) + D I(ell / D, D) } for the one-type affine pool.
    ell = mp.mpf(ell)

    def objective(d):
        return hbar("0.08", d) + d * loss_rate(affine_shape(d), ell / d)[0]

    a, b = ell + mp.mpf("0.01"), mp.mpf("0.6")
    g = (mp.sqrt(5) - 1) / 2
    x1, x2 = b - g * (b - a), a + g * (b - a)
    f1, f2 = objective(x1), objective(x2)
    while b - a > mp.mpf("1e-14"):
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - g * (b - a)
            f1 = objective(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + g * (b - a)
            f2 = objective(x2)
    d = (a + b) / 2
    return objective(d), d, loss_rate(affine_shape(d), ell / d)[1]


def binom_tail(n, p, k0):
    p = mp.mpf(p)
    return mp.fsum(mp.binomial(n, k) * p ** k * (1 - p) ** (n - k) for k in range(k0, n + 1))


def emit(name, value):
    print(f"inline constexpr double {name} = {mp.nstr(value, 20, min_fixed=-30, max_fixed=30)};")


print("// SPDX-License-Identifier: Apache-2.0")
print("// Generated by freeze.py; do not edit.")
print("#pragma once")
print()
print("namespace frozen {")
for p, x, tag in [("0.08", "0.5", "p08_x5"), ("0.08", "0.1", "p08_x1"), ("0.08", "0.4", "p08_x4"),
                  ("0.08", "0.125", "p08_x125"), ("0.08", "0.25", "p08_x25"), ("0.08", "0", "p08_x0"),
                  ("0.08", "1", "p08_one"), ("0.3", "0.9", "p3_x9")]:
    emit(f"hbar_{tag}", hbar(p, x))
emit("lambda_p08_t2", mp.log(mp.mpf("0.08") * mp.e ** 2 + mp.mpf("0.92")))
for beta, theta, tag in [(4, 1, "b4_t1"), ("0.25", -3, "b025_tm3"), ("2.5", 7, "b25_t7"), (9, -40, "b9_tm40"),
                         ("0.5", 60, "b05_t60")]:
    emit(f"log_mgf_{tag}", beta_log_mgf(beta, theta))
    emit(f"log_mgf_prime_{tag}", beta_log_mgf_prime(beta, theta))
emit("binom_tail_25_10", binom_tail(25, "0.08", 10))
emit("binom_all_10", mp.mpf("0.08") ** 10)
for n in [50, 100, 200, 400, 800]:
    emit(f"binom_tail_{n}_ldp", binom_tail(n, "0.08", int(mp.ceil(n * mp.mpf("0.4")))))
rate, d, theta = single_type_rate("0.2")
emit("case2_rate_02", rate)
emit("case2_dstar_02", d)
emit("case2_lambda1_02", theta)
print("}  // namespace frozen")
