#!/usr/bin/env python3
# Copyright 2026 The LCaaS Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Writes stats_oracle.hpp: fixed samples and the values numpy/scipy compute for them.

Usage: python3 gen_stats_oracle.py > stats_oracle.hpp
"""

import math

import numpy as np
from scipy import special, stats


def series(n, f):
    return [round(f(i), 6) for i in range(n)]


def ks_asymptotic(a, b):
    d = stats.ks_2samp(a, b).statistic
    ne = len(a) * len(b) / (len(a) + len(b))
    lam = (math.sqrt(ne) + 0.12 + 0.11 / math.sqrt(ne)) * d
    return d, special.kolmogorov(lam)


def arr(name, xs):
    body = ", ".join(repr(float(v)) for v in xs)
    return f"inline const std::vector<double> {name}{{{body}}};"


def val(name, v):
    return f"inline constexpr double {name} = {float(v)!r};"


x = series(40, lambda i: math.sin(i * 0.7) * 10 + i * 0.5)
y = series(40, lambda i: math.cos(i * 1.3) * 4 + i * 0.8 + (i % 3))
t = [float((i * 7) % 5) for i in range(40)]
a = series(50, lambda i: math.sin(i * 2.1) * 3 + 10)
b = series(35, lambda i: math.cos(i * 0.9) * 3.5 + 10.4)
big_a = series(600, lambda i: math.sin(i * 2.1) * 3 + 10)
big_b = series(700, lambda i: math.cos(i * 0.9) * 3.5 + 11.2)

out = [
    "// Copyright 2026 The LCaaS Authors\n// SPDX-License-Identifier: Apache-2.0\n// Generated by gen_stats_oracle.py; do not edit.",
    "#pragma once",
    "#include <vector>",
    "namespace oracle {",
    arr("x", x),
    arr("y", y),
    arr("ties", t),
    arr("ks_a", a),
    arr("ks_b", b),
    arr("ks_big_a", big_a),
    arr("ks_big_b", big_b),
    val("mean_x", np.mean(x)),
    val("median_x", np.median(x)),
]
for p in (0, 5, 25, 50, 90, 95, 99.9, 100):
    out.append(val(f"pct_x_{str(p).replace('.', '_')}", np.percentile(x, p)))
out.append(val("pearson_xy", stats.pearsonr(x, y)[0]))
out.append(val("spearman_xy", stats.spearmanr(x, y)[0]))
out.append(val("pearson_ties_y", stats.pearsonr(t, y)[0]))
out.append(val("spearman_ties_y", stats.spearmanr(t, y)[0]))
for tag, xs in (("xy", x), ("ties_y", t)):
    lr = stats.linregress(xs, y)
    out += [val(f"fit_{tag}_slope", lr.slope), val(f"fit_{tag}_intercept", lr.intercept),
            val(f"fit_{tag}_r2", lr.rvalue ** 2), val(f"fit_{tag}_p", lr.pvalue)]
for tag, (p, q) in (("ab", (a, b)), ("big", (big_a, big_b))):
    d, pv = ks_asymptotic(p, q)
    out += [val(f"ks_{tag}_d", d), val(f"ks_{tag}_p", pv)]
out.append("struct QPoint { double lambda; double q; };")
out.append("inline const std::vector<QPoint> kolmogorov_q{" +
           ", ".join(f"{{{l!r}, {float(special.kolmogorov(l))!r}}}" for l in (0.2, 0.5, 1.0, 1.36, 2.0, 3.0)) + "};")
out.append("struct TPoint { double t; double df; double p; };")
out.append("inline const std::vector<TPoint> student_t{" +
           ", ".join(f"{{{tt!r}, {df!r}, {float(2 * stats.t.sf(tt, df))!r}}}"
                     for tt, df in ((2.0, 10.0), (0.5, 3.0), (4.2, 38.0), (1e-3, 5.0))) + "};")
out.append("struct BetaPoint { double a; double b; double x; double value; };")
out.append("inline const std::vector<BetaPoint> incomplete_beta{" +
           ", ".join(f"{{{p!r}, {q!r}, {z!r}, {float(special.betainc(p, q, z))!r}}}"
                     for p, q, z in ((2.5, 0.5, 0.3), (10.0, 3.0, 0.8), (19.0, 0.5, 0.95))) + "};")
out.append("}  // namespace oracle")
print("\n".join(out))
