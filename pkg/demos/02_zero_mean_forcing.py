"""Zero-mean forcing: the impulse gain alone decides stability.

For z'(t) = sin(2 pi t) z([t]) with z(k) = c z(k^-), the forcing has zero
mean over each interval, so the continuous part contributes nothing to the
period map and the monodromy equals the gain c.  Four gains, four fates.
"""

import json
import math

import idepcag as pk

base = json.loads(pk.bundled_system_path("sin_impulse").read_text())

print("gain c    X(1)        Lyapunov     verdict")
for c in (-4.0 / 5.0, 1.1, -1.0, 1.0):
    base["impulses"] = [[[c - 1.0]]]
    system = pk.load_system(json.dumps(base))
    report = pk.analyze(system)
    print(f"{c: 7.3f}  {report.monodromy[0,0]: .6f}  {report.lyapunov[0]: .6f}   {report.verdict}")

# the non-impulsive gain c = 1 has the explicit 1-periodic solution
# z(t) = 1 + (1 - cos 2 pi t) / 2 pi; compare the periodic factor Q
base["impulses"] = [[[0.0]]]
system = pk.load_system(json.dumps(base))
P = pk.floquet_P(pk.monodromy(system), 1.0)
print("\nP for c = 1:", P[0, 0], "(vanishing generator: the solution itself is periodic)")
print("\n t     Q(t)        1 + (1 - cos 2 pi t)/(2 pi)")
for i in range(9):
    t = i / 8.0
    q = pk.q_factor(system, P, t)[0, 0].real
    closed = 1.0 + (1.0 - math.cos(2.0 * math.pi * t)) / (2.0 * math.pi)
    print(f"{t:4.2f}  {q:.8f}  {closed:.8f}")

# Lyapunov exponent for the decaying gain matches ln|c| exactly
print("\nln(4/5) =", math.log(4.0 / 5.0))
