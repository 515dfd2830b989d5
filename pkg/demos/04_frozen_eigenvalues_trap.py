"""Why pointwise eigenvalues cannot classify periodic systems.

The classic planar counterexample: A(t) is pi-periodic and its eigenvalues
are CONSTANT with real part -1/4, yet the system has the unbounded solution
exp(t/2) (-cos t, sin t).  Multipliers of the period map get it right where
the frozen spectrum gets it wrong.  (Here B = 0 and C = 0, so the machinery
degenerates to the classical Floquet setting.)
"""

import math

import numpy as np

import idepcag as pk

system = pk.load_bundled_system("markus_yamabe")

A0 = system.A.eval(0.0)
A1 = system.A.eval(1.234)
print("eigenvalues of A(0):    ", pk.eig(A0).eigenvalues)
print("eigenvalues of A(1.234):", pk.eig(A1).eigenvalues)
print("(constant, real part -1/4: looks asymptotically stable)")

report = pk.analyze(system)
print("\nFloquet multipliers of X(pi):", report.multipliers)
print("known solution gives x(t + pi) = -e^{pi/2} x(t):", -math.exp(math.pi / 2.0))
print("second multiplier from det X(pi) = e^{-pi/2}:    ", -math.exp(-math.pi))
print("verdict:", report.verdict)

# watch the growth directly
x0 = np.array([-1.0, 0.0])  # the known solution at t = 0
traj = pk.solve_cauchy(system, x0, 4.0 * math.pi, math.pi / 2.0)
print("\n t/pi    |x(t)|      e^{t/2}")
for t, kind, x in zip(traj.times, traj.kinds, traj.states):
    if kind != "sample":
        continue
    print(f" {t/math.pi:4.2f}   {np.linalg.norm(x):9.4f}   {math.exp(t/2.0):9.4f}")
