"""Scalar impulsive system: hybrid dynamics and the behavior table.

The system

    x'(t) = (A - 1) x([t]),    x(k) = C x(k^-),

with [t] the greatest-integer function, is 1-periodic.  Over one interval
the state moves linearly, then the impulse rescales it, so the period map
is the single number A*C.  This script reproduces the closed-form solution
x(t) = (AC)^[t] (1 + (A-1)(t - [t])) x0 and walks the product AC through
every qualitative regime.
"""

import numpy as np

import idepcag as pk

A, C = -0.3, 10.0 / 3.0
system = pk.load_bundled_system("scalar_impulse")

print("monodromy X(1) =", pk.monodromy(system)[0, 0], " (A*C =", A * C, ")")

report = pk.analyze(system)
print("verdict:", report.verdict, " oscillatory:", report.oscillatory)
print("multiplier:", report.multipliers[0], " exponent:", report.exponents[0])

# trajectory from the figure's initial value: a 2-periodic sawtooth
traj = pk.solve_cauchy(system, [6.0], 6.0, 0.25)
print("\n t      x(t)         closed form")
for t, kind, x in zip(traj.times, traj.kinds, traj.states):
    if kind != "sample" or t % 0.5:
        continue
    k = np.floor(t)
    closed = (A * C) ** k * (1.0 + (A - 1.0) * (t - k)) * 6.0
    print(f"{t:5.2f}  {x[0].real:+.6f}    {closed:+.6f}")

# the period map AC decides everything; sweep it through the table rows
print("\nAC      verdict                 oscillatory")
for ac in (-1.5, -1.0, -0.5, 0.5, 1.0, 1.5):
    doc = pk.bundled_system_path("scalar_table_template").read_text()
    row = pk.load_system(doc.replace("$AC", repr(ac)))
    r = pk.analyze(row)
    print(f"{ac:+.1f}    {str(r.verdict):22s}  {r.oscillatory}")
