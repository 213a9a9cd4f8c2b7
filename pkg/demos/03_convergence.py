"""
Two sources of error
====================

The result carries a time-stepping error, controlled by N, and a quadrature
error in omega, controlled by M_half. Each can be driven down with the other
held fixed.
"""

import numpy as np

from diffrep import TimeGrid, builtin_source, evaluate_on_grid, make_order, transforms
from diffrep.fractional import rl_power_closed_form

order = make_order(0.5)
spec = transforms.exp()
f = builtin_source("poly:1")
exact = rl_power_closed_form(order, 1.0, 0.0, 1.0)

print("time stepping, M_half=60")
print("   N     backward Euler        trapezoidal")
prev = None
for n in (64, 128, 256, 512, 1024):
    grid = TimeGrid.uniform_grid(0.0, 1.0, n)
    errs = [abs(evaluate_on_grid(order, spec, f, grid, 60, s)[-1] - exact) for s in ("be", "trap")]
    line = f"{n:5d}   {errs[0]:.3e}"
    if prev is not None:
        line += f" ({np.log2(prev[0] / errs[0]):.2f})"
    line += f"   {errs[1]:.3e}"
    if prev is not None:
        line += f" ({np.log2(prev[1] / errs[1]):.2f})"
    print(line)
    prev = errs

print("\nquadrature, f=1, N=16384")
one = builtin_source("const")
exact_one = rl_power_closed_form(order, 0.0, 0.0, 1.0)
grid = TimeGrid.uniform_grid(0.0, 1.0, 16384)
for m in (5, 10, 20, 40):
    err = abs(evaluate_on_grid(order, spec, one, grid, m)[-1] - exact_one) / exact_one
    print(f"M_half={m:3d}   rel. error {err:.2e}")

# near t = a the relative error is not small: the start-up of the stepper and
# a rule sized for the whole horizon both act on the first few points, and
# on a uniform grid that error does not shrink with h
grid = TimeGrid.uniform_grid(0.0, 1.0, 4096)
values = evaluate_on_grid(order, spec, one, grid, 60)
exact_grid = np.array([rl_power_closed_form(order, 0.0, 0.0, t) for t in grid.points])
rel = np.abs(values - exact_grid) / exact_grid
print("\nf=1, relative error at the first grid points:", rel[:4])
print("relative error at t=1:", rel[-1])
