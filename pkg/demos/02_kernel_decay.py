"""
How fast the diffusive kernel decays
====================================

Sample |phi(t, omega)| for the exponential transform and fit the slopes of
log|phi| in both tails. These rates are what make a short quadrature rule
possible.
"""

import numpy as np

from diffrep import builtin_source, make_order, transforms
from diffrep.oracle import fit_log_slope, phi_decay_probe

spec = transforms.exp()
f = builtin_source("const")
omegas = np.linspace(-12, 12, 97)

curves = {}
for alpha in (0.25, 0.5, 1.5):
    order = make_order(alpha)
    pairs = phi_decay_probe(order, spec, f, 0.0, 1.0, omegas)
    mag = np.array([m for _, m in pairs])
    curves[alpha] = mag
    up = omegas >= 6
    lo = omegas <= -6
    print(
        f"alpha={alpha}: upper slope {fit_log_slope(omegas[up], mag[up]):+.4f} "
        f"(expect {-alpha:+.2f}), lower slope {fit_log_slope(omegas[lo], mag[lo]):+.4f} "
        f"(expect {order.n - alpha:+.2f})"
    )

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    fig, ax = plt.subplots(figsize=(6, 4))
    for alpha, mag in curves.items():
        ax.semilogy(omegas, mag, label=f"alpha={alpha}")
    ax.set_xlabel("omega")
    ax.set_ylabel("|phi(1, omega)|")
    ax.legend()
    fig.tight_layout()
    fig.savefig("kernel_decay.png", dpi=120)
    print("wrote kernel_decay.png")
