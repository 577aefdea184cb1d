"""Walk the weighting factors through three situations, no simulation.

Prints how the five factors move the two stiffness levels as a hand
approaches, as contact force builds, and as somebody pushes on the arm
body. Distances in meters, forces in newtons.
"""

import numpy as np

from intentctl.controller import K1G_DEFAULT, K2G_DEFAULT, schedule_stiffness
from intentctl.weighting import FactorParams, PerceptionSnapshot, compute_factors

params = FactorParams()
j1 = np.zeros((6, 7))
j1[:, 0] = [0.4, 0.1, 0.0, 0.0, 0.0, 1.0]  # only joint 1 matters here

ROW = "{:>10} {:>7} {:>7} {:>7} {:>7} {:>7} {:>9} {:>9}"


def show(label, snap):
    f = compute_factors(snap, params, j1)
    imp = schedule_stiffness(f, k1g=K1G_DEFAULT, k2g=K2G_DEFAULT)
    print(ROW.format(label, f"{f.a_h:.2f}", f"{f.a_p:.2f}", f"{f.a_f:.2f}",
                     f"{f.a_n:.2f}", f"{f.a_b:.2f}",
                     f"{imp.K1[0, 0]:.1f}", f"{imp.K2:.2f}"))


def snap(d_h=1.0, d_b=1.0, d_p=(0.0, 0.3, 0.3), f_z=0.0, tau1=0.0):
    tau_e = np.zeros(7)
    tau_e[0] = tau1
    return PerceptionSnapshot(d_h=d_h, d_b=d_b, d_p=np.array(d_p),
                              f_z_E=f_z, tau_e=tau_e, F_1e=np.zeros(6))


print(ROW.format("situation", "a_h", "a_p", "a_f", "a_n", "a_b", "k1", "k2"))

print("-- hand approaches the probe")
for d in (0.5, 0.2, 0.1, 0.05, 0.02):
    show(f"hand {d}", snap(d_h=d))

print("-- probe presses on the neck (inside the scan region)")
for f in (0.0, 5.0, 10.0, 15.0, 25.0):
    show(f"push {f}", snap(d_p=(0.0, 0.0, 0.046), f_z=f))

print("-- doctor leans on the arm body")
for torque in (0.0, 1.0, 2.0, 4.0):
    show(f"lean {torque}", snap(d_b=0.1, tau1=torque))

print("\nk1 collapses when a hand, contact, or the patient is close;")
print("k2 collapses only for body proximity plus felt torque, so the")
print("elbow yields while the probe holds its task.")
