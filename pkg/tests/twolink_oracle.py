"""Closed-form planar two-link dynamics, written independently of the library.

Standard textbook result for two revolute joints rotating about world z with
links along x at q = 0, gravity acting along -y. Angles are absolute-relative
(q2 measured from link 1), coms at distance c_i from each joint, rod inertias
I_i about the com z axis.
"""

import numpy as np


def mass_matrix_2l(q, m1, m2, l1, c1, c2, i1, i2):
    q2 = q[1]
    m11 = (
        m1 * c1**2
        + i1
        + m2 * (l1**2 + c2**2 + 2.0 * l1 * c2 * np.cos(q2))
        + i2
    )
    m12 = m2 * (c2**2 + l1 * c2 * np.cos(q2)) + i2
    m22 = m2 * c2**2 + i2
    return np.array([[m11, m12], [m12, m22]])


def coriolis_matrix_2l(q, qd, m2, l1, c2):
    h = -m2 * l1 * c2 * np.sin(q[1])
    return np.array([
        [h * qd[1], h * (qd[0] + qd[1])],
        [-h * qd[0], 0.0],
    ])


def gravity_vector_2l(q, m1, m2, l1, c1, c2, g=9.81):
    g1 = (m1 * c1 + m2 * l1) * g * np.cos(q[0]) + m2 * c2 * g * np.cos(q[0] + q[1])
    g2 = m2 * c2 * g * np.cos(q[0] + q[1])
    return np.array([g1, g2])


def fk_2l(q, l1, l2):
    x = l1 * np.cos(q[0]) + l2 * np.cos(q[0] + q[1])
    y = l1 * np.sin(q[0]) + l2 * np.sin(q[0] + q[1])
    return np.array([x, y])


def jacobian_2l(q, l1, l2):
    s1, c1 = np.sin(q[0]), np.cos(q[0])
    s12, c12 = np.sin(q[0] + q[1]), np.cos(q[0] + q[1])
    return np.array([
        [-l1 * s1 - l2 * s12, -l2 * s12],
        [l1 * c1 + l2 * c12, l2 * c12],
    ])
