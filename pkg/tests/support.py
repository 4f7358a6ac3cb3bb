"""Shared helpers for the optimizer tests: building the expansion-point
vector of a subproblem so tangency and own-point feasibility can be checked
arithmetically."""

import numpy as np


def idx(lin):
    """Index of a single-variable Lin handle."""
    (i, c), = lin.coeffs.items()
    assert c == 1.0 and lin.const == 0.0
    return i


def beam_reference_point(prob, vars_, iterate):
    """x vector placing the subproblem at its own expansion point."""
    x = np.zeros(prob.num_vars)
    x[idx(vars_.t)] = iterate.t
    if vars_.a is not None:
        for v, val in zip(vars_.a, iterate.a):
            x[idx(v)] = val
    if vars_.beta is not None:
        x[idx(vars_.beta)] = iterate.beta
    for v, val in zip(vars_.alpha, iterate.alpha):
        x[idx(v)] = val
    for v, val in zip(vars_.rho, iterate.rho):
        x[idx(v)] = val
    if vars_.alpha_c is not None:
        for v, val in zip(vars_.alpha_c, iterate.alpha_c):
            x[idx(v)] = val
        for v, val in zip(vars_.rho_c, iterate.rho_c):
            x[idx(v)] = val
    for i in (0, 1, 2):
        if vars_.p_re[i] is None:
            continue
        col = iterate.P[:, i] / vars_.scale
        for v, val in zip(vars_.p_re[i], col.real):
            x[idx(v)] = val
        for v, val in zip(vars_.p_im[i], col.imag):
            x[idx(v)] = val
    return x


def phase_reference_point(prob, vars_, iterate):
    """x vector for the phase subproblem at its expansion point (dnu = 0)."""
    x = np.zeros(prob.num_vars)
    x[idx(vars_.t)] = iterate.t
    for v, val in zip(vars_.eta, iterate.eta):
        x[idx(v)] = val
    for v, val in zip(vars_.delta, iterate.delta):
        x[idx(v)] = val
    for v, val in zip(vars_.kappa, iterate.kappa):
        x[idx(v)] = val
    if vars_.eta_c2 is not None:
        x[idx(vars_.eta_c2)] = iterate.eta_c2
        x[idx(vars_.delta_c2)] = iterate.delta_c2
        x[idx(vars_.kappa_c2)] = iterate.kappa_c2
    return x


def block_by_label(prob, label):
    matches = [b for b in prob.blocks if b.label == label]
    assert len(matches) == 1, f"{label}: {len(matches)} matches"
    return matches[0]


def rsoc_tightness(block, x):
    """2 u v - ||w||^2 of a rotated-cone block at x (0 = tight)."""
    v = np.array([r.evaluate(x) for r in block.rows])
    return 2.0 * v[0] * v[1] - float(np.dot(v[2:], v[2:]))
