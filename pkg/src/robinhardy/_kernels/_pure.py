"""Numpy fallback for the assembly kernels.

Same call signatures as the compiled extension. Inputs are plain arrays so
either backend can be driven by the same assembly code:

* segments: cells are index pairs (i0, i1) with per-cell quadrature weights
  ``qw[c, q]`` that already include the geometric measure, the Gauss weight,
  and any pointwise weight function;
* triangles: index triples with constant basis gradients per cell.

``*_grad`` variants accumulate the derivative with respect to nodal values
into a caller-supplied array and return the energy value. ``eps2``
regularizes |gradient|**(p-2) at degenerate gradients for p < 2; energies
themselves always use the exact integrand.
"""

import numpy as np


def _pow_p(x, p):
    if p == 2.0:
        return x * x
    return np.abs(x) ** p


def _pow_signed(x, p):
    """|x|^(p-2) * x, the derivative kernel of |x|^p / p."""
    if p == 2.0:
        return x
    return np.abs(x) ** (p - 2.0) * x


def seg_mass(u, i0, i1, qw, phi0, phi1, p):
    vals = np.outer(u[i0], phi0) + np.outer(u[i1], phi1)
    return float((qw * _pow_p(vals, p)).sum())


def seg_mass_grad(u, i0, i1, qw, phi0, phi1, p, grad):
    vals = np.outer(u[i0], phi0) + np.outer(u[i1], phi1)
    total = float((qw * _pow_p(vals, p)).sum())
    core = p * qw * _pow_signed(vals, p)
    n = len(grad)
    grad += np.bincount(i0, weights=core @ phi0, minlength=n)
    grad += np.bincount(i1, weights=core @ phi1, minlength=n)
    return total


def seg_grad_energy(u, i0, i1, inv_h, measure, p):
    slope = (u[i1] - u[i0]) * inv_h
    return float((_pow_p(slope, p) * measure).sum())


def seg_grad_energy_grad(u, i0, i1, inv_h, measure, p, eps2, grad):
    slope = (u[i1] - u[i0]) * inv_h
    total = float((_pow_p(slope, p) * measure).sum())
    if p < 2.0 and eps2 > 0.0:
        mag = np.sqrt(slope * slope + eps2)
        core = p * mag ** (p - 2.0) * slope * measure * inv_h
    else:
        core = p * _pow_signed(slope, p) * measure * inv_h
    n = len(grad)
    grad += np.bincount(i1, weights=core, minlength=n)
    grad -= np.bincount(i0, weights=core, minlength=n)
    return total


def tri_mass(u, tri, qw, bary, p):
    vals = u[tri] @ bary.T
    return float((qw * _pow_p(vals, p)).sum())


def tri_mass_grad(u, tri, qw, bary, p, grad):
    vals = u[tri] @ bary.T
    total = float((qw * _pow_p(vals, p)).sum())
    core = (p * qw * _pow_signed(vals, p)) @ bary
    n = len(grad)
    for k in range(3):
        grad += np.bincount(tri[:, k], weights=core[:, k], minlength=n)
    return total


def tri_grad_energy(u, tri, gx, gy, area, p):
    ut = u[tri]
    dx = (ut * gx).sum(axis=1)
    dy = (ut * gy).sum(axis=1)
    if p == 2.0:
        return float(((dx * dx + dy * dy) * area).sum())
    mag = np.sqrt(dx * dx + dy * dy)
    return float((mag ** p * area).sum())


def tri_grad_energy_grad(u, tri, gx, gy, area, p, eps2, grad):
    ut = u[tri]
    dx = (ut * gx).sum(axis=1)
    dy = (ut * gy).sum(axis=1)
    sq = dx * dx + dy * dy
    if p == 2.0:
        total = float((sq * area).sum())
        coef = 2.0 * area
    else:
        mag = np.sqrt(sq)
        total = float((mag ** p * area).sum())
        reg = np.sqrt(sq + eps2) if (p < 2.0 and eps2 > 0.0) else mag
        with np.errstate(divide="ignore", invalid="ignore"):
            coef = np.where(reg > 0.0, p * reg ** (p - 2.0), 0.0) * area
    n = len(grad)
    for k in range(3):
        grad += np.bincount(tri[:, k], weights=coef * (dx * gx[:, k] + dy * gy[:, k]), minlength=n)
    return total
