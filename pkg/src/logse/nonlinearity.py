"""The logarithmic nonlinearity and the pointwise inequalities it satisfies."""

import numpy as np


def _check_eps(eps):
    if not 0.0 < eps < 1.0:
        raise ValueError(f"regularisation parameter must lie in (0, 1), got {eps}")


def g(z):
    """``z ln|z|^2``, with the value 0 at ``z = 0``.

    Evaluated as ``2 z ln|z|`` so that ``|z|^2`` never underflows; only an
    exact zero takes the guard branch.
    """
    z = np.asarray(z, dtype=complex)
    a = np.abs(z)
    logs = np.log(a, out=np.zeros_like(a), where=a > 0)
    out = 2.0 * z * logs
    return out if out.ndim else complex(out)


def g_eps(z, eps):
    """Regularised nonlinearity ``z ln(|z| + eps)^2``."""
    _check_eps(eps)
    z = np.asarray(z, dtype=complex)
    out = 2.0 * z * np.log(np.abs(z) + eps)
    return out if out.ndim else complex(out)


def apply_B(psi, V, lam):
    """Pointwise ``V psi + lam ln(|psi|^2) psi`` on nodal arrays."""
    psi = np.asarray(psi)
    V = np.asarray(V)
    if V.ndim and V.shape != psi.shape:
        raise ValueError(f"potential shape {V.shape} does not match field shape {psi.shape}")
    return V * psi + lam * g(psi)


def im_pairing(z1, z2):
    """``Im[(g(z1) - g(z2)) conj(z1 - z2)]``.

    Uses the identity ``Im(z1 conj z2) (ln|z2|^2 - ln|z1|^2)``, which avoids
    the cancellation of the direct product when ``z1`` is close to ``z2``.
    """
    z1 = np.asarray(z1, dtype=complex)
    z2 = np.asarray(z2, dtype=complex)
    a1, a2 = np.abs(z1), np.abs(z2)
    cross = np.imag(z1 * np.conj(z2))
    nz = (a1 > 0) & (a2 > 0)
    # a zero argument makes cross vanish
    ratio = np.log(np.where(nz, a2, 1.0)) - np.log(np.where(nz, a1, 1.0))
    return np.where(nz, 2.0 * cross * ratio, 0.0)


def im_pairing_check(z1, z2, rtol=1e-12):
    """Whether ``|Im[(g(z1)-g(z2)) conj(z1-z2)]| <= 2 |z1 - z2|^2`` holds.

    ``rtol`` absorbs floating point rounding of the two sides only.
    """
    lhs = np.abs(im_pairing(z1, z2))
    rhs = 2.0 * np.abs(np.asarray(z1) - np.asarray(z2)) ** 2
    ok = lhs <= rhs * (1.0 + rtol) + 1e-300
    return bool(ok) if np.ndim(ok) == 0 else ok


def log_growth(s, eps):
    """``L_eps(s) = max(|ln eps|, ln(1 + s))``."""
    return np.maximum(abs(np.log(eps)), np.log1p(s))


def lipschitz_bound(z1, z2, eps):
    """Right-hand side ``4 eps + 2 (1 + L_eps(max|z|)) |z1 - z2|``."""
    _check_eps(eps)
    m0 = np.maximum(np.abs(z1), np.abs(z2))
    return 4.0 * eps + 2.0 * (1.0 + log_growth(m0, eps)) * np.abs(np.asarray(z1) - np.asarray(z2))


def lipschitz_bound_check(z1, z2, eps):
    """Whether ``|g(z1) - g(z2)|`` respects :func:`lipschitz_bound`."""
    lhs = np.abs(np.asarray(g(z1)) - np.asarray(g(z2)))
    ok = lhs <= lipschitz_bound(z1, z2, eps)
    return bool(ok) if np.ndim(ok) == 0 else ok
