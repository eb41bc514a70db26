"""Scikit-learn style wrappers around the time steppers.

The estimators are transformers from initial data to the solution at the
final time ``T``: ``fit`` validates the configuration (and, given data,
records a diagnostic trace), ``transform`` evolves each input field.

>>> from logse import Grid, EWIFSSolver, h2_datum
>>> grid = Grid.line(-16, 16, 128)
>>> solver = EWIFSSolver(grid=grid, lam=-1.0, tau=1e-2, T=0.1, cfl_policy="off")
>>> psi_T = solver.fit_transform(h2_datum(grid).nodal)
>>> psi_T.shape
(128,)
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .potentials import resolve
from .propagators import SolverConfig, evolve
from .validation import check_field, check_grid, check_nodal


class _LogSESolver(TransformerMixin, BaseEstimator):
    _scheme = None

    def _config(self):
        return SolverConfig(self.lam, self.tau, self.T, self._scheme,
                            self.cfl_policy, self.cfl_constant)

    def fit(self, X=None, y=None):
        """Validate parameters; with ``X`` also evolve it and keep ``trace_``."""
        grid = check_grid(self.grid)
        self.config_ = self._config()
        if X is None:
            self.config_.check_cfl(grid)
        self.potential_ = resolve(self.potential, grid)
        self.n_steps_ = self.config_.n_steps
        self.trace_ = None
        if X is not None:
            self.trace_ = self._run(check_field(X, grid), record=True)
        return self

    def _run(self, field, record=False):
        return evolve(field, self.potential_, self.config_,
                      sample_every=self.sample_every, record=record)

    def transform(self, X):
        """Solution at ``T`` for one nodal field or a batch stacked on leading axes."""
        check_is_fitted(self, "config_")
        grid = self.grid
        X = check_nodal(X, grid, allow_batch=True)
        batch = X.reshape((-1,) + grid.shape)
        out = np.empty_like(batch)
        for i, x in enumerate(batch):
            out[i] = self._run(check_field(x, grid)).final.nodal
        return out.reshape(X.shape)

    def fit_transform(self, X, y=None, **fit_params):
        X = check_nodal(X, check_grid(self.grid), allow_batch=True)
        if X.ndim == self.grid.dim:
            return self.fit(X).trace_.final.nodal
        return self.fit().transform(X)

    @property
    def final_(self):
        check_is_fitted(self, "trace_")
        return self.trace_.final


class EWIFSSolver(_LogSESolver):
    """First-order exponential wave integrator with spectral discretisation.

    Parameters
    ----------
    grid : Grid
    lam : float
        Coefficient of the logarithmic nonlinearity.
    tau, T : float
        Time step and final time; ``T`` must be a multiple of ``tau``.
    potential : None, PotentialSpec, dict or nodal array
    cfl_policy : {"warn", "enforce", "off"}
    cfl_constant : float
        Constant ``C`` of the guard ``tau |ln tau| <= C h^2 / |ln h|``.
    sample_every : int or None
        Diagnostic sampling stride (in steps) used by ``fit``.
    """

    _scheme = "ewi_fs"

    def __init__(self, grid=None, lam=-1.0, tau=1e-3, T=1.0, potential=None,
                 cfl_policy="warn", cfl_constant=1.0, sample_every=None):
        self.grid = grid
        self.lam = lam
        self.tau = tau
        self.T = T
        self.potential = potential
        self.cfl_policy = cfl_policy
        self.cfl_constant = cfl_constant
        self.sample_every = sample_every


class StrangSolver(_LogSESolver):
    """Strang splitting with spectral discretisation; same parameters as :class:`EWIFSSolver`."""

    _scheme = "strang"

    def __init__(self, grid=None, lam=-1.0, tau=1e-3, T=1.0, potential=None,
                 cfl_policy="off", cfl_constant=1.0, sample_every=None):
        self.grid = grid
        self.lam = lam
        self.tau = tau
        self.T = T
        self.potential = potential
        self.cfl_policy = cfl_policy
        self.cfl_constant = cfl_constant
        self.sample_every = sample_every
