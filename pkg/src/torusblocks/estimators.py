"""Estimator-style wrappers: configure a route, fit it once, predict the block at given q."""

from __future__ import annotations

import inspect

import numpy as np

from .dotsenko import DFConfig, df_A_tilde, df_coefficients
from .gmc import MCConfig, estimate_G
from .nekrasov import block_series
from .qseries import eta_norm_series, mul, pow_real
from .specfn import BlockParams, eta_norm
from .zamo import recursion_series

ROUTES = ("nekrasov", "zamo", "gmc", "df")


class NotFittedError(RuntimeError):
    pass


class _ParamsMixin:
    @classmethod
    def _param_names(cls):
        sig = inspect.signature(cls.__init__)
        return [p for p in sig.parameters if p != "self"]

    def get_params(self, deep: bool = True) -> dict:
        return {k: getattr(self, k) for k in self._param_names()}

    def set_params(self, **params):
        valid = self._param_names()
        for k, v in params.items():
            if k not in valid:
                raise ValueError(f"invalid parameter {k!r} for {type(self).__name__}")
            setattr(self, k, v)
        return self

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.get_params().items())
        return f"{type(self).__name__}({args})"


class BlockEstimator(_ParamsMixin):
    """The torus block G(q) computed by one of four routes.

    ``fit`` builds the q-series for the series routes ("nekrasov", "zamo") and
    validates the configuration for the sampling and quadrature routes ("gmc",
    "df").  ``predict`` returns block values at an array of real q.  For "df"
    alpha is fixed to -N * gamma and ``alpha`` is ignored.
    """

    def __init__(self, route="nekrasov", gamma=1.0, P=0.5, alpha=0.4, order=12, N=1,
                 samples=20_000, seed=0, modes=512, grid=4096, quad_points=40):
        self.route = route
        self.gamma = gamma
        self.P = P
        self.alpha = alpha
        self.order = order
        self.N = N
        self.samples = samples
        self.seed = seed
        self.modes = modes
        self.grid = grid
        self.quad_points = quad_points

    def _params(self) -> BlockParams:
        alpha = -self.N * self.gamma if self.route == "df" else self.alpha
        return BlockParams(self.gamma, self.P, alpha)

    def fit(self, X=None, y=None):
        if self.route not in ROUTES:
            raise ValueError(f"route must be one of {ROUTES}")
        self.params_ = self._params()
        if self.route == "nekrasov":
            self.series_ = block_series(self.params_, self.order)
        elif self.route == "zamo":
            self.series_ = recursion_series(self.params_, self.order)
        elif self.route == "gmc":
            self.mc_config_ = MCConfig(samples=self.samples, seed=self.seed,
                                       N_modes=self.modes, grid_points=self.grid)
        else:
            self.df_config_ = DFConfig(self.N, self.quad_points)
        return self

    def _check_fitted(self):
        if not hasattr(self, "params_"):
            raise NotFittedError("call fit before predict")

    def predict(self, q) -> np.ndarray:
        self._check_fitted()
        qs = np.atleast_1d(np.asarray(q, dtype=float))
        if self.route in ("nekrasov", "zamo"):
            return np.array([self.series_(x) for x in qs])
        if self.route == "gmc":
            return np.array([estimate_G(self.params_, x, self.mc_config_)[0] for x in qs])
        p = self.params_
        power = 1 - p.alpha * (p.Q - p.alpha / 2)
        return np.array([eta_norm(x).real ** power * df_A_tilde(self.df_config_, p.gamma, p.P, x) for x in qs])

    def predict_with_error(self, q):
        """(values, standard errors); errors are zero for the deterministic routes."""
        self._check_fitted()
        qs = np.atleast_1d(np.asarray(q, dtype=float))
        if self.route != "gmc":
            return self.predict(qs), np.zeros(qs.size)
        out = [estimate_G(self.params_, x, self.mc_config_) for x in qs]
        return np.array([v for v, _ in out]), np.array([e for _, e in out])

    def coefficients(self, K: int | None = None):
        """Taylor coefficients in q (series routes directly, "df" by extraction)."""
        self._check_fitted()
        if self.route in ("nekrasov", "zamo"):
            return self.series_ if K is None else self.series_.truncate(K)
        if self.route == "df":
            p = self.params_
            K = K or 16
            tilde = df_coefficients(self.df_config_, p.gamma, p.P, max(K, 16)).series
            eta_part = pow_real(eta_norm_series(tilde.order), 1 - p.alpha * (p.Q - p.alpha / 2))
            return mul(eta_part, tilde).truncate(K)
        raise ValueError("the gmc route has no coefficient extraction")
