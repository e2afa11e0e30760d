"""Numerical toolkit for quaternionic integral representations.

Modules:

* :mod:`quatrep.quat`        quaternion and H^n arithmetic, matrix model, argument increments
* :mod:`quatrep.forms`       quaternion-valued exterior forms, pullbacks and fluxes
* :mod:`quatrep.kernels`     Bochner-Martinelli type kernels and Leray maps
* :mod:`quatrep.integration` quadrature, domains and the integral operators
* :mod:`quatrep.dbar`        Cauchy-Riemann residuals, the d-tilde operator and its solvers
* :mod:`quatrep.geometry`    convexity, plurisubharmonicity and hull estimates
* :mod:`quatrep.jacobi`      real Jacobi matrices, rank tests and local inverses
* :mod:`quatrep.cli`         command-line verification harness
"""
from .quat import (
    BASIS, E, I, J, K, Quaternion, QuaternionDomainError, as_hpoint, as_real, channels,
    circle_path, delta_arg, from_channels, hnorm, hpoint, qconj, qexp, qinv, qln, qmul,
    qnorm, scalar_product,
)
from .forms import FormField, FormValue, SurfacePatch, dquat, ext_deriv, wedge
from .integration import DomainSpec, QuadratureSpec, bm_boundary, bm_volume, kernel_normalization
from .dbar import cr_residual, dbar_form, dbar_solve
from .jacobi import JacobiMatrix, jacobi_real, local_inverse, rank_r

__version__ = "0.1.0"

__all__ = [
    "BASIS", "E", "I", "J", "K", "Quaternion", "QuaternionDomainError", "as_hpoint", "as_real",
    "channels", "circle_path", "delta_arg", "from_channels", "hnorm", "hpoint", "qconj", "qexp",
    "qinv", "qln", "qmul", "qnorm", "scalar_product", "FormField", "FormValue", "SurfacePatch",
    "dquat", "ext_deriv", "wedge", "DomainSpec", "QuadratureSpec", "bm_boundary", "bm_volume",
    "kernel_normalization", "cr_residual", "dbar_form", "dbar_solve", "JacobiMatrix",
    "jacobi_real", "local_inverse", "rank_r",
]
