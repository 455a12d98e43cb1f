"""bwb: a numerical workbench for finite-dimensional normed-space geometry."""

from .spaces import (
    DirectSum,
    DiscreteLp,
    EpsNet,
    FiniteCK,
    Lp,
    NormSpec,
    PolytopeByFacets,
    PolytopeByGenerators,
    Pullback,
    Quotient,
    eps_net,
    eval_norm,
    quotient_norm,
)

__all__ = [
    "DirectSum",
    "DiscreteLp",
    "EpsNet",
    "FiniteCK",
    "Lp",
    "NormSpec",
    "PolytopeByFacets",
    "PolytopeByGenerators",
    "Pullback",
    "Quotient",
    "eps_net",
    "eval_norm",
    "quotient_norm",
]

__version__ = "0.1.0"
