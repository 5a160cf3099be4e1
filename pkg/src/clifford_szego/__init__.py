"""Szego kernels, metrics and Caratheodory-type bounds for Clifford-valued Hardy spaces."""
from . import calculus, clifford, harness, metric, mobius, monogenic, quadrature, szego
from .clifford import Multivector, Paravector, algebra
from .metric import SzegoMetric
from .mobius import VahlenMatrix, apply, helper_map
from .quadrature import BoundarySurface
from .szego import TruncatedSzegoKernel, build_kernel

__version__ = "0.1.0"

__all__ = [
    "BoundarySurface",
    "Multivector",
    "Paravector",
    "SzegoMetric",
    "TruncatedSzegoKernel",
    "VahlenMatrix",
    "algebra",
    "apply",
    "build_kernel",
    "calculus",
    "clifford",
    "harness",
    "helper_map",
    "metric",
    "mobius",
    "monogenic",
    "quadrature",
    "szego",
]
