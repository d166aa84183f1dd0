"""Extremal problems, geodesics and extension sets for the symmetrized bidisc."""

from .core import Datum, DiscDatum, Mobius, PointG, Region

__all__ = ["Datum", "DiscDatum", "Mobius", "PointG", "Region"]
__version__ = "0.1.0"
