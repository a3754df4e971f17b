"""Finite-scale toolkit for forcing a prescribed cofinal structure into the null ideal."""

from .dyadic_cantor import ClopenEnumeration, ClopenSet, Dyadic, ScaleFunction
from .errors import (
    CertificateFailure,
    DepthExhausted,
    NullForcingError,
    PreconditionViolated,
    ValidationError,
)
from .generic_sim import AddName, GenericRun, Join, Prolong, Witness, run, verify
from .names import CheckName, GroundFunction, Name, RSlalomName, decide
from .nq_forcing import Entry, NQCondition, NQForcing
from .ranked_poset import TOP, RankedPoset
from .slaloms import PartialSlalom, r_phi

__version__ = "0.1.0"
