"""Exact truncated expansions in the p-adic Mal'cev-Neumann field."""
from .errors import (CertificationFailed, DomainError, IndeterminateValuation, InvalidPrime,
                     MNError, NotInvertible, OutOfWindow, PrecisionError, ResidueRootMissing)
from .exact_arith import vp_rational
from .expansions import (REGISTRY, Expander, VerificationReport, build_named, residual_check,
                         uniformizer, verify_identity)
from .gfq import FieldCtx
from .mn_series import MNContext, MNElement
from .newton import MNPoly, newton_polygon, newton_run, phi_cyclotomic
from .sigma_ring import SigmaElement, sigma_truncated, substitute
from .witt import WittCtx

__version__ = "0.1.0"
