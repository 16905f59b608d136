"""Certified lower bounds for covering degree and covering gonality of complete intersections."""

__version__ = "0.1.0"

from .covdeg import (  # noqa: E402
    BoundCertificate,
    BudgetExhausted,
    CoveringDegreeEngine,
    HypothesisViolated,
    MultiDegreeProblem,
    best_certified_bound,
    exact_covdeg,
    verify_certificate,
)

__all__ = [
    "BoundCertificate",
    "BudgetExhausted",
    "CoveringDegreeEngine",
    "HypothesisViolated",
    "MultiDegreeProblem",
    "__version__",
    "best_certified_bound",
    "exact_covdeg",
    "verify_certificate",
]
