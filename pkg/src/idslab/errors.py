"""Exception types shared across the package."""


class IdsLabError(Exception):
    """Base class for all package errors."""


class DegenerateBasis(IdsLabError):
    """Lattice basis vectors are (numerically) linearly dependent."""


class EmptyBall(IdsLabError):
    """No nonzero dual-lattice vector inside the requested ball."""


class NotLatticeVector(IdsLabError):
    """A vector expected to lie on the dual lattice does not."""


class LatticeMismatch(IdsLabError):
    """Two objects built over different lattices were combined."""


class CutoffTooSmall(IdsLabError):
    """Energy cutoff too small for the requested construction."""


class NotHermitian(IdsLabError):
    """Matrix violates Hermitian symmetry beyond tolerance."""


class IllConditioned(IdsLabError):
    """Least-squares design matrix condition number exceeds the cap."""


class OutsideAnnulus(IdsLabError):
    """Point lies outside the spectral annulus under consideration."""


class HypothesisViolated(IdsLabError):
    """A block-model instance fails the perturbation-lemma hypotheses."""

    def __init__(self, failures):
        self.failures = list(failures)
        super().__init__("; ".join(self.failures))


class LabelAmbiguity(IdsLabError):
    """Crystallographic tie-break failed (exactly coincident coordinates)."""


class SmallDenominator(IdsLabError):
    """A second-order denominator is resonantly small (misclassification)."""


class NotResonant(IdsLabError):
    """Point is not in a resonance region, pencil construction undefined."""


class NotInvertible(IdsLabError):
    """A Schur-complement factor failed its invertibility precondition."""


class NoRoot(IdsLabError):
    """Root bracket contains no sign change."""


class MultiRoot(IdsLabError):
    """Root bracket contains more than the expected number of roots."""


class TripleCluster(IdsLabError):
    """Three kernel-block eigenvalues clustered within the pairing threshold."""


class NoContraction(IdsLabError):
    """Fixed-point iteration failed to contract."""


class DomainError(IdsLabError):
    """Argument outside the mathematical domain of the formula."""
