"""Exception hierarchy shared across the toolkit.

Every error carries the name of the subsystem it belongs to so the command
line layer can emit machine-parsable ``ERROR:<code>:<module>:<name>`` lines.
"""

from __future__ import annotations


class VibrolineError(Exception):
    """Base class for all domain errors."""

    module = "vibroline"

    @property
    def name(self) -> str:
        return type(self).__name__


# -- geometry / structures ------------------------------------------------

class MismatchedStructures(VibrolineError):
    """Ground and excited structures differ in lattice, ordering, or count."""

    module = "model"


class WrapAmbiguity(VibrolineError):
    """A displacement reaches half a lattice vector; minimum image undefined."""

    module = "model"


# -- lattice dynamics ------------------------------------------------------

class InconsistentIndices(VibrolineError):
    """Force-constant indices do not match the structure they are used with."""

    module = "phonons"


class NotHermitian(VibrolineError):
    """Dynamical matrix asymmetry exceeds tolerance."""

    module = "phonons"


class NotCommensurate(VibrolineError):
    """Supercell lattice is not an integer multiple of the primitive lattice."""

    module = "phonons"


# -- force-constant fitting ------------------------------------------------

class SingularFit(VibrolineError):
    """Regression cannot be solved: rank-deficient design with no ridge."""

    module = "ifcfit"


class InsufficientData(VibrolineError):
    """Too few snapshots to form a training / validation split."""

    module = "ifcfit"


# -- vibronic coupling and lineshapes ---------------------------------------

class DimensionMismatch(VibrolineError):
    """Phonon basis size does not match the structure pair."""

    module = "vibronic"


class GridTooCoarse(VibrolineError):
    """Energy grid spacing exceeds sigma/3."""

    module = "vibronic"


class WindowTooNarrow(VibrolineError):
    """0.1% or more of the spectral weight falls outside the energy window."""

    module = "vibronic"


class NoPeaks(VibrolineError):
    """Peak extraction found no local maxima."""

    module = "vibronic"


# -- thermal activation fits -------------------------------------------------

class NonConvergence(VibrolineError):
    """Refinement did not reach the gradient tolerance within the budget."""

    module = "thermal"


class DegenerateData(VibrolineError):
    """Series carries no usable variation (all values equal)."""

    module = "thermal"


# -- command line ------------------------------------------------------------

class ParseError(VibrolineError):
    """Malformed input file; message cites the offending location."""

    module = "cli"
