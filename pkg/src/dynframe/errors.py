"""Exception hierarchy shared by every dynframe module."""


class DynFrameError(Exception):
    """Base class for all dynframe errors."""


class NonConvergence(DynFrameError):
    """An iterative kernel (LAPACK or the frame algorithm) did not converge."""


class NotHermitian(DynFrameError, ValueError):
    pass


class NotAFrame(DynFrameError):
    """The family has no usable lower frame bound at the configured cutoff."""


class IndexMismatch(DynFrameError, ValueError):
    pass


class InconsistentVerdicts(DynFrameError):
    """Two independent routes to the same verdict disagree.

    Raised instead of silently picking one answer; the message carries the
    residuals of both routes so the tolerance pathology can be diagnosed.
    """


class CommutationViolated(DynFrameError, ValueError):
    pass


class NotCertifiable(DynFrameError):
    """No contraction certificate could be found for the orbit tail."""


class NotCertified(DynFrameError):
    pass


class NotFound(DynFrameError):
    """No intertwiner in the commutant maps the first vector to the second."""


class DimMismatch(DynFrameError, ValueError):
    pass


class EmptyWindow(DynFrameError, ValueError):
    pass
