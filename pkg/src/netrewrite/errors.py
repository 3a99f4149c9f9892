class NetRewriteError(Exception):
    """Base class for all errors raised by the package."""


class BudgetExceeded(NetRewriteError):
    """An enumeration would exceed its configured cap."""

    def __init__(self, what: str, cap: int):
        super().__init__(f"{what}: budget of {cap} exceeded")
        self.what = what
        self.cap = cap


class ParseError(NetRewriteError):
    def __init__(self, message: str, line: int | None = None, source: str = "<input>"):
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)
        self.line = line
        self.source = source


class InvalidNet(NetRewriteError):
    pass


class NuoError(NetRewriteError):
    """Raised for bad covers, bad context indices and inconsistent overlaps.

    ``kind`` is one of ``not-a-cover``, ``bad-index``, ``not-induced``,
    ``inconsistent-overlap``.
    """

    def __init__(self, kind: str, message: str):
        super().__init__(f"{kind}: {message}")
        self.kind = kind


class NbhError(NetRewriteError):
    """``kind``: ``block-not-in-domain``, ``linkage-lost``, ``overlapping-blocks``."""

    def __init__(self, kind: str, message: str):
        super().__init__(f"{kind}: {message}")
        self.kind = kind


class RewireError(NetRewriteError):
    """A right side could not absorb the boundary links of a redex."""

    def __init__(self, failures):
        self.failures = list(failures)
        super().__init__("rewire-failure: " + "; ".join(self.failures))


class SynthesisError(NetRewriteError):
    """``kind``: ``no-redex``, ``preimage-not-found``, ``not-alpanbh``, ``no-representation``."""

    def __init__(self, kind: str, message: str):
        super().__init__(f"{kind}: {message}")
        self.kind = kind


class UniverseTooLarge(NetRewriteError):
    pass
