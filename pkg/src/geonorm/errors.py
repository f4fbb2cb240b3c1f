"""Exception types shared across the package."""

from __future__ import annotations


class GeonormError(Exception):
    """Base class for all errors raised by this package."""


class EmptyInput(GeonormError):
    """An operation that needs at least one point received none."""


class HemisphereViolation(GeonormError):
    """No open hemisphere centered on the point cloud's mean contains every point.

    Carries the witness pair of near-antipodal input points so callers can
    report which locations made the hull ill-defined.
    """

    def __init__(self, witness, separation_deg):
        self.witness = witness
        self.separation_deg = separation_deg
        a, b = witness
        super().__init__(
            "point set spans more than a hemisphere: "
            f"({a.lat:.4f}, {a.lon:.4f}) and ({b.lat:.4f}, {b.lon:.4f}) "
            f"are {separation_deg:.2f} degrees apart"
        )


class UnknownCountry(GeonormError):
    """A country code is not present in the world model."""

    def __init__(self, iso2, suggestions=()):
        self.iso2 = iso2
        self.suggestions = tuple(suggestions)
        msg = f"unknown country code {iso2!r}"
        if self.suggestions:
            msg += " (did you mean: " + ", ".join(self.suggestions) + "?)"
        super().__init__(msg)


class ParseError(GeonormError):
    """An input file failed to parse; names the file and line."""

    def __init__(self, source, line_no, message):
        self.source = source
        self.line_no = line_no
        super().__init__(f"{source}:{line_no}: {message}")


class ValidationError(GeonormError):
    """Parsed input violated a structural invariant."""


class ConflictError(GeonormError):
    """Two table rows assign conflicting values to the same key."""
