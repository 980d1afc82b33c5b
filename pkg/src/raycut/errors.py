"""Exception types raised across the toolkit."""


class RaycutError(Exception):
    """Base class for all raycut errors."""


# --- template geometry ---

class DegenerateTemplate(RaycutError):
    """Template has zero extent (collinear/coplanar vertices)."""


class NonWatertightMesh(RaycutError):
    """3D template mesh has an edge not shared by exactly two faces."""


class TooFewPoints(RaycutError):
    """Contour needs at least three points."""


class InvalidSeed(RaycutError):
    """Seed point is outside the field or outside the template."""


class NoIntersection(InvalidSeed):
    """A ray missed the template boundary entirely."""


# --- cost model ---

class WindowDegenerate(RaycutError):
    """Averaging window is too small to sample."""


class AverageNotSet(RaycutError):
    """node_cost called before estimate_average."""


# --- min cut ---

class InfiniteFlow(RaycutError):
    """Source and sink are joined by uncuttable arcs; the graph is malformed."""


class TooLarge(RaycutError):
    """Brute-force enumeration refused (too many nodes)."""


# --- pipeline ---

class EmptySegmentation(RaycutError):
    """Every ray came back empty; no object boundary found."""


class EmptyAtRay(RaycutError):
    """Some rays have no boundary node (partial emptiness)."""


class InternalError(RaycutError):
    """An invariant that should be unbreakable was broken."""


class OpenSurface(RaycutError):
    """Voxelization input is not a closed contour/mesh."""


# --- evaluation ---

class ShapeMismatch(RaycutError):
    """Masks being compared do not share extents/spacing."""


class EmptySet(RaycutError):
    """Aggregate statistics need at least one report."""


# --- shape model ---

class DegenerateShape(RaycutError):
    """Training shape has zero scatter; cannot be normalized."""


class DimensionMismatch(RaycutError):
    """Model parameter vector has the wrong length."""


# --- imaging I/O ---

class BadMagic(RaycutError):
    """File does not start with the expected magic token."""


class TruncatedData(RaycutError):
    """Pixel payload is shorter than the header promises."""


class HeaderMalformed(RaycutError):
    """Volume header file could not be parsed."""


class SizeMismatch(RaycutError):
    """Raw payload size disagrees with header dims/type."""
