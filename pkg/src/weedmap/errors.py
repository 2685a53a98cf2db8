"""Exception hierarchy for the weedmap package.

Every error raised by the library derives from :class:`WeedMapError`, so
callers (and the CLI) can catch one base class. Subclasses are grouped by
the subsystem that raises them.
"""


class WeedMapError(Exception):
    """Base class for all weedmap errors."""


# --- raster / manifest IO ---------------------------------------------------

class MissingFileError(WeedMapError):
    """A referenced file does not exist."""


class SchemaViolationError(WeedMapError):
    """A manifest or header field is missing or malformed.

    The message names the offending field.
    """

    def __init__(self, field: str, detail: str = ""):
        self.field = field
        msg = f"invalid field '{field}'"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class EmptyBandListError(SchemaViolationError):
    """A manifest declares no bands."""

    def __init__(self):
        super().__init__("bands", "band list is empty")


class DecodeError(WeedMapError):
    """An image or binary container failed to decode."""


class DimensionMismatchError(WeedMapError):
    """Two planes that must share dimensions do not."""


class InvariantViolationError(WeedMapError):
    """A value breaks a documented data-model invariant."""


# --- radiometric calibration ------------------------------------------------

class DegenerateVignetteError(WeedMapError):
    """The vignette polynomial evaluates to a nonphysical divisor."""


class ZeroDenominatorError(WeedMapError):
    """The exposure denominator of the radiance model vanishes."""


class NonPositivePanelRadianceError(WeedMapError):
    """The reflectance panel region yields no positive radiance."""


# --- channel composition ----------------------------------------------------

class MissingBandError(WeedMapError):
    """A required named band is absent from the raster."""

    def __init__(self, name: str):
        self.band_name = name
        super().__init__(f"missing band '{name}'")


# --- tiling -----------------------------------------------------------------

class ZeroDimensionError(WeedMapError):
    """A map or tile dimension is not positive."""


class DuplicateGridCellError(WeedMapError):
    """Two tiles claim the same grid cell during assembly."""


class OutOfRangeIndexError(WeedMapError):
    """A tile grid index lies outside the tiling plan."""


# --- classification ---------------------------------------------------------

class ClassifierFailureError(WeedMapError):
    """A tile classifier raised or produced invalid output."""


class NoRowsFoundError(WeedMapError):
    """No crop-row signal was detected in a tile."""


class MalformedPredictionError(WeedMapError):
    """An ingested prediction file could not be parsed."""


class GridMismatchError(WeedMapError):
    """An ingested prediction does not fit the tiling plan."""


# --- statistics -------------------------------------------------------------

class EmptyDatasetError(WeedMapError):
    """A statistic was requested over zero label maps."""


class AllClassesAbsentError(WeedMapError):
    """No class has a nonzero frequency of appearance."""


class NonPositiveInputError(WeedMapError):
    """A physical quantity that must be positive is not."""


# --- evaluation -------------------------------------------------------------

class NoPositivesError(WeedMapError):
    """Ground truth contains no positive pixel for the class."""


class EmptyMatrixError(WeedMapError):
    """A confusion matrix holds no observations."""


# --- synthetic fields -------------------------------------------------------

class ConfigInvalidError(WeedMapError):
    """A field-generator configuration value is out of range."""
