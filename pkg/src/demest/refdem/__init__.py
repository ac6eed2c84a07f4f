"""Ground-truth detector error models and DEM comparison."""

from .compare import RelErrReport, RelErrRow, compare_dems
from .derive import basis_indices, component_masks, dem_distribution, derive_dem
from .model import (
    DEM,
    DemFormatError,
    ErrorMechanism,
    format_signature,
    is_clamped,
    mechanism_class,
    parse_signature,
    weight_of,
    xor_combine,
)

__all__ = [
    "DEM",
    "DemFormatError",
    "ErrorMechanism",
    "RelErrReport",
    "RelErrRow",
    "basis_indices",
    "compare_dems",
    "component_masks",
    "dem_distribution",
    "derive_dem",
    "format_signature",
    "is_clamped",
    "mechanism_class",
    "parse_signature",
    "weight_of",
    "xor_combine",
]
