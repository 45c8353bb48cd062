"""Exact A1-Euler characteristics of smooth complete toric varieties."""

__version__ = "0.1.0"

from .gw import GWClass, H, ONE, ZERO, diag, gw_equal, to_canonical_string  # noqa: E402
from .k0var import chi_c, orbit_chi, parse_expr  # noqa: E402
from .pairing import chi_a1, gram_matrix, hochschild_dims, hodge_table  # noqa: E402
from .toric import Fan, builtin, load_fan, star_subdivision  # noqa: E402

__all__ = [
    "GWClass", "H", "ONE", "ZERO", "diag", "gw_equal", "to_canonical_string",
    "chi_c", "orbit_chi", "parse_expr", "chi_a1", "gram_matrix", "hochschild_dims",
    "hodge_table", "Fan", "builtin", "load_fan", "star_subdivision",
]
