"""Trivariate bicycle CSS codes: construction, distance certification, code search
and BP-OSD code-capacity simulation."""

from .algebra import GroupElement, ParseError, Poly, Torus, poly_parse, poly_to_matrix, poly_transpose
from .code import CodeError, CssCode, build_code, code_from_strings, verify_css
from .decoder import BpOsdDecoder, DecoderConfig, DecodeResult
from .distance import DistanceCertificate, DistancePolicy, certify_distance, random_is_upper_bound
from .linalg import BitMatrix, BitVector

__version__ = "0.1.0"

__all__ = [
    "BitMatrix",
    "BitVector",
    "BpOsdDecoder",
    "CodeError",
    "CssCode",
    "DecodeResult",
    "DecoderConfig",
    "DistanceCertificate",
    "DistancePolicy",
    "GroupElement",
    "ParseError",
    "Poly",
    "Torus",
    "build_code",
    "certify_distance",
    "code_from_strings",
    "poly_parse",
    "poly_to_matrix",
    "poly_transpose",
    "random_is_upper_bound",
    "verify_css",
]
