"""Finite projective geometry over GF(q^2): Hermitian varieties, the F_p code
of points and hyperplanes, intersection spectra and exact identity audits."""

from .errors import (
    CounterexampleError,
    HermcodeError,
    IntegrityError,
    InvalidParameterError,
    ResourceLimitError,
)
from .field import Field, field_build
from .geometry import Geometry, PointSet, Subspace, geometry_build, pg
from .code import CharVector, CodeCertificate, code_member, dot, rank_fp, restrict_certificate
from .hermitian import HermitianForm, build_cone, build_hermitian, hermitian_size, singular_size
from .spectra import SpectrumReport, classify_knrq, quasi_hermitian_check, spectrum, unital_check

__version__ = "0.1.0"
