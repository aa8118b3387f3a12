"""Exact finite-dimensional checks for formal deformation quantization.

Scalars are truncated formal power series over Q(i); every positivity claim
comes with a certificate or a witness.
"""

from .errors import *  # noqa: F401,F403
from .modrep import *  # noqa: F401,F403
from .morita import *  # noqa: F401,F403
from .positivity import *  # noqa: F401,F403
from .report import FAIL, INDETERMINATE, PASS, CheckResult, Report
from .rieffel import *  # noqa: F401,F403
from .scalars import (DEFAULT_ORDER, OrderedScalar, Scalar, Sign, TruncationContext, ordered_sign,
                      scalar_conj, scalar_from_json, scalar_invert, scalar_mul, scalar_to_json)
from .staralg import *  # noqa: F401,F403

__version__ = "0.1.0"
