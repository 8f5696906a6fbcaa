"""Numerics for the elliptic quantum algebra A_{q,p}(gl(N)_c).

Modules: ``theta`` (certified products and theta functions), ``rmatrix``
(the elliptic R-matrix and its identities), ``structfn`` (exchange structure
functions), ``surfaces`` (surfaces S_mn and abelianity loci), ``limits``
(scaling and Poisson limits) and ``cli``.
"""

__version__ = "1.0.0"

from .errors import *  # noqa: F401,F403
from .params import ModelParams  # noqa: F401
from .theta import DEFAULT_TRUNCATION, Characteristics, Truncation, theta_big, theta_char  # noqa: F401
