"""Frames and Parseval frame vectors on Hilbert C(X)-modules over a finite set X."""
from .algebra import *  # noqa: F401,F403
from .hilbert_module import *  # noqa: F401,F403
from .frames import *  # noqa: F401,F403
from .groupsys import *  # noqa: F401,F403
from .commutant import *  # noqa: F401,F403
from .parametrize import *  # noqa: F401,F403
from .io import *  # noqa: F401,F403
from .random_instances import *  # noqa: F401,F403

__version__ = "0.1.0"
