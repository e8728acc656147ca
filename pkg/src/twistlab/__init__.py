"""L-functions of trace functions twisted by characters of (F_q[t]/t^(d+1))^x / F_q^x."""

from .errors import *  # noqa: F401,F403
from .ffield import FiniteField, ExtensionField, extend, make_field
from .cyclo import CycloValue
from .wgroup import Character, WittGroup, make_group
from .wittring import GaloisRing, make_galois_ring, match_characters
from .tracefn import (TraceFunction, artin_schreier, character_twist, elliptic, kummer, legendre,
                      trivial)
from .lfun import LData, compute_power_sums, l_polynomial, power_sum, twist_family
from .stats import (cue_monte_carlo, cue_reference, independence_identity, joint_moment_report,
                    moment_report, orthogonality_identity, trend_table)

__version__ = "0.1.0"
