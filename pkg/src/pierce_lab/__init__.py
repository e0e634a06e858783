"""Exact Pierce expansions, seeded digit generators and certified checks."""

__version__ = "0.1.0"

from .expansion import (  # noqa: E402
    INFINITY,
    NO_DIFFERENCE,
    DigitWord,
    Interval,
    Tail,
    digit_expand,
    distance_bounds,
    expand_trace,
    fundamental_interval,
    hat,
    interval_length,
    is_realizable,
    phi_eval,
    phi_partial,
    pierce_step,
    rho,
    truncate,
)
from .generators import (  # noqa: E402
    AdmissibleGenerator,
    DigitGenerator,
    Enclosure,
    enclose,
    g_map,
    parse_generator,
    psi_index,
    psi_transform,
    random_generator,
    sample_uniform_prefix,
)
from .verify import Report, Verdict  # noqa: E402
