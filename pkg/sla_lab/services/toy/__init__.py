from sla_lab.services.toy.service import (
    PAIRS,
    TOY_HEADER,
    ToyMode,
    ToyResult,
    check_pair,
    parse_pair,
    toy_config,
    toy_experiment,
    toy_sweep,
)

__all__ = [
    "PAIRS",
    "TOY_HEADER",
    "ToyMode",
    "ToyResult",
    "check_pair",
    "parse_pair",
    "toy_config",
    "toy_experiment",
    "toy_sweep",
]
