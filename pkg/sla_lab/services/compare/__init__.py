from sla_lab.services.compare.service import COMPARE_HEADER, CompareCell, compare, objective_config

__all__ = ["COMPARE_HEADER", "CompareCell", "compare", "objective_config"]
