from sla_lab.services.ensemble.service import EnsembleResult, run_ensemble, seeded_configs

__all__ = ["EnsembleResult", "run_ensemble", "seeded_configs"]
