from sla_lab.infrastructure.checkpoint.npz_store import FORMAT_VERSION, NpzCheckpointStore

__all__ = ["FORMAT_VERSION", "NpzCheckpointStore"]
